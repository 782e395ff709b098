#include "ser/model/layers.hpp"

#include <cmath>

#include "ser/errors.hpp"

namespace ser::model {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

namespace {

Mat sigmoid_mat(const Mat& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

// Copies the time slice t out of a (B*T) x d batch.
Mat time_slice(const Mat& x, int batch, int steps, int t) {
  Mat out(batch, x.cols());
  for (int b = 0; b < batch; ++b) out.row(b) = x.row(b * steps + t);
  return out;
}

void add_time_slice(Mat& x, int batch, int steps, int t, const Mat& rows) {
  for (int b = 0; b < batch; ++b) x.row(b * steps + t) += rows.row(b);
}

}  // namespace

void lstm_cell_forward(const Mat& x_t, const Mat& h_prev, const Mat& c_prev,
                       const LstmWeights& w, Mat* h_t, Mat* c_t) {
  const auto units = w.recurrent.rows();
  if (x_t.cols() != w.kernel.rows() || h_prev.cols() != units ||
      c_prev.cols() != units || w.kernel.cols() != 4 * units)
    throw ShapeMismatch("lstm_cell_forward: dimension disagreement");

  Mat z = x_t * w.kernel + h_prev * w.recurrent;
  z.rowwise() += w.bias.row(0);

  const Mat i = sigmoid_mat(z.leftCols(units));
  const Mat f = sigmoid_mat(z.middleCols(units, units));
  const Mat g = z.middleCols(2 * units, units).array().tanh().matrix();
  const Mat o = sigmoid_mat(z.rightCols(units));

  *c_t = f.cwiseProduct(c_prev) + i.cwiseProduct(g);
  *h_t = o.cwiseProduct(c_t->array().tanh().matrix());
}

BiLstmLayer::BiLstmLayer(ParamStore& store, std::string name, int in_dim,
                         int units)
    : name_(std::move(name)), in_dim_(in_dim), units_(units) {
  auto make_direction = [&](const char* tag) {
    Direction d;
    d.kernel = &store.create(name_ + "/" + tag + "/kernel", in_dim, 4 * units);
    d.kernel->l2_penalized = true;
    d.recurrent =
        &store.create(name_ + "/" + tag + "/recurrent", units, 4 * units);
    d.bias = &store.create(name_ + "/" + tag + "/bias", 1, 4 * units);
    return d;
  };
  fwd_ = make_direction("fwd");
  bwd_ = make_direction("bwd");
}

LstmWeights BiLstmLayer::weights(bool backward_direction) const {
  const Direction& d = backward_direction ? bwd_ : fwd_;
  return LstmWeights{d.kernel->value, d.recurrent->value, d.bias->value};
}

void BiLstmLayer::run_direction(Direction& dir, const Mat& x, int batch,
                                int steps, bool reverse, Mat* out,
                                int out_col) const {
  const int u = units_;
  dir.i.assign(steps, Mat());
  dir.f.assign(steps, Mat());
  dir.g.assign(steps, Mat());
  dir.o.assign(steps, Mat());
  dir.c.assign(steps, Mat());
  dir.tanh_c.assign(steps, Mat());
  dir.h_prev.assign(steps, Mat());
  dir.c_prev.assign(steps, Mat());

  Mat h = Mat::Zero(batch, u);
  Mat c = Mat::Zero(batch, u);
  for (int step = 0; step < steps; ++step) {
    const int t = reverse ? steps - 1 - step : step;
    dir.h_prev[t] = h;
    dir.c_prev[t] = c;

    Mat z = time_slice(x, batch, steps, t) * dir.kernel->value +
            h * dir.recurrent->value;
    z.rowwise() += dir.bias->value.row(0);

    dir.i[t] = sigmoid_mat(z.leftCols(u));
    dir.f[t] = sigmoid_mat(z.middleCols(u, u));
    dir.g[t] = z.middleCols(2 * u, u).array().tanh().matrix();
    dir.o[t] = sigmoid_mat(z.rightCols(u));

    c = dir.f[t].cwiseProduct(c) + dir.i[t].cwiseProduct(dir.g[t]);
    dir.c[t] = c;
    dir.tanh_c[t] = c.array().tanh().matrix();
    h = dir.o[t].cwiseProduct(dir.tanh_c[t]);

    for (int b = 0; b < batch; ++b)
      out->row(b * steps + t).segment(out_col, u) = h.row(b);
  }
}

Mat BiLstmLayer::forward(const Mat& x, int batch, int steps, bool) {
  if (x.cols() != in_dim_ || x.rows() != static_cast<Eigen::Index>(batch) * steps)
    throw ShapeMismatch(name_ + ": bad input shape");
  x_cache_ = x;
  batch_ = batch;
  steps_ = steps;

  Mat out(x.rows(), 2 * units_);
  run_direction(fwd_, x, batch, steps, false, &out, 0);
  run_direction(bwd_, x, batch, steps, true, &out, units_);
  return out;
}

Mat BiLstmLayer::backprop_direction(Direction& dir, const Mat& dh_seq,
                                    int batch, int steps, bool reverse) {
  const int u = units_;
  Mat dx = Mat::Zero(x_cache_.rows(), in_dim_);
  Mat dh_carry = Mat::Zero(batch, u);
  Mat dc_carry = Mat::Zero(batch, u);

  for (int step = steps - 1; step >= 0; --step) {
    // walk opposite to the forward order of this direction
    const int t = reverse ? steps - 1 - step : step;

    Mat dh = time_slice(dh_seq, batch, steps, t) + dh_carry;
    const Mat do_ = dh.cwiseProduct(dir.tanh_c[t]);
    Mat dc = dh.cwiseProduct(dir.o[t])
                 .cwiseProduct((1.0 - dir.tanh_c[t].array().square()).matrix());
    dc += dc_carry;

    const Mat di = dc.cwiseProduct(dir.g[t]);
    const Mat df = dc.cwiseProduct(dir.c_prev[t]);
    const Mat dg = dc.cwiseProduct(dir.i[t]);
    dc_carry = dc.cwiseProduct(dir.f[t]);

    Mat dz(batch, 4 * u);
    dz.leftCols(u) =
        di.cwiseProduct(dir.i[t]).cwiseProduct((1.0 - dir.i[t].array()).matrix());
    dz.middleCols(u, u) =
        df.cwiseProduct(dir.f[t]).cwiseProduct((1.0 - dir.f[t].array()).matrix());
    dz.middleCols(2 * u, u) =
        dg.cwiseProduct((1.0 - dir.g[t].array().square()).matrix());
    dz.rightCols(u) =
        do_.cwiseProduct(dir.o[t]).cwiseProduct((1.0 - dir.o[t].array()).matrix());

    dir.kernel->grad +=
        time_slice(x_cache_, batch, steps, t).transpose() * dz;
    dir.recurrent->grad += dir.h_prev[t].transpose() * dz;
    dir.bias->grad += dz.colwise().sum();

    add_time_slice(dx, batch, steps, t, dz * dir.kernel->value.transpose());
    dh_carry = dz * dir.recurrent->value.transpose();
  }
  return dx;
}

Mat BiLstmLayer::backward(const Mat& dy) {
  if (dy.cols() != 2 * units_ || dy.rows() != x_cache_.rows())
    throw ShapeMismatch(name_ + ": bad gradient shape");
  const Mat dy_fwd = dy.leftCols(units_);
  const Mat dy_bwd = dy.rightCols(units_);
  Mat dx = backprop_direction(fwd_, dy_fwd, batch_, steps_, false);
  dx += backprop_direction(bwd_, dy_bwd, batch_, steps_, true);
  return dx;
}

BatchNormLayer::BatchNormLayer(ParamStore& store, std::string name, int dim,
                               double momentum)
    : name_(std::move(name)), momentum_(momentum) {
  gamma_ = &store.create(name_ + "/gamma", 1, dim);
  gamma_->value.setOnes();
  beta_ = &store.create(name_ + "/beta", 1, dim);
  running_mean_ = &store.create(name_ + "/running_mean", 1, dim, false);
  running_var_ = &store.create(name_ + "/running_var", 1, dim, false);
  running_var_->value.setOnes();
}

Mat BatchNormLayer::forward(const Mat& x, int, int, bool train) {
  if (x.cols() != gamma_->value.cols())
    throw ShapeMismatch(name_ + ": bad input width");
  train_cached_ = train;

  if (train) {
    if (x.rows() < 2)
      throw DegenerateBatch(name_ + ": batch statistics need >= 2 rows");
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::RowVectorXd var =
        (x.rowwise() - mean).array().square().colwise().mean();
    inv_std_ = (var.array() + kEps).rsqrt();
    xhat_ = (x.rowwise() - mean).array().rowwise() * inv_std_.array();

    running_mean_->value.row(0) =
        momentum_ * running_mean_->value.row(0) + (1.0 - momentum_) * mean;
    running_var_->value.row(0) =
        momentum_ * running_var_->value.row(0) + (1.0 - momentum_) * var;
  } else {
    inv_std_ = (running_var_->value.row(0).array() + kEps).rsqrt();
    xhat_ = (x.rowwise() - running_mean_->value.row(0)).array().rowwise() *
            inv_std_.array();
  }
  return (xhat_.array().rowwise() * gamma_->value.row(0).array())
             .rowwise() +
         beta_->value.row(0).array();
}

Mat BatchNormLayer::backward(const Mat& dy) {
  gamma_->grad += dy.cwiseProduct(xhat_).colwise().sum();
  beta_->grad += dy.colwise().sum();

  const Mat dxhat = dy.array().rowwise() * gamma_->value.row(0).array();
  if (!train_cached_)
    return dxhat.array().rowwise() * inv_std_.array();

  // Batch statistics depend on every row; the usual closed form.
  const double n = static_cast<double>(dy.rows());
  const Eigen::RowVectorXd sum_dxhat = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dxhat_xhat =
      dxhat.cwiseProduct(xhat_).colwise().sum();
  Mat dx = n * dxhat;
  dx.rowwise() -= sum_dxhat;
  dx -= xhat_.array().rowwise() * sum_dxhat_xhat.array();
  return (dx / n).array().rowwise() * inv_std_.array();
}

DropoutLayer::DropoutLayer(std::string name, double rate, std::uint64_t seed)
    : name_(std::move(name)), rate_(rate), rng_(seed) {
  if (rate < 0.0 || rate >= 1.0)
    throw DataError(name_ + ": dropout rate must be in [0, 1)");
}

Mat DropoutLayer::forward(const Mat& x, int, int, bool train) {
  active_ = train && rate_ > 0.0;
  if (!active_) return x;
  // Inverted dropout: survivors are scaled so inference is the identity.
  const double scale = 1.0 / (1.0 - rate_);
  mask_.resize(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j)
      mask_(i, j) = rng_.uniform() < rate_ ? 0.0 : scale;
  return x.cwiseProduct(mask_);
}

Mat DropoutLayer::backward(const Mat& dy) {
  return active_ ? dy.cwiseProduct(mask_) : dy;
}

DenseLayer::DenseLayer(ParamStore& store, std::string name, int in_dim,
                       int out_dim, Activation act)
    : name_(std::move(name)), act_(act) {
  kernel_ = &store.create(name_ + "/kernel", in_dim, out_dim);
  bias_ = &store.create(name_ + "/bias", 1, out_dim);
}

Mat DenseLayer::forward(const Mat& x, int, int, bool) {
  if (x.cols() != kernel_->value.rows())
    throw ShapeMismatch(name_ + ": bad input width");
  x_cache_ = x;
  z_cache_ = x * kernel_->value;
  z_cache_.rowwise() += bias_->value.row(0);
  if (act_ == Activation::kLinear) return z_cache_;
  return z_cache_.unaryExpr([](double z) { return z * sigmoid(z); });
}

Mat DenseLayer::backward(const Mat& dy) {
  Mat dz = dy;
  if (act_ == Activation::kSwish) {
    dz = dy.binaryExpr(z_cache_, [](double g, double z) {
      const double s = sigmoid(z);
      return g * (s + z * s * (1.0 - s));
    });
  }
  kernel_->grad += x_cache_.transpose() * dz;
  bias_->grad += dz.colwise().sum();
  return dz * kernel_->value.transpose();
}

LeakyReluLayer::LeakyReluLayer(std::string name, double slope)
    : name_(std::move(name)), slope_(slope) {}

Mat LeakyReluLayer::forward(const Mat& x, int, int, bool) {
  x_cache_ = x;
  return x.unaryExpr(
      [this](double v) { return v >= 0.0 ? v : slope_ * v; });
}

Mat LeakyReluLayer::backward(const Mat& dy) {
  return dy.binaryExpr(x_cache_, [this](double g, double v) {
    return v >= 0.0 ? g : slope_ * g;
  });
}

CrfLayer::CrfLayer(ParamStore& store, std::string name, int n_classes)
    : name_(std::move(name)) {
  transitions_ = &store.create(name_ + "/transitions", n_classes, n_classes);
}

Mat CrfLayer::forward(const Mat& x, int, int, bool) { return x; }

Mat CrfLayer::backward(const Mat& dy) { return dy; }

}  // namespace ser::model
