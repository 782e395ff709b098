#include "ser/model/network.hpp"

#include <cmath>

#include "ser/errors.hpp"
#include "ser/model/crf.hpp"
#include "ser/rng.hpp"

namespace ser::model {

std::string loss_mode_name(LossMode mode) {
  return mode == LossMode::kSoftmaxCe ? "softmax_ce" : "crf_nll";
}

LossMode loss_mode_from_name(const std::string& name) {
  if (name == "softmax_ce") return LossMode::kSoftmaxCe;
  if (name == "crf_nll") return LossMode::kCrfNll;
  throw DataError("unknown loss mode: " + name);
}

void ModelConfig::validate() const {
  if (input_dim < 1 || seq_len < 1 || lstm_units < 1 || lstm_layers < 1 ||
      dense_units < 1 || n_classes < 2)
    throw DataError("model config: all dimensions must be >= 1");
  if (dropout < 0.0 || dropout >= 1.0)
    throw DataError("model config: dropout must be in [0, 1)");
}

ParamCount param_count(const ModelConfig& cfg) {
  ParamCount out;
  auto add = [&out](const std::string& name, long total, long trainable) {
    out.layers.push_back({name, total, trainable});
    out.total += total;
    out.trainable += trainable;
  };

  const long u = cfg.lstm_units;
  const long width = 2 * u;
  for (int i = 0; i < cfg.lstm_layers; ++i) {
    const long in = i == 0 ? cfg.input_dim : width;
    const long per_direction = 4 * u * (in + u + 1);
    const std::string suffix = i == 0 ? "" : "_" + std::to_string(i);
    add("bidirectional" + suffix, 2 * per_direction, 2 * per_direction);
    // gamma, beta trainable; running mean/var tracked only
    add("batch_normalization" + suffix, 4 * width, 2 * width);
    add("dropout" + suffix, 0, 0);
  }
  add("dense", width * cfg.dense_units + cfg.dense_units,
      width * cfg.dense_units + cfg.dense_units);
  add("dropout_" + std::to_string(cfg.lstm_layers), 0, 0);
  add("dense_1",
      static_cast<long>(cfg.dense_units) * cfg.dense_units + cfg.dense_units,
      static_cast<long>(cfg.dense_units) * cfg.dense_units + cfg.dense_units);
  add("dropout_" + std::to_string(cfg.lstm_layers + 1), 0, 0);
  add("leaky_re_lu", 0, 0);
  add("crf_layer", static_cast<long>(cfg.n_classes) * cfg.n_classes,
      static_cast<long>(cfg.n_classes) * cfg.n_classes);
  add("time_distributed",
      static_cast<long>(cfg.dense_units) * cfg.n_classes + cfg.n_classes,
      static_cast<long>(cfg.dense_units) * cfg.n_classes + cfg.n_classes);

  out.non_trainable = out.total - out.trainable;
  return out;
}

Mat softmax_rows(const Mat& logits) {
  Mat out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double mx = logits.row(i).maxCoeff();
    Eigen::RowVectorXd e = (logits.row(i).array() - mx).exp();
    out.row(i) = e / e.sum();
  }
  return out;
}

double softmax_cross_entropy(const Mat& logits,
                             const std::vector<int>& targets, Mat* d_logits) {
  if (targets.size() != static_cast<std::size_t>(logits.rows()))
    throw ShapeMismatch("softmax_cross_entropy: target count mismatch");
  const Mat probs = softmax_rows(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.rows());
  double loss = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    loss -= std::log(std::max(probs(i, targets[i]), 1e-300));
  if (d_logits != nullptr) {
    *d_logits = probs * inv_n;
    for (Eigen::Index i = 0; i < logits.rows(); ++i)
      (*d_logits)(i, targets[i]) -= inv_n;
  }
  return loss * inv_n;
}

Network::Network(const ModelConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
  cfg_.validate();

  int in = cfg_.input_dim;
  for (int i = 0; i < cfg_.lstm_layers; ++i) {
    const std::string suffix = i == 0 ? "" : "_" + std::to_string(i);
    layers_.push_back(std::make_unique<BiLstmLayer>(
        store_, "bidirectional" + suffix, in, cfg_.lstm_units));
    in = 2 * cfg_.lstm_units;
    layers_.push_back(std::make_unique<BatchNormLayer>(
        store_, "batch_normalization" + suffix, in));
    layers_.push_back(std::make_unique<DropoutLayer>(
        "dropout" + suffix, cfg_.dropout, derive_seed(seed, "dropout" + suffix)));
  }
  layers_.push_back(std::make_unique<DenseLayer>(store_, "dense", in,
                                                 cfg_.dense_units,
                                                 Activation::kSwish));
  layers_.push_back(std::make_unique<DropoutLayer>(
      "dropout_" + std::to_string(cfg_.lstm_layers), cfg_.dropout,
      derive_seed(seed, "dropout_d0")));
  layers_.push_back(std::make_unique<DenseLayer>(
      store_, "dense_1", cfg_.dense_units, cfg_.dense_units,
      Activation::kLinear));
  layers_.push_back(std::make_unique<DropoutLayer>(
      "dropout_" + std::to_string(cfg_.lstm_layers + 1), cfg_.dropout,
      derive_seed(seed, "dropout_d1")));
  layers_.push_back(
      std::make_unique<LeakyReluLayer>("leaky_re_lu", cfg_.leaky_slope));
  auto crf = std::make_unique<CrfLayer>(store_, "crf_layer", cfg_.n_classes);
  crf_ = crf.get();
  layers_.push_back(std::move(crf));
  layers_.push_back(std::make_unique<DenseLayer>(
      store_, "time_distributed", cfg_.dense_units, cfg_.n_classes,
      Activation::kLinear));

  // Glorot kernels, orthogonal recurrences, zero biases with the LSTM
  // forget gate opened at 1.
  for (const auto& p : store_.all()) {
    const std::string& name = p->name;
    if (name.ends_with("/kernel")) {
      glorot_uniform(p->value, derive_seed(seed, name));
    } else if (name.ends_with("/recurrent")) {
      orthogonal(p->value, derive_seed(seed, name));
    } else if (name.ends_with("/bias") &&
               name.find("bidirectional") != std::string::npos) {
      p->value.row(0).segment(cfg_.lstm_units, cfg_.lstm_units).setOnes();
    }
  }
}

const Mat& Network::transitions() const { return crf_->transitions().value; }
Mat& Network::transitions() { return crf_->transitions().value; }

Mat Network::run_layers(const Mat& x, int batch, bool train) {
  if (x.cols() != cfg_.input_dim ||
      x.rows() != static_cast<Eigen::Index>(batch) * cfg_.seq_len)
    throw ShapeMismatch("network: input must be (batch * seq_len) x input_dim");
  Mat h = x;
  for (auto& layer : layers_) h = layer->forward(h, batch, cfg_.seq_len, train);
  return h;  // logits
}

Mat Network::forward(const Mat& x, int batch, bool train) {
  return softmax_rows(run_layers(x, batch, train));
}

double Network::data_loss(const Mat& logits, const std::vector<int>& targets,
                          int batch, Mat* d_logits, Mat* d_transitions) {
  if (cfg_.loss_mode == LossMode::kSoftmaxCe)
    return softmax_cross_entropy(logits, targets, d_logits);

  // CRF NLL per sequence, averaged over the batch.
  const int t_len = cfg_.seq_len;
  const double inv_b = 1.0 / batch;
  double total = 0.0;
  Mat d_local = Mat::Zero(t_len, cfg_.n_classes);
  for (int b = 0; b < batch; ++b) {
    const Mat unaries = logits.middleRows(b * t_len, t_len);
    std::vector<int> labels(targets.begin() + b * t_len,
                            targets.begin() + (b + 1) * t_len);
    if (d_logits == nullptr) {
      total += crf_nll(unaries, transitions(), labels);
    } else {
      d_local.setZero();
      total += crf_nll_grad(unaries, transitions(), labels, &d_local,
                            d_transitions);
      d_logits->middleRows(b * t_len, t_len) = d_local * inv_b;
    }
  }
  if (d_transitions != nullptr) *d_transitions *= inv_b;
  return total * inv_b;
}

double Network::l2_penalty(bool accumulate_grads) {
  if (cfg_.l2_coeff == 0.0) return 0.0;
  double penalty = 0.0;
  for (const auto& p : store_.all()) {
    if (!p->l2_penalized) continue;
    penalty += cfg_.l2_coeff * p->value.squaredNorm();
    if (accumulate_grads) p->grad += 2.0 * cfg_.l2_coeff * p->value;
  }
  return penalty;
}

double Network::loss_and_backward(const Mat& x, const std::vector<int>& targets,
                                  bool train) {
  if (targets.size() != static_cast<std::size_t>(x.rows()))
    throw ShapeMismatch("network: one target per (batch, step) row required");
  const int batch = static_cast<int>(x.rows()) / cfg_.seq_len;

  store_.zero_grads();
  const Mat logits = run_layers(x, batch, train);

  Mat d_logits = Mat::Zero(logits.rows(), logits.cols());
  Mat d_trans = Mat::Zero(cfg_.n_classes, cfg_.n_classes);
  double loss = data_loss(logits, targets, batch, &d_logits, &d_trans);
  if (cfg_.loss_mode == LossMode::kCrfNll)
    crf_->transitions().grad += d_trans;

  Mat grad = d_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
    grad = (*it)->backward(grad);

  loss += l2_penalty(true);
  if (!std::isfinite(loss)) throw NonFiniteLoss("loss is not finite");
  return loss;
}

double Network::loss_only(const Mat& x, const std::vector<int>& targets,
                          bool train) {
  if (targets.size() != static_cast<std::size_t>(x.rows()))
    throw ShapeMismatch("network: one target per (batch, step) row required");
  const int batch = static_cast<int>(x.rows()) / cfg_.seq_len;
  const Mat logits = run_layers(x, batch, train);
  return data_loss(logits, targets, batch, nullptr, nullptr) +
         l2_penalty(false);
}

std::vector<int> Network::predict(const Mat& x, int batch) {
  const Mat logits = run_layers(x, batch, false);
  std::vector<int> out(logits.rows());

  if (cfg_.loss_mode == LossMode::kCrfNll && cfg_.seq_len > 1) {
    for (int b = 0; b < batch; ++b) {
      const auto path = crf_viterbi(
          logits.middleRows(b * cfg_.seq_len, cfg_.seq_len), transitions());
      for (int t = 0; t < cfg_.seq_len; ++t) out[b * cfg_.seq_len + t] = path[t];
    }
    return out;
  }

  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Eigen::Index arg = 0;
    logits.row(i).maxCoeff(&arg);
    out[i] = static_cast<int>(arg);
  }
  return out;
}

}  // namespace ser::model
