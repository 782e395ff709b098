#include "ser/model/params.hpp"

#include <Eigen/QR>
#include <cmath>

#include "ser/errors.hpp"
#include "ser/rng.hpp"

namespace ser::model {

Param& ParamStore::create(const std::string& name, Eigen::Index rows,
                          Eigen::Index cols, bool trainable) {
  if (find(name) != nullptr)
    throw DataError("duplicate parameter name: " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Mat::Zero(rows, cols);
  p->grad = Mat::Zero(rows, cols);
  p->trainable = trainable;
  params_.push_back(std::move(p));
  return *params_.back();
}

Param* ParamStore::find(const std::string& name) {
  for (auto& p : params_)
    if (p->name == name) return p.get();
  return nullptr;
}

void ParamStore::zero_grads() {
  for (auto& p : params_) p->grad.setZero();
}

long ParamStore::total_count() const {
  long n = 0;
  for (const auto& p : params_) n += static_cast<long>(p->count());
  return n;
}

long ParamStore::trainable_count() const {
  long n = 0;
  for (const auto& p : params_)
    if (p->trainable) n += static_cast<long>(p->count());
  return n;
}

void glorot_uniform(Mat& w, std::uint64_t seed) {
  Rng rng(seed);
  const double limit =
      std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  for (Eigen::Index i = 0; i < w.rows(); ++i)
    for (Eigen::Index j = 0; j < w.cols(); ++j)
      w(i, j) = rng.uniform(-limit, limit);
}

void orthogonal(Mat& w, std::uint64_t seed) {
  Rng rng(seed);
  const Eigen::Index rows = w.rows(), cols = w.cols();
  const Eigen::Index big = std::max(rows, cols), small = std::min(rows, cols);

  Mat a(big, small);
  for (Eigen::Index i = 0; i < big; ++i)
    for (Eigen::Index j = 0; j < small; ++j) a(i, j) = rng.normal();

  Eigen::HouseholderQR<Mat> qr(a);
  Mat q = qr.householderQ() * Mat::Identity(big, small);
  const Mat r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < small; ++j)
    if (r(j, j) < 0) q.col(j) *= -1.0;

  w = rows >= cols ? q : Mat(q.transpose());
}

}  // namespace ser::model
