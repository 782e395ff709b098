#include "ser/model/adam.hpp"

#include <cmath>

#include "ser/errors.hpp"

namespace ser::model {

Adam::Adam(const ParamStore& store, const AdamConfig& cfg) : cfg_(cfg) {
  for (const auto& p : store.all()) {
    m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
  }
}

void Adam::step(ParamStore& store) {
  if (store.all().size() != m_.size())
    throw ShapeMismatch("adam: parameter list changed");
  ++step_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));

  for (std::size_t i = 0; i < m_.size(); ++i) {
    Param& p = *store.all()[i];
    if (!p.trainable) continue;
    if (p.grad.rows() != m_[i].rows() || p.grad.cols() != m_[i].cols())
      throw ShapeMismatch("adam: gradient shape mismatch for " + p.name);

    m_[i] = cfg_.beta1 * m_[i] + (1.0 - cfg_.beta1) * p.grad;
    v_[i] = cfg_.beta2 * v_[i] +
            (1.0 - cfg_.beta2) * p.grad.cwiseProduct(p.grad);
    const Mat m_hat = m_[i] / bc1;
    const Mat v_hat = v_[i] / bc2;
    p.value -=
        cfg_.lr * (m_hat.array() / (v_hat.array().sqrt() + cfg_.eps)).matrix();
  }
}

}  // namespace ser::model
