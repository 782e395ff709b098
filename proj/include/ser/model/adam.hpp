#pragma once

#include <vector>

#include "ser/model/params.hpp"

namespace ser::model {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Bias-corrected Adam over the trainable parameters of a store, with one
// first/second moment slot per parameter in store order.
class Adam {
 public:
  explicit Adam(const ParamStore& store, const AdamConfig& cfg = {});

  // Applies the accumulated gradients; increments the step count.
  void step(ParamStore& store);

  long step_count() const { return step_; }
  const AdamConfig& config() const { return cfg_; }

 private:
  AdamConfig cfg_;
  long step_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace ser::model
