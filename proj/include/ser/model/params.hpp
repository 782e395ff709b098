#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace ser::model {

using Mat = Eigen::MatrixXd;

// One learnable (or tracked) tensor. Vectors are stored as 1 x n.
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  bool trainable = true;
  bool l2_penalized = false;  // LSTM input kernels only

  Eigen::Index count() const { return value.size(); }
};

// Owns every tensor of a network in creation order, which fixes the
// checkpoint layout and the optimizer slot order.
class ParamStore {
 public:
  Param& create(const std::string& name, Eigen::Index rows, Eigen::Index cols,
                bool trainable = true);
  Param* find(const std::string& name);
  const std::vector<std::unique_ptr<Param>>& all() const { return params_; }

  void zero_grads();
  long total_count() const;
  long trainable_count() const;

 private:
  std::vector<std::unique_ptr<Param>> params_;
};

// Initializers. All draws come from the local Rng so results are
// reproducible across platforms.
void glorot_uniform(Mat& w, std::uint64_t seed);
void orthogonal(Mat& w, std::uint64_t seed);

}  // namespace ser::model
