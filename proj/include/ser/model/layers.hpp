#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ser/model/params.hpp"
#include "ser/rng.hpp"

namespace ser::model {

// Batches of B sequences of length T are stored as (B*T) x d matrices with
// row index b*T + t.

double sigmoid(double z);

struct LstmWeights {
  // Gate order i, f, g, o within the 4u-wide blocks.
  Mat kernel;     // in x 4u
  Mat recurrent;  // u x 4u
  Mat bias;       // 1 x 4u
};

// One step of the standard LSTM cell recurrence:
//   c_t = f (.) c_prev + i (.) g,  h_t = o (.) tanh(c_t)
void lstm_cell_forward(const Mat& x_t, const Mat& h_prev, const Mat& c_prev,
                       const LstmWeights& w, Mat* h_t, Mat* c_t);

class Layer {
 public:
  virtual ~Layer() = default;
  virtual const std::string& name() const = 0;
  // x is (B*T) x in_dim; result is (B*T) x out_dim. Caches whatever the
  // matching backward pass needs.
  virtual Mat forward(const Mat& x, int batch, int steps, bool train) = 0;
  // dy matches the forward output; accumulates parameter grads and returns
  // the gradient w.r.t. the forward input.
  virtual Mat backward(const Mat& dy) = 0;
};

class BiLstmLayer : public Layer {
 public:
  BiLstmLayer(ParamStore& store, std::string name, int in_dim, int units);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

  int units() const { return units_; }
  LstmWeights weights(bool backward_direction) const;

 private:
  struct Direction {
    Param* kernel;
    Param* recurrent;
    Param* bias;
    // per-timestep caches (each B x u)
    std::vector<Mat> i, f, g, o, c, tanh_c, h_prev, c_prev;
  };

  void run_direction(Direction& dir, const Mat& x, int batch, int steps,
                     bool reverse, Mat* out, int out_col) const;
  Mat backprop_direction(Direction& dir, const Mat& dh_seq, int batch,
                         int steps, bool reverse);

  std::string name_;
  int in_dim_, units_;
  Direction fwd_, bwd_;
  Mat x_cache_;
  int batch_ = 0, steps_ = 0;
};

class BatchNormLayer : public Layer {
 public:
  static constexpr double kEps = 1e-6;

  BatchNormLayer(ParamStore& store, std::string name, int dim,
                 double momentum = 0.99);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

 private:
  std::string name_;
  double momentum_;
  Param* gamma_;
  Param* beta_;
  Param* running_mean_;
  Param* running_var_;
  Mat xhat_;
  Eigen::RowVectorXd inv_std_;
  bool train_cached_ = false;
};

class DropoutLayer : public Layer {
 public:
  DropoutLayer(std::string name, double rate, std::uint64_t seed);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

 private:
  std::string name_;
  double rate_;
  Rng rng_;
  Mat mask_;
  bool active_ = false;
};

enum class Activation { kLinear, kSwish };

class DenseLayer : public Layer {
 public:
  DenseLayer(ParamStore& store, std::string name, int in_dim, int out_dim,
             Activation act);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

 private:
  std::string name_;
  Activation act_;
  Param* kernel_;
  Param* bias_;
  Mat x_cache_, z_cache_;
};

class LeakyReluLayer : public Layer {
 public:
  LeakyReluLayer(std::string name, double slope);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

 private:
  std::string name_;
  double slope_;
  Mat x_cache_;
};

// Structured-prediction parameter holder: carries the label-transition
// matrix used by the CRF loss while passing features through unchanged.
class CrfLayer : public Layer {
 public:
  CrfLayer(ParamStore& store, std::string name, int n_classes);
  const std::string& name() const override { return name_; }
  Mat forward(const Mat& x, int batch, int steps, bool train) override;
  Mat backward(const Mat& dy) override;

  Param& transitions() { return *transitions_; }

 private:
  std::string name_;
  Param* transitions_;
};

}  // namespace ser::model
