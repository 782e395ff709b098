#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ser/model/layers.hpp"

namespace ser::model {

enum class LossMode { kSoftmaxCe, kCrfNll };

std::string loss_mode_name(LossMode mode);
LossMode loss_mode_from_name(const std::string& name);

struct ModelConfig {
  int input_dim = 190;
  int seq_len = 1;
  int lstm_units = 512;
  int lstm_layers = 3;
  int dense_units = 512;
  double dropout = 0.3;
  double l2_coeff = 1e-4;
  int n_classes = 7;
  double leaky_slope = 0.01;
  LossMode loss_mode = LossMode::kSoftmaxCe;

  void validate() const;
};

struct LayerCount {
  std::string name;
  long total = 0;
  long trainable = 0;
};

struct ParamCount {
  std::vector<LayerCount> layers;
  long total = 0;
  long trainable = 0;
  long non_trainable = 0;
};

// Exact per-layer parameter counts for a config, without allocating.
ParamCount param_count(const ModelConfig& cfg);

// Row-stable softmax; each output row sums to 1.
Mat softmax_rows(const Mat& logits);

// Mean cross-entropy over rows; optionally writes d(loss)/d(logits)
// (softmax minus one-hot, averaged over rows).
double softmax_cross_entropy(const Mat& logits,
                             const std::vector<int>& targets,
                             Mat* d_logits = nullptr);

// The stacked network: lstm_layers x [BiLSTM, BatchNorm, Dropout], then
// Dense+swish, Dropout, Dense, Dropout, LeakyReLU, the CRF parameter layer,
// and a time-distributed Dense whose softmax yields class probabilities.
class Network {
 public:
  Network(const ModelConfig& cfg, std::uint64_t seed);

  const ModelConfig& config() const { return cfg_; }
  ParamStore& params() { return store_; }
  const Mat& transitions() const;
  Mat& transitions();

  // x is (B * seq_len) x input_dim with row index b*T + t. Returns class
  // probabilities of the same row layout.
  Mat forward(const Mat& x, int batch, bool train);

  // Data loss (softmax CE or CRF NLL over the final logits) plus the L2
  // penalty on LSTM input kernels. Fills every parameter gradient.
  double loss_and_backward(const Mat& x, const std::vector<int>& targets,
                           bool train);
  // Same value without touching gradients; used by finite-difference checks.
  double loss_only(const Mat& x, const std::vector<int>& targets, bool train);

  // Viterbi decoding under crf_nll, per-row argmax otherwise; one label per
  // (b, t) row.
  std::vector<int> predict(const Mat& x, int batch);

 private:
  Mat run_layers(const Mat& x, int batch, bool train);
  double data_loss(const Mat& logits, const std::vector<int>& targets,
                   int batch, Mat* d_logits, Mat* d_transitions);
  double l2_penalty(bool accumulate_grads);

  ModelConfig cfg_;
  ParamStore store_;
  std::vector<std::unique_ptr<Layer>> layers_;
  CrfLayer* crf_ = nullptr;
};

}  // namespace ser::model
