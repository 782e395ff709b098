#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "ser/dsp.hpp"

namespace ser::features {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Fixed slot layout of the 190-dimensional per-clip feature vector.
struct FeatureLayout {
  static constexpr int kMfccMean = 0;          // 20
  static constexpr int kMfccDeltaMean = 20;    // 20
  static constexpr int kMfccDelta2Mean = 40;   // 20
  static constexpr int kMfccStd = 60;          // 20
  static constexpr int kChromaStftMean = 80;   // 12
  static constexpr int kChromaCqtMean = 92;    // 12
  static constexpr int kChromaCensMean = 104;  // 12
  static constexpr int kLogMelMean = 116;      // 64
  static constexpr int kContrastMean = 180;    // 6
  static constexpr int kRmseStats = 186;       // 3: mean, std, max
  static constexpr int kZcrMean = 189;         // 1
  static constexpr int kDim = 190;
};

// Frame matrices reduced over time (means, plus the std/max blocks) and
// packed at the FeatureLayout offsets. The clip must already be resampled.
VectorXd extract_feature_vector(const audio::AudioClip& clip,
                                const dsp::DspConfig& cfg = {});

struct Standardizer {
  VectorXd means;
  VectorXd stds;  // zero-variance dims clamped to 1
};

Standardizer fit_standardizer(const MatrixXd& x);
MatrixXd apply_standardizer(const Standardizer& s, const MatrixXd& x);

struct PCAModel {
  MatrixXd components;         // k x d, orthonormal rows
  VectorXd explained_variance; // non-increasing
  VectorXd mean;               // d
  int k = 0;
};

struct PcaOptions {
  double variance_threshold = 0.99;
  int fixed_k = 0;  // overrides the threshold when > 0
};

// Eigendecomposition of the sample covariance of centered X. k is the
// smallest count whose cumulative explained variance reaches the threshold,
// or the provided fixed_k.
PCAModel pca_fit(const MatrixXd& x, const PcaOptions& opts = {});
MatrixXd pca_transform(const PCAModel& m, const MatrixXd& x);
MatrixXd pca_inverse_transform(const PCAModel& m, const MatrixXd& y);

// Feature store: one row per clip. Values are kept at float32 precision so
// the CSV and binary forms round-trip losslessly.
struct FeatureStore {
  struct Row {
    std::string source_id;
    std::string label;
    std::vector<float> values;
  };
  int dim = FeatureLayout::kDim;
  std::vector<Row> rows;

  MatrixXd matrix() const;  // rows x dim, as double
};

void save_store_csv(const FeatureStore& store, const std::string& path);
FeatureStore load_store_csv(const std::string& path);

// Compact binary layout: magic "SERF", version byte, row/dim counts, then
// length-prefixed id and label strings with little-endian float32 values.
void save_store_serf(const FeatureStore& store, const std::string& path);
FeatureStore load_store_serf(const std::string& path);

}  // namespace ser::features
