#pragma once

#include <cstdint>
#include <vector>

#include "ser/manifest.hpp"

namespace ser::harness {

struct IndexSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Label-stratified 80/20-style partition over row indices; per-class
// proportions land within one entry of the global fraction. Deterministic
// per seed.
IndexSplit split_indices(const std::vector<int>& labels,
                         double train_fraction, std::uint64_t seed,
                         bool stratified = true);

// Stratified k folds; every index appears in exactly one validation fold
// and per-class validation counts differ by at most one across folds.
std::vector<IndexSplit> kfold_indices(const std::vector<int>& labels, int k,
                                      std::uint64_t seed);

struct ManifestSplit {
  DatasetManifest train;
  DatasetManifest test;
};

ManifestSplit split(const DatasetManifest& manifest,
                    double train_fraction = 0.8, std::uint64_t seed = 0,
                    bool stratified = true);

std::vector<ManifestSplit> kfold(const DatasetManifest& manifest, int k = 5,
                                 std::uint64_t seed = 0);

}  // namespace ser::harness
