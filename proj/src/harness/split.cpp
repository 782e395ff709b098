#include "ser/split.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "ser/errors.hpp"
#include "ser/rng.hpp"

namespace ser::harness {

namespace {

std::map<int, std::vector<std::size_t>> group_by_label(
    const std::vector<int>& labels) {
  std::map<int, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < labels.size(); ++i)
    groups[labels[i]].push_back(i);
  return groups;
}

}  // namespace

IndexSplit split_indices(const std::vector<int>& labels,
                         double train_fraction, std::uint64_t seed,
                         bool stratified) {
  if (train_fraction <= 0.0 || train_fraction >= 1.0)
    throw DataError("split: train fraction must be in (0, 1)");
  IndexSplit out;

  if (!stratified) {
    std::vector<std::size_t> idx(labels.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    Rng rng(derive_seed(seed, "split"));
    rng.shuffle(idx);
    const auto n_train = static_cast<std::size_t>(
        std::llround(train_fraction * static_cast<double>(idx.size())));
    out.train.assign(idx.begin(), idx.begin() + n_train);
    out.test.assign(idx.begin() + n_train, idx.end());
  } else {
    for (auto& [label, idx] : group_by_label(labels)) {
      if (idx.size() < 2)
        throw ClassTooSmall("split: class " + std::to_string(label) +
                            " has fewer than 2 entries");
      Rng rng(derive_seed(seed, "split/" + std::to_string(label)));
      rng.shuffle(idx);
      const auto n_train = static_cast<std::size_t>(
          std::llround(train_fraction * static_cast<double>(idx.size())));
      for (std::size_t i = 0; i < idx.size(); ++i)
        (i < n_train ? out.train : out.test).push_back(idx[i]);
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.test.begin(), out.test.end());
  }
  return out;
}

std::vector<IndexSplit> kfold_indices(const std::vector<int>& labels, int k,
                                      std::uint64_t seed) {
  if (k < 2) throw DataError("kfold: need k >= 2");
  if (labels.size() < static_cast<std::size_t>(k))
    throw TooFewEntries("kfold: fewer entries than folds");

  std::vector<std::vector<std::size_t>> validation(k);
  for (auto& [label, idx] : group_by_label(labels)) {
    Rng rng(derive_seed(seed, "fold/" + std::to_string(label)));
    rng.shuffle(idx);
    for (std::size_t i = 0; i < idx.size(); ++i)
      validation[i % k].push_back(idx[i]);
  }

  std::vector<IndexSplit> out(k);
  for (int f = 0; f < k; ++f) {
    std::sort(validation[f].begin(), validation[f].end());
    out[f].test = validation[f];
    for (int g = 0; g < k; ++g)
      if (g != f)
        out[f].train.insert(out[f].train.end(), validation[g].begin(),
                            validation[g].end());
    std::sort(out[f].train.begin(), out[f].train.end());
  }
  return out;
}

namespace {

std::vector<int> manifest_labels(const DatasetManifest& m) {
  std::vector<int> labels;
  labels.reserve(m.entries.size());
  for (const auto& e : m.entries) labels.push_back(static_cast<int>(e.label));
  return labels;
}

DatasetManifest take(const DatasetManifest& m,
                     const std::vector<std::size_t>& idx) {
  DatasetManifest out;
  out.entries.reserve(idx.size());
  for (std::size_t i : idx) out.entries.push_back(m.entries[i]);
  return out;
}

}  // namespace

ManifestSplit split(const DatasetManifest& manifest, double train_fraction,
                    std::uint64_t seed, bool stratified) {
  const auto idx =
      split_indices(manifest_labels(manifest), train_fraction, seed, stratified);
  return ManifestSplit{take(manifest, idx.train), take(manifest, idx.test)};
}

std::vector<ManifestSplit> kfold(const DatasetManifest& manifest, int k,
                                 std::uint64_t seed) {
  const auto folds = kfold_indices(manifest_labels(manifest), k, seed);
  std::vector<ManifestSplit> out;
  out.reserve(folds.size());
  for (const auto& f : folds)
    out.push_back(ManifestSplit{take(manifest, f.train), take(manifest, f.test)});
  return out;
}

}  // namespace ser::harness
