#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ser/model/network.hpp"

namespace ser::model {

// Versioned binary snapshot: magic "DCRF", a config block, and named
// float32 tensors. Auxiliary tensors (standardizer, PCA, ...) use an
// "aux/" name prefix and are ignored by restore().
struct CheckpointData {
  ModelConfig config;
  std::vector<std::string> class_names;
  std::vector<std::pair<std::string, Mat>> tensors;

  const Mat* find(const std::string& name) const;
};

void save_checkpoint(const CheckpointData& data, const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

// Captures every network parameter (values only; float32 precision applies
// at save time).
CheckpointData snapshot(Network& net,
                        const std::vector<std::string>& class_names);

// Copies checkpoint tensors back into a network built from the same config.
void restore(Network& net, const CheckpointData& data);

}  // namespace ser::model
