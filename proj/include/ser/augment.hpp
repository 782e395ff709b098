#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ser/audio.hpp"
#include "ser/manifest.hpp"

namespace ser::augment {

using audio::AudioClip;

struct AugmentationPlan {
  std::vector<double> noise_rates{0.035, 0.025, 0.015};
  std::vector<double> pitch_steps{0.70, 0.80, 0.70};  // semitones
  std::vector<double> stretch_rates{0.8, 0.9, 0.7};
  std::uint64_t seed = 1234;

  std::size_t expansion_factor() const {
    return 1 + noise_rates.size() + pitch_steps.size() + stretch_rates.size();
  }
};

// output = input + n, n ~ iid Gaussian with sigma = rate * max|input|.
// Deterministic per (seed, clip length).
AudioClip add_gaussian_noise(const AudioClip& clip, double rate,
                             std::uint64_t seed);

// Phase-vocoder stretch (frame 2048, hop 512, Hann): output length is
// round(input length / rate); pitch is preserved.
AudioClip time_stretch(const AudioClip& clip, double rate);

// Scales every frequency by 2^(semitones/12) while keeping the duration;
// implemented as a time stretch by 2^(-semitones/12) followed by resampling
// back to the original length.
AudioClip pitch_shift(const AudioClip& clip, double semitones);

// Each entry yields itself plus one variant per plan parameter. Variant ids
// and tags record the technique, plan position, parameter, and (for noise)
// the per-entry derived seed, so expanded manifests are self-contained.
harness::DatasetManifest expand_manifest(const harness::DatasetManifest& in,
                                         const AugmentationPlan& plan);

// Applies the transform encoded in a manifest augmentation tag
// ("noise<i>@<rate>@<seed>", "pitch<i>@<semitones>", "stretch<i>@<rate>").
// An empty tag returns the clip unchanged.
AudioClip apply_augmentation(const AudioClip& clip, const std::string& tag);

}  // namespace ser::augment
