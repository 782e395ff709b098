#include "ser/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <Eigen/Core>

#include "ser/dsp.hpp"
#include "ser/errors.hpp"
#include "ser/rng.hpp"

namespace ser::augment {

namespace {

constexpr int kVocoderFft = 2048;
constexpr int kVocoderHop = 512;

double wrap_phase(double x) {
  return x - 2.0 * M_PI * std::round(x / (2.0 * M_PI));
}

std::string format_param(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

}  // namespace

AudioClip add_gaussian_noise(const AudioClip& clip, double rate,
                             std::uint64_t seed) {
  if (rate < 0.0) throw DataError("add_gaussian_noise: rate must be >= 0");
  double peak = 0.0;
  for (double s : clip.samples) peak = std::max(peak, std::abs(s));
  if (rate == 0.0 || peak == 0.0) return clip;

  const double sigma = rate * peak;
  Rng rng(seed);
  AudioClip out = clip;
  for (double& s : out.samples) s += sigma * rng.normal();
  return out;
}

AudioClip time_stretch(const AudioClip& clip, double rate) {
  if (rate <= 0.0) throw DataError("time_stretch: rate must be > 0");
  if (clip.samples.empty()) throw DataError("time_stretch: empty clip");

  const Eigen::MatrixXcd d =
      dsp::stft_complex(clip.samples, kVocoderFft, kVocoderHop);
  const Eigen::Index n_in = d.rows();
  const int n_bins = kVocoderFft / 2 + 1;

  // Expected per-hop phase advance of each bin's center frequency.
  std::vector<double> advance(n_bins);
  for (int k = 0; k < n_bins; ++k)
    advance[k] = 2.0 * M_PI * kVocoderHop * k / kVocoderFft;

  const auto n_out = static_cast<Eigen::Index>(
      std::ceil(static_cast<double>(n_in) / rate));
  Eigen::MatrixXcd stretched(n_out, n_bins);

  std::vector<double> phase(n_bins);
  for (int k = 0; k < n_bins; ++k) phase[k] = std::arg(d(0, k));

  for (Eigen::Index i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * rate;
    const auto c0 = std::min<Eigen::Index>(
        n_in - 1, static_cast<Eigen::Index>(pos));
    const Eigen::Index c1 = std::min<Eigen::Index>(n_in - 1, c0 + 1);
    const double alpha = pos - static_cast<double>(c0);

    for (int k = 0; k < n_bins; ++k) {
      const double mag =
          (1.0 - alpha) * std::abs(d(c0, k)) + alpha * std::abs(d(c1, k));
      stretched(i, k) = std::polar(mag, phase[k]);
      // Instantaneous frequency estimate: nominal advance plus the wrapped
      // deviation observed between the two analysis frames.
      const double dphi =
          wrap_phase(std::arg(d(c1, k)) - std::arg(d(c0, k)) - advance[k]);
      phase[k] += advance[k] + dphi;
    }
  }

  const auto out_len = static_cast<std::size_t>(std::llround(
      static_cast<double>(clip.samples.size()) / rate));
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_id = clip.source_id;
  out.samples = dsp::istft(stretched, kVocoderFft, kVocoderHop, out_len);
  return out;
}

AudioClip pitch_shift(const AudioClip& clip, double semitones) {
  if (!std::isfinite(semitones))
    throw DataError("pitch_shift: semitones must be finite");
  const double rate = std::pow(2.0, -semitones / 12.0);
  const AudioClip stretched = time_stretch(clip, rate);

  // Resampling the stretched signal back to the original duration scales
  // every frequency by 1/rate = 2^(semitones/12).
  const double ratio = static_cast<double>(clip.samples.size()) /
                       static_cast<double>(stretched.samples.size());
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_id = clip.source_id;
  out.samples = audio::resample_signal(stretched.samples, ratio);
  return out;
}

harness::DatasetManifest expand_manifest(const harness::DatasetManifest& in,
                                         const AugmentationPlan& plan) {
  for (double r : plan.stretch_rates)
    if (r <= 0.0) throw DataError("expand_manifest: stretch rate must be > 0");
  for (double r : plan.noise_rates)
    if (r < 0.0) throw DataError("expand_manifest: noise rate must be >= 0");

  harness::DatasetManifest out;
  out.entries.reserve(in.entries.size() * plan.expansion_factor());

  for (const auto& entry : in.entries) {
    out.entries.push_back(entry);

    auto add_variant = [&](const std::string& tag) {
      harness::ManifestEntry v = entry;
      v.augment = tag;
      v.source_id = entry.source_id + "#" + tag;
      out.entries.push_back(std::move(v));
    };

    for (std::size_t i = 0; i < plan.noise_rates.size(); ++i) {
      const std::string base =
          "noise" + std::to_string(i) + "@" + format_param(plan.noise_rates[i]);
      const std::uint64_t seed =
          derive_seed(plan.seed, entry.source_id + "#" + base);
      add_variant(base + "@" + std::to_string(seed));
    }
    for (std::size_t i = 0; i < plan.pitch_steps.size(); ++i)
      add_variant("pitch" + std::to_string(i) + "@" +
                  format_param(plan.pitch_steps[i]));
    for (std::size_t i = 0; i < plan.stretch_rates.size(); ++i)
      add_variant("stretch" + std::to_string(i) + "@" +
                  format_param(plan.stretch_rates[i]));
  }
  return out;
}

AudioClip apply_augmentation(const AudioClip& clip, const std::string& tag) {
  if (tag.empty()) return clip;

  const auto first_at = tag.find('@');
  if (first_at == std::string::npos || first_at == 0)
    throw DataError("bad augmentation tag: " + tag);
  std::string head = tag.substr(0, first_at);
  while (!head.empty() && std::isdigit(static_cast<unsigned char>(head.back())))
    head.pop_back();
  const std::string rest = tag.substr(first_at + 1);

  if (head == "noise") {
    const auto second_at = rest.find('@');
    if (second_at == std::string::npos)
      throw DataError("noise tag missing seed: " + tag);
    const double rate = std::stod(rest.substr(0, second_at));
    const std::uint64_t seed = std::stoull(rest.substr(second_at + 1));
    return add_gaussian_noise(clip, rate, seed);
  }
  if (head == "pitch") return pitch_shift(clip, std::stod(rest));
  if (head == "stretch") return time_stretch(clip, std::stod(rest));
  throw DataError("unknown augmentation tag: " + tag);
}

}  // namespace ser::augment
