#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ser::audio {

// Mono sample buffer. Samples are dimensionless amplitudes in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 0;
  std::string source_id;

  std::size_t size() const { return samples.size(); }
  double duration_seconds() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate
                           : 0.0;
  }
};

struct TrimConfig {
  double threshold_db = 40.0;     // below peak frame RMS
  double min_silence_ms = 200.0;  // runs shorter than this are left alone
  double keep_fraction = 0.30;    // fraction of a long silent run retained
  int frame = 2048;
  int hop = 512;
};

struct ResampleConfig {
  int zero_crossings = 64;
  double kaiser_beta = 14.769656;  // ~96 dB stopband
  int table_resolution = 512;      // kernel samples per zero crossing
};

// Decodes a RIFF/WAVE file: PCM 8/16/24/32-bit or 32-bit float, 1-2 channels.
// Integer PCM is scaled to [-1, 1] by the type's max magnitude; stereo is
// averaged to mono. Throws MalformedHeader / UnsupportedEncoding.
AudioClip decode_wav(const std::string& path);

// Writes a clip as 16-bit PCM WAV (values clamped to [-1, 1]).
void write_wav16(const AudioClip& clip, const std::string& path);

// Band-limited polyphase resampling with a Kaiser-windowed sinc kernel.
// Returns the clip unchanged when rates already match. Output length is
// round(n * target / source).
AudioClip resample(const AudioClip& clip, int target_rate = 22050,
                   const ResampleConfig& cfg = {});

// Rate-agnostic kernel behind resample: output length round(n * ratio).
// Also used by the pitch shifter, where the ratio is irrational.
std::vector<double> resample_signal(const std::vector<double>& samples,
                                    double ratio,
                                    const ResampleConfig& cfg = {});

// Shortens leading/trailing silent runs (frame RMS more than threshold_db
// below the clip's peak frame RMS) longer than min_silence_ms down to
// keep_fraction of their length. The retained part sits adjacent to the
// speech boundary. An all-silent clip is shortened to keep_fraction of its
// full length.
AudioClip trim_silence(const AudioClip& clip, const TrimConfig& cfg = {});

// Per-frame RMS used by the silence detector; exposed for tests.
std::vector<double> frame_rms(const std::vector<double>& samples, int frame,
                              int hop);

}  // namespace ser::audio
