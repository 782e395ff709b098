#pragma once

#include <Eigen/Core>
#include <complex>
#include <vector>

#include "ser/audio.hpp"

namespace ser::dsp {

using audio::AudioClip;
using Matrix = Eigen::MatrixXd;  // frames x dims

enum class WindowKind { Hann };

struct StftConfig {
  int n_fft = 512;  // ~23.2 ms at 22050 Hz
  int hop = 220;    // ~10 ms shift
  WindowKind window = WindowKind::Hann;
};

struct DspConfig {
  StftConfig stft;  // frame config shared by the Table-2 spectral features
  int n_mfcc = 20;
  int n_mels_mfcc = 26;
  int n_mels_logmel = 64;
  int delta_width = 9;
  int energy_frame = 2048;  // RMSE/ZCR framing
  int energy_hop = 512;
  double chroma_fmin = 32.7031956626;  // C1
  int cqt_bins_per_octave = 12;
  int cqt_octaves = 7;
  int cqt_hop = 512;
  bool pseudo_cqt = false;  // pool log-spaced STFT bins instead of true CQT
  int cens_smooth = 41;
  int contrast_bands = 6;
  double contrast_fmin = 200.0;  // band edges double upward from here
  double contrast_quantile = 0.02;
  double log_floor = 1e-10;  // epsilon under every log of energy
};

struct Spectrogram {
  Matrix magnitudes;  // frames x bins, bins = n_fft/2 + 1
  int n_fft = 0;
  int hop = 0;
  int sample_rate = 0;
  WindowKind window = WindowKind::Hann;

  Eigen::Index frames() const { return magnitudes.rows(); }
  Eigen::Index bins() const { return magnitudes.cols(); }
};

struct FilterBank {
  Matrix weights;  // filters x bins
  std::vector<double> centers_hz;
};

// In-place radix-2 complex FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a, bool inverse);

// Magnitude STFT with centered frames (half-frame reflection padding) and a
// periodic Hann window. Clips shorter than one frame are zero-padded.
Spectrogram stft(const AudioClip& clip, const StftConfig& cfg = {});

// Complex STFT / inverse pair used by the phase vocoder.
Eigen::MatrixXcd stft_complex(const std::vector<double>& samples,
                              int n_fft, int hop);
std::vector<double> istft(const Eigen::MatrixXcd& frames, int n_fft, int hop,
                          std::size_t out_length);

// Perceived-frequency mapping: 2595 * log10(1 + f/700), and its inverse.
double hz_to_mel(double f);
double mel_to_hz(double mel);

// Triangular filters with centers equally spaced on the mel axis,
// area-normalized by 2 / (width in Hz).
FilterBank mel_filterbank(int n_filters, int n_fft, int sample_rate,
                          double fmin = 0.0, double fmax = -1.0);

// Orthonormal DCT-II matrix (n_out x n_in).
Matrix dct_matrix(int n_out, int n_in);

// log(mel-filterbank power + eps) -> orthonormal DCT-II -> first n_mfcc.
Matrix mfcc(const AudioClip& clip, const DspConfig& cfg = {});

// Local least-squares slope over an odd window; edges replicate boundary
// frames. order=2 applies the operator twice.
Matrix delta(const Matrix& feat, int width = 9, int order = 1);

// Twelve pitch-class projections. STFT/CQT variants are max-normalized per
// frame; CENS is quantized, smoothed, and L2-normalized. Silent frames fall
// back to uniform 1/12.
Matrix chroma_stft(const Spectrogram& spec);
Matrix chroma_cqt(const AudioClip& clip, const DspConfig& cfg = {});
Matrix chroma_cens(const AudioClip& clip, const DspConfig& cfg = {});

// log(mel power + eps) over n_mels_logmel bands.
Matrix log_mel_spectrogram(const AudioClip& clip, const DspConfig& cfg = {});

// Per-band log(peak quantile mean) - log(valley quantile mean); band edges
// start at contrast_fmin and double upward.
Matrix spectral_contrast(const Spectrogram& spec, const DspConfig& cfg = {});

// Per-frame root-mean-square amplitude.
std::vector<double> rmse_frames(const AudioClip& clip, int frame = 2048,
                                int hop = 512);

// Per-frame fraction of adjacent sample pairs changing sign.
std::vector<double> zcr_frames(const AudioClip& clip, int frame = 2048,
                               int hop = 512);

// Constant-Q magnitudes (frames x bins); exposed for the chroma tests.
Matrix cqt_magnitudes(const AudioClip& clip, const DspConfig& cfg = {});

}  // namespace ser::dsp
