#include "ser/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ser/errors.hpp"

namespace ser::dsp {

namespace {

bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

std::vector<double> hann_periodic(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / n);
  return w;
}

// Zero-pad short signals to one frame, then reflect-pad half a frame on
// both sides so frames are centered on the original samples.
std::vector<double> pad_centered(const std::vector<double>& x, int n_fft) {
  std::vector<double> s = x;
  if (s.size() < static_cast<std::size_t>(n_fft)) s.resize(n_fft, 0.0);
  const int pad = n_fft / 2;
  const std::size_t n = s.size();
  std::vector<double> out(n + 2 * pad);
  for (int i = 0; i < pad; ++i) out[i] = s[pad - i];
  std::copy(s.begin(), s.end(), out.begin() + pad);
  for (int i = 0; i < pad; ++i) out[pad + n + i] = s[n - 2 - i];
  return out;
}

int pitch_class(double freq_hz) {
  // A440 reference; midi 60 (C4) maps to class 0
  const double midi = 69.0 + 12.0 * std::log2(freq_hz / 440.0);
  long cls = std::lround(midi) % 12;
  if (cls < 0) cls += 12;
  return static_cast<int>(cls);
}

struct CqtKernels {
  // one complex kernel per bin, centered; conjugated at application time
  std::vector<std::vector<std::complex<double>>> kernels;
  std::vector<double> freqs;
};

CqtKernels build_cqt_kernels(int sample_rate, const DspConfig& cfg) {
  const int n_bins = cfg.cqt_bins_per_octave * cfg.cqt_octaves;
  const double q =
      1.0 / (std::pow(2.0, 1.0 / cfg.cqt_bins_per_octave) - 1.0);
  CqtKernels out;
  out.kernels.resize(n_bins);
  out.freqs.resize(n_bins);
  for (int j = 0; j < n_bins; ++j) {
    const double f =
        cfg.chroma_fmin *
        std::pow(2.0, static_cast<double>(j) / cfg.cqt_bins_per_octave);
    out.freqs[j] = f;
    int len = std::max(
        4, static_cast<int>(std::lround(q * sample_rate / f)));
    std::vector<std::complex<double>> k(len);
    double wsum = 0.0;
    for (int m = 0; m < len; ++m) {
      const double w = 0.5 - 0.5 * std::cos(2.0 * M_PI * m / (len - 1));
      const double phase =
          2.0 * M_PI * f * (m - 0.5 * (len - 1)) / sample_rate;
      k[m] = w * std::complex<double>(std::cos(phase), -std::sin(phase));
      wsum += w;
    }
    for (auto& v : k) v /= wsum;
    out.kernels[j] = std::move(k);
  }
  return out;
}

// Fold a (frames x bins) CQT-style magnitude matrix into 12 pitch classes.
// Bin 0 corresponds to C when fmin is C1.
Matrix fold_octaves(const Matrix& mags, int bins_per_octave) {
  Matrix chroma = Matrix::Zero(mags.rows(), 12);
  for (Eigen::Index j = 0; j < mags.cols(); ++j) {
    const int cls = static_cast<int>(j % bins_per_octave) * 12 /
                    bins_per_octave;  // identity when bins_per_octave == 12
    chroma.col(cls) += mags.col(j);
  }
  return chroma;
}

// Per-frame max normalization with the uniform silent-frame fallback.
void normalize_chroma_frames(Matrix& chroma) {
  for (Eigen::Index i = 0; i < chroma.rows(); ++i) {
    const double mx = chroma.row(i).maxCoeff();
    if (mx > 0.0)
      chroma.row(i) /= mx;
    else
      chroma.row(i).setConstant(1.0 / 12.0);
  }
}

}  // namespace

void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (!is_pow2(n)) throw ShapeMismatch("fft size must be a power of two");

  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (inverse ? 2.0 : -2.0) * M_PI / static_cast<double>(len);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = a[i + k];
        const std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& v : a) v /= static_cast<double>(n);
}

Eigen::MatrixXcd stft_complex(const std::vector<double>& samples, int n_fft,
                              int hop) {
  if (samples.empty()) throw DataError("stft: empty input");
  const auto padded = pad_centered(samples, n_fft);
  const auto window = hann_periodic(n_fft);
  const std::size_t n_frames = 1 + (padded.size() - n_fft) / hop;
  const int n_bins = n_fft / 2 + 1;

  Eigen::MatrixXcd out(n_frames, n_bins);
  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::size_t start = i * hop;
    for (int k = 0; k < n_fft; ++k)
      buf[k] = padded[start + k] * window[k];
    fft_inplace(buf, false);
    for (int k = 0; k < n_bins; ++k) out(i, k) = buf[k];
  }
  return out;
}

std::vector<double> istft(const Eigen::MatrixXcd& frames, int n_fft, int hop,
                          std::size_t out_length) {
  const auto window = hann_periodic(n_fft);
  const auto n_frames = static_cast<std::size_t>(frames.rows());
  const std::size_t full = n_fft + (n_frames - 1) * hop;
  std::vector<double> acc(full, 0.0), wsum(full, 0.0);

  std::vector<std::complex<double>> buf(n_fft);
  for (std::size_t i = 0; i < n_frames; ++i) {
    for (int k = 0; k < n_fft; ++k) buf[k] = 0.0;
    for (int k = 0; k < n_fft / 2 + 1; ++k) buf[k] = frames(i, k);
    for (int k = 1; k < n_fft / 2; ++k) buf[n_fft - k] = std::conj(frames(i, k));
    fft_inplace(buf, true);
    const std::size_t start = i * hop;
    for (int k = 0; k < n_fft; ++k) {
      acc[start + k] += buf[k].real() * window[k];
      wsum[start + k] += window[k] * window[k];
    }
  }

  // Drop the center padding and normalize by the overlapped window energy.
  const std::size_t offset = n_fft / 2;
  std::vector<double> out(out_length, 0.0);
  for (std::size_t i = 0; i < out_length && offset + i < full; ++i) {
    const double w = wsum[offset + i];
    out[i] = w > 1e-10 ? acc[offset + i] / w : 0.0;
  }
  return out;
}

Spectrogram stft(const AudioClip& clip, const StftConfig& cfg) {
  const auto cm = stft_complex(clip.samples, cfg.n_fft, cfg.hop);
  Spectrogram spec;
  spec.magnitudes = cm.cwiseAbs();
  spec.n_fft = cfg.n_fft;
  spec.hop = cfg.hop;
  spec.sample_rate = clip.sample_rate;
  spec.window = cfg.window;
  return spec;
}

double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

FilterBank mel_filterbank(int n_filters, int n_fft, int sample_rate,
                          double fmin, double fmax) {
  if (fmax < 0.0) fmax = sample_rate / 2.0;
  if (n_filters < 1) throw DataError("mel_filterbank: need >= 1 filter");
  if (!(fmin < fmax) || fmax > sample_rate / 2.0 + 1e-9)
    throw DataError("mel_filterbank: need fmin < fmax <= sr/2");

  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = hz_to_mel(fmin);
  const double mel_hi = hz_to_mel(fmax);

  std::vector<double> edges_hz(n_filters + 2);
  for (int i = 0; i < n_filters + 2; ++i)
    edges_hz[i] =
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * i / (n_filters + 1));

  FilterBank fb;
  fb.weights = Matrix::Zero(n_filters, n_bins);
  fb.centers_hz.assign(edges_hz.begin() + 1, edges_hz.end() - 1);

  for (int m = 0; m < n_filters; ++m) {
    const double lo = edges_hz[m], mid = edges_hz[m + 1], hi = edges_hz[m + 2];
    const double norm = 2.0 / (hi - lo);
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f > lo && f < hi)
        w = f <= mid ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      fb.weights(m, k) = w * norm;
    }
  }
  return fb;
}

Matrix dct_matrix(int n_out, int n_in) {
  Matrix d(n_out, n_in);
  const double s0 = std::sqrt(1.0 / n_in);
  const double s = std::sqrt(2.0 / n_in);
  for (int k = 0; k < n_out; ++k)
    for (int n = 0; n < n_in; ++n)
      d(k, n) = (k == 0 ? s0 : s) *
                std::cos(M_PI / n_in * (n + 0.5) * k);
  return d;
}

Matrix mfcc(const AudioClip& clip, const DspConfig& cfg) {
  const Spectrogram spec = stft(clip, cfg.stft);
  const FilterBank fb =
      mel_filterbank(cfg.n_mels_mfcc, cfg.stft.n_fft, clip.sample_rate);

  const Matrix power = spec.magnitudes.array().square();
  Matrix energies = power * fb.weights.transpose();  // frames x n_mels
  Matrix log_e =
      (energies.array() + cfg.log_floor).log().matrix();
  const Matrix dct = dct_matrix(cfg.n_mfcc, cfg.n_mels_mfcc);
  return log_e * dct.transpose();  // frames x n_mfcc
}

Matrix delta(const Matrix& feat, int width, int order) {
  if (width < 3 || width % 2 == 0)
    throw DataError("delta: width must be odd and >= 3");
  if (order == 2) return delta(delta(feat, width, 1), width, 1);
  if (order != 1) throw DataError("delta: order must be 1 or 2");

  const int m = width / 2;
  double denom = 0.0;
  for (int k = 1; k <= m; ++k) denom += 2.0 * k * k;

  const Eigen::Index rows = feat.rows();
  Matrix out = Matrix::Zero(rows, feat.cols());
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (int k = 1; k <= m; ++k) {
      const Eigen::Index ahead = std::min(rows - 1, t + k);
      const Eigen::Index behind = std::max<Eigen::Index>(0, t - k);
      out.row(t) += k * (feat.row(ahead) - feat.row(behind));
    }
    out.row(t) /= denom;
  }
  return out;
}

Matrix chroma_stft(const Spectrogram& spec) {
  const Eigen::Index n_frames = spec.frames();
  Matrix chroma = Matrix::Zero(n_frames, 12);
  for (Eigen::Index k = 1; k < spec.bins(); ++k) {
    const double f =
        static_cast<double>(k) * spec.sample_rate / spec.n_fft;
    const int cls = pitch_class(f);
    chroma.col(cls) += spec.magnitudes.col(k).array().square().matrix();
  }
  normalize_chroma_frames(chroma);
  return chroma;
}

Matrix cqt_magnitudes(const AudioClip& clip, const DspConfig& cfg) {
  if (clip.samples.empty()) throw DataError("cqt: empty input");
  const int n_bins = cfg.cqt_bins_per_octave * cfg.cqt_octaves;
  const std::size_t n = clip.samples.size();
  const std::size_t n_frames = 1 + n / cfg.cqt_hop;

  if (cfg.pseudo_cqt) {
    // Pool STFT power into quarter-tone-bounded bands; cheap substitute.
    StftConfig sc = cfg.stft;
    sc.hop = cfg.cqt_hop;
    const Spectrogram spec = stft(clip, sc);
    Matrix mags = Matrix::Zero(spec.frames(), n_bins);
    for (Eigen::Index k = 1; k < spec.bins(); ++k) {
      const double f =
          static_cast<double>(k) * spec.sample_rate / spec.n_fft;
      const double bin_pos = cfg.cqt_bins_per_octave *
                             std::log2(f / cfg.chroma_fmin);
      const long j = std::lround(bin_pos);
      if (j >= 0 && j < n_bins)
        mags.col(j) += spec.magnitudes.col(k);
    }
    return mags;
  }

  const CqtKernels kernels = build_cqt_kernels(clip.sample_rate, cfg);
  Matrix mags(n_frames, n_bins);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const auto center = static_cast<std::int64_t>(i * cfg.cqt_hop);
    for (int j = 0; j < n_bins; ++j) {
      const auto& k = kernels.kernels[j];
      const auto len = static_cast<std::int64_t>(k.size());
      const std::int64_t start = center - len / 2;
      const std::int64_t lo = std::max<std::int64_t>(0, -start);
      const std::int64_t hi =
          std::min<std::int64_t>(len, static_cast<std::int64_t>(n) - start);
      std::complex<double> acc(0.0, 0.0);
      for (std::int64_t m = lo; m < hi; ++m)
        acc += clip.samples[start + m] * std::conj(k[m]);
      mags(i, j) = std::abs(acc);
    }
  }
  return mags;
}

Matrix chroma_cqt(const AudioClip& clip, const DspConfig& cfg) {
  Matrix chroma =
      fold_octaves(cqt_magnitudes(clip, cfg), cfg.cqt_bins_per_octave);
  normalize_chroma_frames(chroma);
  return chroma;
}

Matrix chroma_cens(const AudioClip& clip, const DspConfig& cfg) {
  Matrix chroma =
      fold_octaves(cqt_magnitudes(clip, cfg), cfg.cqt_bins_per_octave);

  const Eigen::Index n_frames = chroma.rows();
  std::vector<bool> silent(n_frames, false);

  // L1 normalization then amplitude quantization
  static const double kThresholds[] = {0.05, 0.1, 0.2, 0.4};
  Matrix quant = Matrix::Zero(n_frames, 12);
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const double l1 = chroma.row(i).lpNorm<1>();
    if (l1 <= 0.0) {
      silent[i] = true;
      continue;
    }
    for (int c = 0; c < 12; ++c) {
      const double v = chroma(i, c) / l1;
      double q = 0.0;
      for (int b = 0; b < 4; ++b)
        if (v > kThresholds[b]) q = b + 1.0;
      quant(i, c) = q;
    }
  }

  // Hann-weighted smoothing over cens_smooth frames, edge-truncated.
  const int half = cfg.cens_smooth / 2;
  std::vector<double> win(cfg.cens_smooth);
  for (int i = 0; i < cfg.cens_smooth; ++i)
    win[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * (i + 1) / (cfg.cens_smooth + 1));
  Matrix smooth = Matrix::Zero(n_frames, 12);
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    double wtot = 0.0;
    for (int k = -half; k <= half; ++k) {
      const Eigen::Index t = i + k;
      if (t < 0 || t >= n_frames) continue;
      const double w = win[k + half];
      smooth.row(i) += w * quant.row(t);
      wtot += w;
    }
    if (wtot > 0.0) smooth.row(i) /= wtot;
  }

  // Per-frame L2 normalization; silent frames fall back to uniform 1/12.
  for (Eigen::Index i = 0; i < n_frames; ++i) {
    const double l2 = smooth.row(i).norm();
    if (l2 > 0.0)
      smooth.row(i) /= l2;
    else
      smooth.row(i).setConstant(1.0 / 12.0);
  }
  return smooth;
}

Matrix log_mel_spectrogram(const AudioClip& clip, const DspConfig& cfg) {
  const Spectrogram spec = stft(clip, cfg.stft);
  const FilterBank fb =
      mel_filterbank(cfg.n_mels_logmel, cfg.stft.n_fft, clip.sample_rate);
  const Matrix power = spec.magnitudes.array().square();
  Matrix energies = power * fb.weights.transpose();
  return (energies.array() + cfg.log_floor).log().matrix();
}

Matrix spectral_contrast(const Spectrogram& spec, const DspConfig& cfg) {
  const int n_bands = cfg.contrast_bands;
  if (n_bands < 1) throw DataError("spectral_contrast: need >= 1 band");

  // Band edges: [0, fmin, 2*fmin, ..., sr/2]; the last band absorbs the
  // remainder of the spectrum.
  std::vector<double> edges(n_bands + 1);
  edges[0] = 0.0;
  for (int b = 1; b < n_bands; ++b)
    edges[b] = cfg.contrast_fmin * std::pow(2.0, b - 1);
  edges[n_bands] = spec.sample_rate / 2.0 + 1.0;

  // Precompute bin membership per band.
  std::vector<std::vector<int>> band_bins(n_bands);
  for (Eigen::Index k = 0; k < spec.bins(); ++k) {
    const double f =
        static_cast<double>(k) * spec.sample_rate / spec.n_fft;
    for (int b = 0; b < n_bands; ++b)
      if (f >= edges[b] && f < edges[b + 1]) {
        band_bins[b].push_back(static_cast<int>(k));
        break;
      }
  }

  const double eps = cfg.log_floor;
  Matrix out(spec.frames(), n_bands);
  std::vector<double> vals;
  for (Eigen::Index i = 0; i < spec.frames(); ++i) {
    for (int b = 0; b < n_bands; ++b) {
      const auto& bins = band_bins[b];
      if (bins.empty()) {
        out(i, b) = 0.0;
        continue;
      }
      vals.clear();
      for (int k : bins) vals.push_back(spec.magnitudes(i, k));
      std::sort(vals.begin(), vals.end());
      const auto cnt = std::max<std::size_t>(
          1, static_cast<std::size_t>(cfg.contrast_quantile * vals.size()));
      double valley = 0.0, peak = 0.0;
      for (std::size_t j = 0; j < cnt; ++j) {
        valley += vals[j];
        peak += vals[vals.size() - 1 - j];
      }
      valley /= static_cast<double>(cnt);
      peak /= static_cast<double>(cnt);
      out(i, b) = std::log(peak + eps) - std::log(valley + eps);
    }
  }
  return out;
}

std::vector<double> rmse_frames(const AudioClip& clip, int frame, int hop) {
  if (clip.samples.empty()) throw DataError("rmse_frames: empty clip");
  return audio::frame_rms(clip.samples, frame, hop);
}

std::vector<double> zcr_frames(const AudioClip& clip, int frame, int hop) {
  const auto& x = clip.samples;
  const std::size_t n = x.size();
  if (n == 0) throw DataError("zcr_frames: empty clip");

  auto rate_of = [&x](std::size_t start, std::size_t len) {
    if (len < 2) return 0.0;
    int count = 0;
    for (std::size_t t = start; t + 1 < start + len; ++t)
      if (x[t] * x[t + 1] < 0.0) ++count;
    return static_cast<double>(count) / static_cast<double>(len - 1);
  };

  std::vector<double> out;
  if (n < static_cast<std::size_t>(frame)) {
    out.push_back(rate_of(0, n));
    return out;
  }
  for (std::size_t start = 0; start + frame <= n; start += hop)
    out.push_back(rate_of(start, frame));
  return out;
}

}  // namespace ser::dsp
