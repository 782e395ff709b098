#include "ser/features.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ser/errors.hpp"

namespace ser::features {

namespace {

VectorXd column_means(const dsp::Matrix& m) {
  return m.colwise().mean().transpose();
}

VectorXd column_stds(const dsp::Matrix& m) {
  // population standard deviation per column
  const VectorXd mean = column_means(m);
  VectorXd acc = VectorXd::Zero(m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const VectorXd d = m.row(i).transpose() - mean;
    acc += d.cwiseProduct(d);
  }
  return (acc / static_cast<double>(m.rows())).cwiseSqrt();
}

void put_block(VectorXd& out, int offset, const VectorXd& v) {
  out.segment(offset, v.size()) = v;
}

}  // namespace

VectorXd extract_feature_vector(const audio::AudioClip& clip,
                                const dsp::DspConfig& cfg) {
  if (clip.samples.empty()) throw ClipTooShort("empty clip");

  using L = FeatureLayout;
  VectorXd out = VectorXd::Zero(L::kDim);

  const dsp::Matrix mfcc = dsp::mfcc(clip, cfg);
  if (mfcc.rows() == 0) throw ClipTooShort(clip.source_id);
  put_block(out, L::kMfccMean, column_means(mfcc));
  put_block(out, L::kMfccDeltaMean,
            column_means(dsp::delta(mfcc, cfg.delta_width, 1)));
  put_block(out, L::kMfccDelta2Mean,
            column_means(dsp::delta(mfcc, cfg.delta_width, 2)));
  put_block(out, L::kMfccStd, column_stds(mfcc));

  const dsp::Spectrogram spec = dsp::stft(clip, cfg.stft);
  put_block(out, L::kChromaStftMean, column_means(dsp::chroma_stft(spec)));
  put_block(out, L::kChromaCqtMean, column_means(dsp::chroma_cqt(clip, cfg)));
  put_block(out, L::kChromaCensMean,
            column_means(dsp::chroma_cens(clip, cfg)));

  put_block(out, L::kLogMelMean,
            column_means(dsp::log_mel_spectrogram(clip, cfg)));
  put_block(out, L::kContrastMean,
            column_means(dsp::spectral_contrast(spec, cfg)));

  const auto rms = dsp::rmse_frames(clip, cfg.energy_frame, cfg.energy_hop);
  double mean = 0.0;
  for (double v : rms) mean += v;
  mean /= static_cast<double>(rms.size());
  double var = 0.0, mx = 0.0;
  for (double v : rms) {
    var += (v - mean) * (v - mean);
    mx = std::max(mx, v);
  }
  var /= static_cast<double>(rms.size());
  out[L::kRmseStats] = mean;
  out[L::kRmseStats + 1] = std::sqrt(var);
  out[L::kRmseStats + 2] = mx;

  const auto zcr = dsp::zcr_frames(clip, cfg.energy_frame, cfg.energy_hop);
  double zmean = 0.0;
  for (double v : zcr) zmean += v;
  out[L::kZcrMean] = zmean / static_cast<double>(zcr.size());

  if (!out.allFinite())
    throw NonFiniteInput("non-finite feature value for " + clip.source_id);
  return out;
}

Standardizer fit_standardizer(const MatrixXd& x) {
  if (x.rows() < 2) throw DataError("fit_standardizer: need >= 2 rows");
  Standardizer s;
  s.means = x.colwise().mean().transpose();
  VectorXd acc = VectorXd::Zero(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const VectorXd d = x.row(i).transpose() - s.means;
    acc += d.cwiseProduct(d);
  }
  s.stds = (acc / static_cast<double>(x.rows())).cwiseSqrt();
  for (Eigen::Index j = 0; j < s.stds.size(); ++j)
    if (s.stds[j] <= 1e-12) s.stds[j] = 1.0;
  return s;
}

MatrixXd apply_standardizer(const Standardizer& s, const MatrixXd& x) {
  if (x.cols() != s.means.size())
    throw ShapeMismatch("apply_standardizer: dimension mismatch");
  MatrixXd out = x;
  out.rowwise() -= s.means.transpose();
  out.array().rowwise() /= s.stds.transpose().array();
  return out;
}

PCAModel pca_fit(const MatrixXd& x, const PcaOptions& opts) {
  if (!x.allFinite()) throw NonFiniteInput("pca_fit: non-finite input");
  const auto n = x.rows();
  const auto d = x.cols();
  if (n < 2) throw DataError("pca_fit: need >= 2 rows");

  PCAModel m;
  m.mean = x.colwise().mean().transpose();
  MatrixXd centered = x.rowwise() - m.mean.transpose();
  const MatrixXd cov =
      centered.transpose() * centered / static_cast<double>(n - 1);

  Eigen::SelfAdjointEigenSolver<MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success)
    throw NumericError("pca_fit: eigendecomposition failed");

  // Eigen returns ascending eigenvalues; flip to non-increasing.
  VectorXd evals = solver.eigenvalues().reverse();
  MatrixXd evecs = solver.eigenvectors().rowwise().reverse();
  evals = evals.cwiseMax(0.0);

  int k;
  if (opts.fixed_k > 0) {
    k = std::min<int>(opts.fixed_k, static_cast<int>(d));
  } else {
    const double total = evals.sum();
    k = 1;
    if (total > 0.0) {
      double cum = 0.0;
      for (k = 0; k < d; ) {
        cum += evals[k];
        ++k;
        if (cum / total >= opts.variance_threshold) break;
      }
    }
  }

  m.k = k;
  m.components = evecs.leftCols(k).transpose();  // k x d
  m.explained_variance = evals.head(k);
  return m;
}

MatrixXd pca_transform(const PCAModel& m, const MatrixXd& x) {
  if (x.cols() != m.mean.size())
    throw ShapeMismatch("pca_transform: dimension mismatch");
  return (x.rowwise() - m.mean.transpose()) * m.components.transpose();
}

MatrixXd pca_inverse_transform(const PCAModel& m, const MatrixXd& y) {
  if (y.cols() != m.k) throw ShapeMismatch("pca_inverse: dimension mismatch");
  return (y * m.components).rowwise() + m.mean.transpose();
}

MatrixXd FeatureStore::matrix() const {
  MatrixXd x(rows.size(), dim);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int j = 0; j < dim; ++j) x(static_cast<Eigen::Index>(i), j) = rows[i].values[j];
  return x;
}

void save_store_csv(const FeatureStore& store, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write feature CSV: " + path);
  out << "source_id,label";
  char name[8];
  for (int j = 0; j < store.dim; ++j) {
    std::snprintf(name, sizeof(name), "f%03d", j);
    out << ',' << name;
  }
  out << '\n';
  char buf[32];
  for (const auto& row : store.rows) {
    if (row.source_id.find(',') != std::string::npos ||
        row.label.find(',') != std::string::npos)
      throw DataError("feature CSV ids/labels may not contain commas: " +
                      row.source_id);
    out << row.source_id << ',' << row.label;
    for (float v : row.values) {
      std::snprintf(buf, sizeof(buf), "%.9g", static_cast<double>(v));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing feature CSV: " + path);
}

FeatureStore load_store_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FeatureStoreMissing("cannot open feature CSV: " + path);
  FeatureStore store;
  std::string line;
  if (!std::getline(in, line))
    throw DataError(path + ": empty feature CSV");
  store.dim = static_cast<int>(std::count(line.begin(), line.end(), ',')) - 1;
  if (store.dim < 1) throw DataError(path + ": bad feature CSV header");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    FeatureStore::Row row;
    std::size_t start = 0;
    auto next_field = [&]() {
      const auto pos = line.find(',', start);
      std::string f = line.substr(
          start, pos == std::string::npos ? std::string::npos : pos - start);
      start = pos == std::string::npos ? line.size() + 1 : pos + 1;
      return f;
    };
    row.source_id = next_field();
    row.label = next_field();
    row.values.reserve(store.dim);
    for (int j = 0; j < store.dim; ++j) {
      if (start > line.size())
        throw DataError(path + ": short feature CSV row");
      row.values.push_back(std::strtof(next_field().c_str(), nullptr));
    }
    store.rows.push_back(std::move(row));
  }
  return store;
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
  char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
               static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
  out.write(b, 4);
}

std::uint32_t read_u32(std::ifstream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  return static_cast<std::uint32_t>(b[0]) | b[1] << 8 | b[2] << 16 |
         static_cast<std::uint32_t>(b[3]) << 24;
}

void write_string(std::ofstream& out, const std::string& s) {
  if (s.size() > 0xFFFF) throw DataError("string too long for feature store");
  const auto len = static_cast<std::uint16_t>(s.size());
  char b[2] = {static_cast<char>(len), static_cast<char>(len >> 8)};
  out.write(b, 2);
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::ifstream& in) {
  unsigned char b[2];
  in.read(reinterpret_cast<char*>(b), 2);
  const std::size_t len = b[0] | b[1] << 8;
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  return s;
}

}  // namespace

void save_store_serf(const FeatureStore& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write feature store: " + path);
  out.write("SERF", 4);
  out.put(1);  // version
  write_u32(out, static_cast<std::uint32_t>(store.rows.size()));
  write_u32(out, static_cast<std::uint32_t>(store.dim));
  for (const auto& row : store.rows) {
    write_string(out, row.source_id);
    write_string(out, row.label);
    for (float v : row.values) {
      std::uint32_t bits;
      std::memcpy(&bits, &v, 4);
      write_u32(out, bits);
    }
  }
  if (!out) throw IoError("failed writing feature store: " + path);
}

FeatureStore load_store_serf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureStoreMissing("cannot open feature store: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "SERF", 4) != 0)
    throw DataError(path + ": not a SERF feature store");
  const int version = in.get();
  if (version != 1)
    throw DataError(path + ": unsupported SERF version " +
                    std::to_string(version));
  FeatureStore store;
  const std::uint32_t n = read_u32(in);
  store.dim = static_cast<int>(read_u32(in));
  store.rows.resize(n);
  for (auto& row : store.rows) {
    row.source_id = read_string(in);
    row.label = read_string(in);
    row.values.resize(store.dim);
    for (int j = 0; j < store.dim; ++j) {
      const std::uint32_t bits = read_u32(in);
      std::memcpy(&row.values[j], &bits, 4);
    }
  }
  if (!in) throw DataError(path + ": truncated SERF feature store");
  return store;
}

}  // namespace ser::features
