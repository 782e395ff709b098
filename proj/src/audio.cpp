#include "ser/audio.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "ser/errors.hpp"

namespace ser::audio {

namespace {

struct ByteReader {
  const std::uint8_t* data;
  std::size_t size;
  std::size_t pos = 0;

  bool can_read(std::size_t n) const { return pos + n <= size; }

  std::uint32_t u32() {
    if (!can_read(4)) throw MalformedHeader("truncated WAV header");
    std::uint32_t v = static_cast<std::uint32_t>(data[pos]) |
                      static_cast<std::uint32_t>(data[pos + 1]) << 8 |
                      static_cast<std::uint32_t>(data[pos + 2]) << 16 |
                      static_cast<std::uint32_t>(data[pos + 3]) << 24;
    pos += 4;
    return v;
  }

  std::uint16_t u16() {
    if (!can_read(2)) throw MalformedHeader("truncated WAV header");
    std::uint16_t v = static_cast<std::uint16_t>(
        data[pos] | static_cast<std::uint16_t>(data[pos + 1]) << 8);
    pos += 2;
    return v;
  }

  void tag(char out[4]) {
    if (!can_read(4)) throw MalformedHeader("truncated WAV header");
    std::memcpy(out, data + pos, 4);
    pos += 4;
  }
};

double i0(double x) {
  // modified Bessel function of the first kind, order zero (power series)
  double sum = 1.0, term = 1.0;
  const double half_x2 = 0.25 * x * x;
  for (int k = 1; k < 64; ++k) {
    term *= half_x2 / (static_cast<double>(k) * k);
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

double sinc(double x) {
  if (std::abs(x) < 1e-12) return 1.0;
  const double px = M_PI * x;
  return std::sin(px) / px;
}

}  // namespace

AudioClip decode_wav(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open WAV file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  ByteReader r{bytes.data(), bytes.size()};

  char id[4];
  r.tag(id);
  if (std::memcmp(id, "RIFF", 4) != 0)
    throw MalformedHeader(path + ": missing RIFF tag");
  r.u32();  // declared file size, not trusted
  r.tag(id);
  if (std::memcmp(id, "WAVE", 4) != 0)
    throw MalformedHeader(path + ": missing WAVE tag");

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  bool have_fmt = false;
  const std::uint8_t* payload = nullptr;
  std::size_t payload_size = 0;

  while (r.can_read(8)) {
    r.tag(id);
    std::uint32_t chunk_size = r.u32();
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw MalformedHeader(path + ": short fmt chunk");
      std::size_t chunk_start = r.pos;
      format = r.u16();
      channels = r.u16();
      rate = r.u32();
      r.u32();  // byte rate
      r.u16();  // block align
      bits = r.u16();
      if (format == 0xFFFE) {
        // WAVE_FORMAT_EXTENSIBLE: the real format lives in the GUID
        if (chunk_size < 40)
          throw MalformedHeader(path + ": short extensible fmt chunk");
        r.u16();  // extension size
        r.u16();  // valid bits
        r.u32();  // channel mask
        format = r.u16();
      }
      r.pos = chunk_start + chunk_size;
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!r.can_read(chunk_size))
        throw MalformedHeader(path + ": data chunk exceeds file size");
      payload = bytes.data() + r.pos;
      payload_size = chunk_size;
      r.pos += chunk_size;
    } else {
      if (!r.can_read(chunk_size))
        throw MalformedHeader(path + ": chunk exceeds file size");
      r.pos += chunk_size + (chunk_size & 1);
    }
  }

  if (!have_fmt) throw MalformedHeader(path + ": no fmt chunk");
  if (payload == nullptr) throw MalformedHeader(path + ": no data chunk");
  if (channels < 1 || channels > 2)
    throw UnsupportedEncoding(path + ": only mono/stereo supported");
  if (rate == 0) throw MalformedHeader(path + ": zero sample rate");
  if (format != 1 && format != 3)
    throw UnsupportedEncoding(path + ": compressed WAV not supported");
  if (format == 1 && bits != 8 && bits != 16 && bits != 24 && bits != 32)
    throw UnsupportedEncoding(path + ": unsupported PCM depth");
  if (format == 3 && bits != 32)
    throw UnsupportedEncoding(path + ": only 32-bit float supported");

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t n_frames = payload_size / frame_bytes;

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.source_id = path;
  clip.samples.resize(n_frames);

  for (std::size_t i = 0; i < n_frames; ++i) {
    double acc = 0.0;
    for (int c = 0; c < channels; ++c) {
      const std::uint8_t* p = payload + i * frame_bytes + c * bytes_per_sample;
      double v = 0.0;
      if (format == 3) {
        float f;
        std::memcpy(&f, p, 4);
        v = f;
      } else if (bits == 8) {
        // 8-bit WAV is unsigned with midpoint 128
        v = (static_cast<int>(p[0]) - 128) / 128.0;
      } else if (bits == 16) {
        std::int16_t s = static_cast<std::int16_t>(p[0] | (p[1] << 8));
        v = s / 32768.0;
      } else if (bits == 24) {
        std::int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;
        v = s / 8388608.0;
      } else {  // 32-bit int
        std::int32_t s;
        std::memcpy(&s, p, 4);
        v = s / 2147483648.0;
      }
      acc += v;
    }
    clip.samples[i] = acc / channels;
  }
  return clip;
}

void write_wav16(const AudioClip& clip, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write WAV file: " + path);

  const std::uint32_t n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_size = n * 2;
  const std::uint32_t rate = static_cast<std::uint32_t>(clip.sample_rate);

  auto put_u32 = [&out](std::uint32_t v) {
    char b[4] = {static_cast<char>(v), static_cast<char>(v >> 8),
                 static_cast<char>(v >> 16), static_cast<char>(v >> 24)};
    out.write(b, 4);
  };
  auto put_u16 = [&out](std::uint16_t v) {
    char b[2] = {static_cast<char>(v), static_cast<char>(v >> 8)};
    out.write(b, 2);
  };

  out.write("RIFF", 4);
  put_u32(36 + data_size);
  out.write("WAVE", 4);
  out.write("fmt ", 4);
  put_u32(16);
  put_u16(1);  // PCM
  put_u16(1);  // mono
  put_u32(rate);
  put_u32(rate * 2);
  put_u16(2);
  put_u16(16);
  out.write("data", 4);
  put_u32(data_size);
  for (std::uint32_t i = 0; i < n; ++i) {
    double v = std::clamp(clip.samples[i], -1.0, 1.0);
    auto s = static_cast<std::int16_t>(std::lrint(v * 32767.0));
    put_u16(static_cast<std::uint16_t>(s));
  }
  if (!out) throw IoError("failed writing WAV file: " + path);
}

std::vector<double> resample_signal(const std::vector<double>& samples,
                                    double ratio, const ResampleConfig& cfg) {
  // When downsampling, the sinc is stretched so its cutoff sits at the
  // target Nyquist.
  const double cutoff = std::min(1.0, ratio);
  const int zc = cfg.zero_crossings;

  // Tabulate one half of the symmetric kernel at fine resolution and
  // interpolate linearly between entries.
  const int res = cfg.table_resolution;
  const int table_len = zc * res + 1;
  std::vector<double> table(table_len);
  const double inv_i0_beta = 1.0 / i0(cfg.kaiser_beta);
  for (int i = 0; i < table_len; ++i) {
    // x is the cutoff-scaled position, i.e. cutoff * (input-sample offset)
    const double x = static_cast<double>(i) / res;
    const double frac = x / zc;  // in [0, 1]
    const double win =
        i0(cfg.kaiser_beta * std::sqrt(std::max(0.0, 1.0 - frac * frac))) *
        inv_i0_beta;
    table[i] = cutoff * sinc(x) * win;
  }
  auto kernel = [&](double x) -> double {
    const double ax = std::abs(x) * cutoff;  // position in cutoff-scaled units
    const double idx = ax * res;
    const int i0_ = static_cast<int>(idx);
    if (i0_ >= table_len - 1) return 0.0;
    const double f = idx - i0_;
    return table[i0_] * (1.0 - f) + table[i0_ + 1] * f;
  };

  const std::size_t n_in = samples.size();
  const std::size_t n_out = static_cast<std::size_t>(
      std::llround(static_cast<double>(n_in) * ratio));
  const double support = zc / cutoff;  // kernel half-width in input samples

  std::vector<double> out(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double t = static_cast<double>(i) / ratio;
    const auto lo =
        static_cast<std::int64_t>(std::ceil(t - support));
    const auto hi = static_cast<std::int64_t>(std::floor(t + support));
    double acc = 0.0, wsum = 0.0;
    for (std::int64_t j = lo; j <= hi; ++j) {
      const double w = kernel(static_cast<double>(j) - t);
      wsum += w;
      if (j >= 0 && j < static_cast<std::int64_t>(n_in))
        acc += w * samples[j];
    }
    // Normalizing by the full kernel sum keeps DC gain at exactly 1.
    out[i] = wsum != 0.0 ? acc / wsum : 0.0;
  }
  return out;
}

AudioClip resample(const AudioClip& clip, int target_rate,
                   const ResampleConfig& cfg) {
  if (target_rate <= 0) throw DataError("resample: target rate must be > 0");
  if (clip.sample_rate == target_rate) return clip;

  AudioClip out;
  out.sample_rate = target_rate;
  out.source_id = clip.source_id;
  out.samples = resample_signal(
      clip.samples,
      static_cast<double>(target_rate) / static_cast<double>(clip.sample_rate),
      cfg);
  return out;
}

std::vector<double> frame_rms(const std::vector<double>& samples, int frame,
                              int hop) {
  const std::size_t n = samples.size();
  std::vector<double> rms;
  if (n == 0) return rms;
  if (n < static_cast<std::size_t>(frame)) {
    double acc = 0.0;
    for (double s : samples) acc += s * s;
    rms.push_back(std::sqrt(acc / static_cast<double>(n)));
    return rms;
  }
  for (std::size_t start = 0; start + frame <= n; start += hop) {
    double acc = 0.0;
    for (int k = 0; k < frame; ++k) acc += samples[start + k] * samples[start + k];
    rms.push_back(std::sqrt(acc / frame));
  }
  return rms;
}

AudioClip trim_silence(const AudioClip& clip, const TrimConfig& cfg) {
  const std::size_t n = clip.samples.size();
  if (n == 0) throw DataError("trim_silence: empty clip");

  const auto rms = frame_rms(clip.samples, cfg.frame, cfg.hop);
  const double peak = *std::max_element(rms.begin(), rms.end());
  const double threshold = peak * std::pow(10.0, -cfg.threshold_db / 20.0);
  const auto min_silence = static_cast<std::size_t>(
      cfg.min_silence_ms * 1e-3 * clip.sample_rate);

  std::size_t first_loud = rms.size(), last_loud = rms.size();
  for (std::size_t i = 0; i < rms.size(); ++i) {
    if (rms[i] > threshold) {
      if (first_loud == rms.size()) first_loud = i;
      last_loud = i;
    }
  }

  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.source_id = clip.source_id;

  if (first_loud == rms.size()) {
    // All frames below threshold (e.g. digital silence): keep the leading
    // keep_fraction so corpus processing never aborts.
    auto keep = static_cast<std::size_t>(
        std::ceil(cfg.keep_fraction * static_cast<double>(n)));
    keep = std::max<std::size_t>(1, keep);
    out.samples.assign(clip.samples.begin(), clip.samples.begin() + keep);
    return out;
  }

  // Sample extents of the loud region: frame i covers [i*hop, i*hop+frame).
  const std::size_t loud_begin = first_loud * cfg.hop;
  const std::size_t loud_end =
      std::min(n, last_loud * cfg.hop + static_cast<std::size_t>(cfg.frame));

  std::size_t begin = 0;
  if (loud_begin > min_silence) {
    const auto keep = static_cast<std::size_t>(
        std::llround(cfg.keep_fraction * static_cast<double>(loud_begin)));
    begin = loud_begin - keep;  // retained part is adjacent to the speech
  }
  std::size_t end = n;
  const std::size_t trailing = n - loud_end;
  if (trailing > min_silence) {
    const auto keep = static_cast<std::size_t>(
        std::llround(cfg.keep_fraction * static_cast<double>(trailing)));
    end = loud_end + keep;
  }

  out.samples.assign(clip.samples.begin() + begin, clip.samples.begin() + end);
  return out;
}

}  // namespace ser::audio
