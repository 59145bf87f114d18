#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <iterator>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "crea/concept.hpp"
#include "crea/error.hpp"
#include "crea/zip.hpp"

namespace crea {

/// Mono signal with samples in [-1, 1].
struct MonoAudio {
  double rate = 0.0;
  std::vector<double> samples;
};

namespace detail {

inline std::uint32_t rd16(const Bytes& b, std::size_t at) { return le16(b, at); }
inline std::uint32_t rd32(const Bytes& b, std::size_t at) { return le32(b, at); }

inline double pcm_sample(const unsigned char* p, unsigned bits, bool is_float) {
  if (is_float) {
    if (bits == 32) {
      float f;
      std::uint32_t u = static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                        static_cast<std::uint32_t>(p[2]) << 16 | static_cast<std::uint32_t>(p[3]) << 24;
      std::memcpy(&f, &u, 4);
      return static_cast<double>(f);
    }
    double d;
    std::uint64_t u = 0;
    for (int i = 7; i >= 0; --i) u = u << 8 | p[i];
    std::memcpy(&d, &u, 8);
    return d;
  }
  switch (bits) {
    case 8: return (static_cast<double>(p[0]) - 128.0) / 128.0;
    case 16: return static_cast<double>(static_cast<std::int16_t>(p[0] | p[1] << 8)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | p[1] << 8 | p[2] << 16;
      if (v & 0x800000) v -= 0x1000000;
      return static_cast<double>(v) / 8388608.0;
    }
    case 32: {
      const std::int32_t v = static_cast<std::int32_t>(static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
                                                       static_cast<std::uint32_t>(p[2]) << 16 |
                                                       static_cast<std::uint32_t>(p[3]) << 24);
      return static_cast<double>(v) / 2147483648.0;
    }
  }
  return 0.0;
}

}  // namespace detail

/// Decodes an uncompressed RIFF/WAVE file (integer PCM 8/16/24/32 bit or
/// IEEE float), averaging channels to mono.
inline MonoAudio decode_wav(const Bytes& b) {
  if (b.size() < 12 || std::memcmp(b.data(), "RIFF", 4) != 0 || std::memcmp(b.data() + 8, "WAVE", 4) != 0)
    throw FormatError("wav: not a RIFF/WAVE file");
  std::uint32_t format = 0, channels = 0, rate = 0, bits = 0;
  bool have_fmt = false;
  const unsigned char* data = nullptr;
  std::size_t data_len = 0;
  for (std::size_t p = 12; p + 8 <= b.size();) {
    const std::uint32_t len = detail::rd32(b, p + 4);
    const std::size_t body = p + 8;
    if (std::memcmp(b.data() + p, "fmt ", 4) == 0) {
      if (len < 16 || body + 16 > b.size()) throw FormatError("wav: short fmt chunk");
      format = detail::rd16(b, body);
      channels = detail::rd16(b, body + 2);
      rate = detail::rd32(b, body + 4);
      bits = detail::rd16(b, body + 14);
      if (format == 0xfffe && len >= 40 && body + 26 <= b.size()) format = detail::rd16(b, body + 24);
      have_fmt = true;
    } else if (std::memcmp(b.data() + p, "data", 4) == 0) {
      data = b.data() + body;
      data_len = std::min<std::size_t>(len, b.size() - body);
    }
    p = body + len + (len & 1u);
  }
  if (!have_fmt) throw FormatError("wav: no fmt chunk");
  if (data == nullptr) throw FormatError("wav: no data chunk");
  const bool is_float = format == 3;
  if (format != 1 && format != 3)
    throw FormatError("wav: unsupported encoding " + std::to_string(format) + " (only PCM and float are decoded)");
  if (channels == 0 || rate == 0) throw FormatError("wav: bad channel count or rate");
  if (is_float ? (bits != 32 && bits != 64) : (bits != 8 && bits != 16 && bits != 24 && bits != 32))
    throw FormatError("wav: unsupported sample width " + std::to_string(bits));
  const std::size_t frame = channels * (bits / 8);
  MonoAudio out;
  out.rate = rate;
  const std::size_t frames = data_len / frame;
  out.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double s = 0.0;
    for (std::uint32_t c = 0; c < channels; ++c) s += detail::pcm_sample(data + i * frame + c * (bits / 8), bits, is_float);
    out.samples[i] = s / channels;
  }
  return out;
}

/// 16-bit PCM mono WAV encoder (used for fixtures and round trips).
inline Bytes encode_wav(const MonoAudio& a) {
  Bytes out;
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  const auto n = static_cast<std::uint32_t>(a.samples.size());
  const auto rate = static_cast<std::uint32_t>(a.rate);
  tag("RIFF");
  detail::put32(out, 36 + n * 2);
  tag("WAVE");
  tag("fmt ");
  detail::put32(out, 16);
  detail::put16(out, 1);
  detail::put16(out, 1);
  detail::put32(out, rate);
  detail::put32(out, rate * 2);
  detail::put16(out, 2);
  detail::put16(out, 16);
  tag("data");
  detail::put32(out, n * 2);
  for (double s : a.samples) {
    const double c = std::clamp(s, -1.0, 32767.0 / 32768.0);
    const auto v = static_cast<std::int16_t>(std::lround(c * 32768.0));
    detail::put16(out, static_cast<std::uint16_t>(v));
  }
  return out;
}

/// Non-overlapping analysis windows chosen by sample rate.
struct AudioFrameConfig {
  std::map<double, std::size_t> table{{11025, 220}, {22050, 220}, {24000, 220}, {44100, 250}, {48000, 250}};
  std::size_t window_override = 0;

  /// Window length for a rate: the table entry of the nearest listed rate.
  std::size_t window(double rate) const {
    if (window_override) return window_override;
    if (!(rate > 0.0)) throw InvalidArgument("audio: sample rate must be positive");
    if (table.empty()) throw InvalidArgument("audio: empty window table");
    auto best = table.begin();
    for (auto it = table.begin(); it != table.end(); ++it)
      if (std::abs(it->first - rate) < std::abs(best->first - rate)) best = it;
    return best->second;
  }

  std::size_t step(double rate) const { return window(rate); }
};

inline constexpr std::size_t baseline_audio_feature_count = 6;

inline const char* const baseline_audio_feature_names[baseline_audio_feature_count] = {
    "log_energy", "zero_crossing_rate", "spectral_centroid", "spectral_rolloff", "spectral_flux", "spectral_entropy"};

namespace detail {

inline std::mutex& fftw_plan_mutex() {
  static std::mutex m;
  return m;
}

// Magnitude spectrum (bins 0..n/2) of a Hann-windowed frame.
class Spectrum {
 public:
  explicit Spectrum(std::size_t n) : n_(n), in_(n), out_(n / 2 + 1), hann_(n) {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.data(), reinterpret_cast<fftw_complex*>(out_.data()),
                                 FFTW_ESTIMATE);
    for (std::size_t i = 0; i < n; ++i)
      hann_[i] = n > 1 ? 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) / static_cast<double>(n - 1)) : 1.0;
  }
  ~Spectrum() {
    std::lock_guard<std::mutex> lock(fftw_plan_mutex());
    fftw_destroy_plan(plan_);
  }
  Spectrum(const Spectrum&) = delete;
  Spectrum& operator=(const Spectrum&) = delete;

  void magnitudes(const double* frame, std::vector<double>& mag) {
    for (std::size_t i = 0; i < n_; ++i) in_[i] = frame[i] * hann_[i];
    fftw_execute(plan_);
    mag.resize(out_.size());
    for (std::size_t k = 0; k < out_.size(); ++k) mag[k] = std::abs(out_[k]);
  }

 private:
  std::size_t n_;
  std::vector<double> in_;
  std::vector<std::complex<double>> out_;
  std::vector<double> hann_;
  fftw_plan plan_;
};

}  // namespace detail

/// Short-time features over non-overlapping windows: log energy, zero
/// crossing rate, spectral centroid and roll-off (0.85) as fractions of the
/// Nyquist frequency, spectral flux against the previous window and
/// normalized spectral entropy. One row per full window; a signal shorter
/// than one window is zero-padded to a single window.
inline Matrix baseline_audio_features(const MonoAudio& input, const AudioFrameConfig& cfg = {}) {
  const std::size_t w = cfg.window(input.rate);
  const std::size_t step = cfg.step(input.rate);
  if (w < 2) throw InvalidArgument("audio: window too short");
  MonoAudio padded;
  const MonoAudio* src = &input;
  if (input.samples.size() < w) {
    padded = input;
    padded.samples.resize(w, 0.0);
    src = &padded;
  }
  const MonoAudio& audio = *src;
  if (!all_finite(audio.samples)) throw InvalidArgument("audio: non-finite sample");
  const std::size_t t = (audio.samples.size() - w) / step + 1;
  Matrix out(t, baseline_audio_feature_count);
  detail::Spectrum spec(w);
  std::vector<double> mag, prev;
  const double bins = static_cast<double>(w / 2);
  for (std::size_t r = 0; r < t; ++r) {
    const double* x = audio.samples.data() + r * step;
    double energy = 0.0;
    std::size_t crossings = 0;
    for (std::size_t i = 0; i < w; ++i) {
      energy += x[i] * x[i];
      if (i > 0 && (x[i] >= 0.0) != (x[i - 1] >= 0.0)) ++crossings;
    }
    energy /= static_cast<double>(w);
    out(r, 0) = std::log10(1.0 + energy / 1e-10) / 10.0;
    out(r, 1) = static_cast<double>(crossings) / static_cast<double>(w - 1);

    spec.magnitudes(x, mag);
    double msum = 0.0, psum = 0.0, weighted = 0.0;
    for (std::size_t k = 0; k < mag.size(); ++k) {
      msum += mag[k];
      psum += mag[k] * mag[k];
      weighted += static_cast<double>(k) * mag[k];
    }
    if (msum > 0.0) {
      out(r, 2) = weighted / msum / bins;
      double cum = 0.0;
      std::size_t k = 0;
      for (; k < mag.size(); ++k) {
        cum += mag[k] * mag[k];
        if (cum >= 0.85 * psum) break;
      }
      out(r, 3) = static_cast<double>(std::min(k, mag.size() - 1)) / bins;
      double h = 0.0;
      for (double m : mag) {
        const double p = m * m / psum;
        if (p > 0.0) h -= p * std::log2(p);
      }
      out(r, 5) = h / std::log2(static_cast<double>(mag.size()));
    }
    std::vector<double> norm(mag.size(), 0.0);
    if (msum > 0.0)
      for (std::size_t k = 0; k < mag.size(); ++k) norm[k] = mag[k] / msum;
    if (r > 0) {
      double flux = 0.0;
      for (std::size_t k = 0; k < norm.size(); ++k) flux += (norm[k] - prev[k]) * (norm[k] - prev[k]);
      out(r, 4) = flux;
    }
    prev = std::move(norm);
  }
  return out;
}

}  // namespace crea
