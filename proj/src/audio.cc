// src/audio.cc

// Copyright 2026  The arcall Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "arcall/audio.h"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <ostream>

#include "arcall/error.h"

namespace arcall {

namespace {

std::uint32_t read_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
         (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

std::uint16_t read_u16(const std::uint8_t* p) {
  return std::uint16_t(p[0] | (p[1] << 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(std::uint8_t(v >> (8 * i)));
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(std::uint8_t(v));
  out.push_back(std::uint8_t(v >> 8));
}

bool tag_is(const std::uint8_t* p, const char* tag) {
  return std::memcmp(p, tag, 4) == 0;
}

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

// FFTW planning is not thread-safe; execution with new arrays is. Plans are
// created once per size under a lock and reused.
class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto& cache = plan_cache();
    auto it = cache.find(n);
    if (it == cache.end()) {
      double* in = fftw_alloc_real(n);
      fftw_complex* out = fftw_alloc_complex(n / 2 + 1);
      fftw_plan plan = fftw_plan_dft_r2c_1d(int(n), in, out, FFTW_ESTIMATE);
      fftw_free(in);
      fftw_free(out);
      it = cache.emplace(n, plan).first;
    }
    plan_ = it->second;
    in_ = fftw_alloc_real(n);
    out_ = fftw_alloc_complex(n / 2 + 1);
  }
  ~RealFft() {
    fftw_free(in_);
    fftw_free(out_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_; }

  // |X_k|^2 for k = 0..n/2.
  void power_spectrum(std::vector<double>& power) {
    fftw_execute_dft_r2c(plan_, in_, out_);
    power.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k <= n_ / 2; ++k)
      power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
  }

 private:
  static std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
  }
  static std::map<std::size_t, fftw_plan>& plan_cache() {
    static std::map<std::size_t, fftw_plan> cache;
    return cache;
  }

  std::size_t n_;
  fftw_plan plan_;
  double* in_;
  fftw_complex* out_;
};

// Triangular weights evaluated at each FFT bin frequency.
std::vector<std::vector<double>> mel_filterbank(const FrameParams& params,
                                                int sample_rate_hz,
                                                std::size_t fft_size) {
  const int m = params.mel_filter_count;
  const double nyquist = sample_rate_hz / 2.0;
  const double mel_hi = hz_to_mel(nyquist);
  std::vector<double> edges(m + 2);
  for (int i = 0; i < m + 2; ++i) edges[i] = mel_to_hz(mel_hi * i / (m + 1));

  const std::size_t bins = fft_size / 2 + 1;
  std::vector<std::vector<double>> bank(m, std::vector<double>(bins, 0.0));
  for (int f = 0; f < m; ++f) {
    const double lo = edges[f], center = edges[f + 1], hi = edges[f + 2];
    for (std::size_t k = 0; k < bins; ++k) {
      const double hz = double(k) * sample_rate_hz / double(fft_size);
      if (hz > lo && hz <= center)
        bank[f][k] = (hz - lo) / (center - lo);
      else if (hz > center && hz < hi)
        bank[f][k] = (hi - hz) / (hi - center);
    }
  }
  return bank;
}

void check_supported(const AudioBuffer& audio) {
  if (audio.sample_rate_hz != kRequiredSampleRate || audio.channel_count != 1)
    throw Error(ErrorCode::kUnsupportedFormat,
                "audio must be 16 kHz mono, got " +
                    std::to_string(audio.sample_rate_hz) + " Hz, " +
                    std::to_string(audio.channel_count) + " channel(s)");
}

}  // namespace

void FrameParams::validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidArgument, "FrameParams: " + what);
  };
  if (!(frame_length_ms >= 5.0 && frame_length_ms <= 30.0))
    fail("frame_length_ms must lie in [5, 30]");
  if (!(frame_shift_ms > 0.0 && frame_shift_ms <= frame_length_ms))
    fail("frame_shift_ms must lie in (0, frame_length_ms]");
  if (!(preemphasis_alpha >= 0.0 && preemphasis_alpha < 1.0))
    fail("preemphasis_alpha must lie in [0, 1)");
  if (mel_filter_count < 1) fail("mel_filter_count must be positive");
  if (cepstral_count < 1 || cepstral_count > mel_filter_count)
    fail("cepstral_count must lie in [1, mel_filter_count]");
  if (!std::isfinite(log_floor)) fail("log_floor must be finite");
}

int FrameParams::frame_length_samples(int sample_rate_hz) const {
  return int(std::lround(frame_length_ms * sample_rate_hz / 1000.0));
}

int FrameParams::frame_shift_samples(int sample_rate_hz) const {
  return int(std::lround(frame_shift_ms * sample_rate_hz / 1000.0));
}

AudioBuffer load_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes.data(), "RIFF") ||
      !tag_is(bytes.data() + 8, "WAVE"))
    throw Error(ErrorCode::kMalformedWav, "missing RIFF/WAVE header");
  const std::uint64_t riff_size = read_u32(bytes.data() + 4);
  if (riff_size + 8 > bytes.size() || riff_size < 4)
    throw Error(ErrorCode::kMalformedWav, "RIFF size exceeds file length");
  const std::size_t end = std::size_t(riff_size) + 8;

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0, block_align = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= end) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint64_t size = read_u32(chunk + 4);
    if (pos + 8 + size > end)
      throw Error(ErrorCode::kMalformedWav, "chunk overruns RIFF container");
    const std::uint8_t* body = chunk + 8;
    if (tag_is(chunk, "fmt ")) {
      if (size < 16) throw Error(ErrorCode::kMalformedWav, "fmt chunk too small");
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      block_align = read_u16(body + 12);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible) {
        // Subformat GUID starts at offset 24; its first two bytes carry the tag.
        if (size < 40)
          throw Error(ErrorCode::kMalformedWav, "extensible fmt chunk too small");
        format = read_u16(body + 24);
      }
      have_fmt = true;
    } else if (tag_is(chunk, "data")) {
      data = body;
      data_size = std::size_t(size);
    }
    pos += 8 + std::size_t(size) + (size & 1);
  }

  if (!have_fmt) throw Error(ErrorCode::kMalformedWav, "no fmt chunk");
  if (data == nullptr) throw Error(ErrorCode::kMalformedWav, "no data chunk");
  if (format != kFormatPcm)
    throw Error(ErrorCode::kUnsupportedFormat,
                "encoding " + std::to_string(format) + " is not PCM");
  if (channels != 1)
    throw Error(ErrorCode::kUnsupportedFormat,
                std::to_string(channels) + " channels, need mono");
  if (rate != std::uint32_t(kRequiredSampleRate))
    throw Error(ErrorCode::kUnsupportedFormat,
                std::to_string(rate) + " Hz, need 16000 Hz");
  if (bits != 16)
    throw Error(ErrorCode::kUnsupportedFormat,
                std::to_string(bits) + "-bit samples, need 16-bit");
  if (block_align != 2)
    throw Error(ErrorCode::kMalformedWav, "block alignment inconsistent with 16-bit mono");
  if (data_size % 2 != 0)
    throw Error(ErrorCode::kMalformedWav, "data chunk holds a partial sample");
  if (data_size == 0) throw Error(ErrorCode::kMalformedWav, "data chunk is empty");

  AudioBuffer audio;
  audio.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < audio.samples.size(); ++i)
    audio.samples[i] = std::int16_t(read_u16(data + 2 * i));
  return audio;
}

AudioBuffer load_wav_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return load_wav(bytes);
}

std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples,
                                     int sample_rate_hz, int channel_count,
                                     int bits_per_sample) {
  const std::uint32_t bytes_per_sample = std::uint32_t(bits_per_sample / 8);
  const std::uint32_t data_size = std::uint32_t(samples.size()) * bytes_per_sample;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E', 'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, std::uint16_t(channel_count));
  put_u32(out, std::uint32_t(sample_rate_hz));
  put_u32(out, std::uint32_t(sample_rate_hz) * channel_count * bytes_per_sample);
  put_u16(out, std::uint16_t(channel_count * bytes_per_sample));
  put_u16(out, std::uint16_t(bits_per_sample));
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (std::int16_t s : samples) {
    if (bytes_per_sample == 1) {
      out.push_back(std::uint8_t((s >> 8) + 128));
    } else {
      put_u16(out, std::uint16_t(s));
      for (std::uint32_t extra = 2; extra < bytes_per_sample; ++extra) out.push_back(0);
    }
  }
  return out;
}

void write_wav_file(const std::string& path, const AudioBuffer& audio) {
  const auto bytes = encode_wav(audio.samples, audio.sample_rate_hz, audio.channel_count);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
}

std::vector<double> preemphasize(const AudioBuffer& audio, double alpha) {
  if (audio.samples.empty()) throw Error(ErrorCode::kEmptyInput, "empty audio");
  std::vector<double> y(audio.samples.size());
  y[0] = audio.samples[0];
  for (std::size_t n = 1; n < y.size(); ++n)
    y[n] = double(audio.samples[n]) - alpha * double(audio.samples[n - 1]);
  return y;
}

std::size_t frame_count(std::size_t samples, std::size_t frame_length,
                        std::size_t frame_shift) {
  if (frame_length == 0 || frame_shift == 0 || samples < frame_length) return 0;
  return (samples - frame_length) / frame_shift + 1;
}

std::vector<double> mel_center_frequencies(const FrameParams& params,
                                           int sample_rate_hz) {
  const int m = params.mel_filter_count;
  const double mel_hi = hz_to_mel(sample_rate_hz / 2.0);
  std::vector<double> centers(m);
  for (int i = 0; i < m; ++i) centers[i] = mel_to_hz(mel_hi * (i + 1) / (m + 1));
  return centers;
}

std::vector<std::vector<double>> log_mel_filterbank(std::span<const double> signal,
                                                    const FrameParams& params,
                                                    int sample_rate_hz) {
  params.validate();
  const std::size_t len = std::size_t(params.frame_length_samples(sample_rate_hz));
  const std::size_t shift = std::size_t(params.frame_shift_samples(sample_rate_hz));
  const std::size_t frames = frame_count(signal.size(), len, shift);
  if (frames == 0)
    throw Error(ErrorCode::kAudioTooShort,
                std::to_string(signal.size()) + " samples, need at least " +
                    std::to_string(len));

  // Pre-emphasis runs over the whole signal, before framing.
  std::vector<double> emphasized(signal.size());
  emphasized[0] = signal[0];
  for (std::size_t n = 1; n < signal.size(); ++n)
    emphasized[n] = signal[n] - params.preemphasis_alpha * signal[n - 1];

  std::vector<double> window(len);
  for (std::size_t n = 0; n < len; ++n)
    window[n] = len > 1
                    ? 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * double(n) /
                                             double(len - 1))
                    : 1.0;

  const std::size_t fft_size = next_pow2(len);
  const auto bank = mel_filterbank(params, sample_rate_hz, fft_size);
  RealFft fft(fft_size);
  double* in = fft.input();
  std::vector<double> power;

  std::vector<std::vector<double>> out(frames,
                                       std::vector<double>(params.mel_filter_count));
  for (std::size_t f = 0; f < frames; ++f) {
    const double* frame = emphasized.data() + f * shift;
    for (std::size_t n = 0; n < len; ++n) in[n] = frame[n] * window[n];
    for (std::size_t n = len; n < fft_size; ++n) in[n] = 0.0;
    fft.power_spectrum(power);
    for (int m = 0; m < params.mel_filter_count; ++m) {
      double energy = 0.0;
      for (std::size_t k = 0; k < power.size(); ++k) energy += bank[m][k] * power[k];
      out[f][m] = energy > 0.0 ? std::max(std::log(energy), params.log_floor)
                               : params.log_floor;
    }
  }
  return out;
}

std::vector<std::vector<double>> log_mel_filterbank(const AudioBuffer& audio,
                                                    const FrameParams& params) {
  check_supported(audio);
  std::vector<double> signal(audio.samples.begin(), audio.samples.end());
  return log_mel_filterbank(signal, params, audio.sample_rate_hz);
}

void append_deltas(std::vector<std::vector<double>>& frames, int static_dim) {
  constexpr int kWindow = 2;
  const int t_count = int(frames.size());
  if (t_count == 0) return;
  auto regress = [&](int offset) {
    const double denom = 2.0 * (1.0 * 1.0 + 2.0 * 2.0);
    std::vector<std::vector<double>> d(t_count, std::vector<double>(static_dim));
    for (int t = 0; t < t_count; ++t) {
      for (int i = 0; i < static_dim; ++i) {
        double acc = 0.0;
        for (int theta = 1; theta <= kWindow; ++theta) {
          const int ahead = std::min(t + theta, t_count - 1);
          const int behind = std::max(t - theta, 0);
          acc += theta * (frames[ahead][offset + i] - frames[behind][offset + i]);
        }
        d[t][i] = acc / denom;
      }
    }
    for (int t = 0; t < t_count; ++t)
      frames[t].insert(frames[t].end(), d[t].begin(), d[t].end());
  };
  regress(0);
  regress(static_dim);
}

FeatureSequence compute_mfcc(const AudioBuffer& audio, const FrameParams& params) {
  const auto fbank = log_mel_filterbank(audio, params);
  const int m = params.mel_filter_count;
  const int c = params.cepstral_count;

  // Orthonormal DCT-II basis.
  std::vector<std::vector<double>> basis(c, std::vector<double>(m));
  for (int n = 0; n < c; ++n) {
    const double scale = std::sqrt((n == 0 ? 1.0 : 2.0) / m);
    for (int j = 0; j < m; ++j)
      basis[n][j] = scale * std::cos(std::numbers::pi * n * (j + 0.5) / m);
  }

  FeatureSequence features;
  features.frame_shift_ms = params.frame_shift_ms;
  features.frames.resize(fbank.size());
  for (std::size_t t = 0; t < fbank.size(); ++t) {
    auto& out = features.frames[t];
    out.resize(c);
    for (int n = 0; n < c; ++n) {
      double acc = 0.0;
      for (int j = 0; j < m; ++j) acc += basis[n][j] * fbank[t][j];
      out[n] = acc;
    }
  }
  if (params.use_deltas) append_deltas(features.frames, c);
  features.feature_dim = params.feature_dim();
  return features;
}

void write_feature_dump(std::ostream& os, const FeatureSequence& features) {
  const auto old_precision = os.precision(9);
  for (const auto& frame : features.frames) {
    for (std::size_t i = 0; i < frame.size(); ++i) {
      if (i) os << ' ';
      os << frame[i];
    }
    os << '\n';
  }
  os.precision(old_precision);
}

}  // namespace arcall
