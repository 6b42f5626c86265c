// arcall/audio.h

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

/**
   WAV ingestion and the MFCC front end.

   The front end is: pre-emphasis, framing, Hamming window, power spectrum
   (zero-padded to the next power of two), triangular mel filterbank spaced
   evenly on mel(f) = 2595 log10(1 + f/700) between 0 Hz and Nyquist, floored
   natural log, DCT-II, then optional regression deltas (+-2 frames).

   Only 16 kHz, 16-bit, mono PCM is accepted; anything else is a recording
   that violates the corpus requirements and is rejected, not resampled.
 */

#ifndef ARCALL_AUDIO_H_
#define ARCALL_AUDIO_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace arcall {

inline constexpr int kRequiredSampleRate = 16000;

struct AudioBuffer {
  std::vector<std::int16_t> samples;
  int sample_rate_hz = kRequiredSampleRate;
  int channel_count = 1;
};

struct FrameParams {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
  double preemphasis_alpha = 0.97;
  int mel_filter_count = 26;
  int cepstral_count = 13;
  double log_floor = -50.0;
  bool use_deltas = true;

  // Throws kInvalidArgument if any invariant is broken.
  void validate() const;

  int feature_dim() const { return use_deltas ? 3 * cepstral_count : cepstral_count; }
  int frame_length_samples(int sample_rate_hz) const;
  int frame_shift_samples(int sample_rate_hz) const;

  bool operator==(const FrameParams&) const = default;
};

struct FeatureSequence {
  std::vector<std::vector<double>> frames;
  int feature_dim = 0;
  double frame_shift_ms = 10.0;

  std::size_t size() const { return frames.size(); }
  bool empty() const { return frames.empty(); }
};

AudioBuffer load_wav(std::span<const std::uint8_t> bytes);
AudioBuffer load_wav_file(const std::string& path);

// Canonical 44-byte-header PCM writer; accepts any rate/channel count so that
// tests can produce out-of-spec recordings.
std::vector<std::uint8_t> encode_wav(std::span<const std::int16_t> samples,
                                     int sample_rate_hz = kRequiredSampleRate,
                                     int channel_count = 1,
                                     int bits_per_sample = 16);
void write_wav_file(const std::string& path, const AudioBuffer& audio);

std::vector<double> preemphasize(const AudioBuffer& audio, double alpha);

// floor((S - L) / H) + 1 for S >= L, otherwise 0.
std::size_t frame_count(std::size_t samples, std::size_t frame_length,
                        std::size_t frame_shift);

// Mel filter center frequencies in Hz, lowest first.
std::vector<double> mel_center_frequencies(const FrameParams& params,
                                           int sample_rate_hz);

// Floored log filterbank energies, one row per frame. Works on real-valued
// input so that linear-scaling properties can be checked exactly.
std::vector<std::vector<double>> log_mel_filterbank(std::span<const double> signal,
                                                    const FrameParams& params,
                                                    int sample_rate_hz);
std::vector<std::vector<double>> log_mel_filterbank(const AudioBuffer& audio,
                                                    const FrameParams& params);

FeatureSequence compute_mfcc(const AudioBuffer& audio, const FrameParams& params);

// Appends regression deltas (window +-2, edge replication) computed over the
// leading `static_dim` columns, then the deltas of those deltas.
void append_deltas(std::vector<std::vector<double>>& frames, int static_dim);

// One frame per line, space-separated.
void write_feature_dump(std::ostream& os, const FeatureSequence& features);

}  // namespace arcall

#endif  // ARCALL_AUDIO_H_
