// arcall/decoder.h

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
   Exact Viterbi decoding, isolated-word recognition and forced alignment.

   Recognition picks argmax_w log p(x|w) + log P(w). The evidence p(x) is the
   same for every candidate and is never computed.
 */

#ifndef ARCALL_DECODER_H_
#define ARCALL_DECODER_H_

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "arcall/acoustic.h"
#include "arcall/lexicon.h"

namespace arcall {

struct ViterbiResult {
  std::vector<int> state_path;
  double log_prob = 0.0;
};

// Throws kNoValidPath when T < state count (or no path has finite score) and
// kEmptyInput when there are no frames. Backtrace ties go to the lower state.
ViterbiResult viterbi(const CompositeHmm& hmm, const FeatureSequence& features);
ViterbiResult viterbi(const CompositeHmm& hmm, const EmissionTable& emissions);

class LanguagePrior {
 public:
  // Normalizes the given positive weights to sum to one.
  static LanguagePrior from_weights(const std::map<std::string, double>& weights);
  static LanguagePrior uniform(const Lexicon& lexicon);

  double log_prior(const std::string& word) const;
  const std::map<std::string, double>& priors() const { return priors_; }

 private:
  std::map<std::string, double> priors_;
};

struct WordHypothesis {
  std::string word;
  double acoustic_log_score = 0.0;
  double prior_log = 0.0;
  double combined_log = 0.0;
  int variant_index = 0;  // 0 when no variant could be decoded
};

struct DecodeOptions {
  // Also try the transcript wrapped in leading/trailing SIL and keep the best.
  bool try_silence_padding = true;
};

// Sorted by combined_log descending, ties by word. Words that cannot be
// decoded score kLogZero and sort last.
std::vector<WordHypothesis> recognize_isolated(const FeatureSequence& features,
                                               const Lexicon& lexicon,
                                               const AcousticModel& model,
                                               const LanguagePrior& priors,
                                               const DecodeOptions& options = {});

struct AlignmentSegment {
  Phoneme phoneme = Phoneme::SIL;
  int start_frame = 0;
  int end_frame = 0;  // inclusive
  double log_score = 0.0;
  bool padding = false;  // SIL added around the transcript by the aligner

  int frames() const { return end_frame - start_frame + 1; }
};

struct Alignment {
  std::vector<AlignmentSegment> segments;
  double total_log_score = 0.0;
  // Exit transitions between consecutive phonemes plus the final exit.
  double boundary_log_score = 0.0;
  int frame_count = 0;
};

// Alignment of an already-composed HMM; segment scores hold emissions and
// within-phoneme transitions only.
Alignment align_composite(const CompositeHmm& hmm, const EmissionTable& emissions);

Alignment forced_align(const FeatureSequence& features, const PhonemeSequence& transcript,
                       const AcousticModel& model, const DecodeOptions& options = {});

// `phoneme start end score` per segment, then `TOTAL score frames`.
void write_alignment_dump(std::ostream& os, const Alignment& alignment);

}  // namespace arcall

#endif  // ARCALL_DECODER_H_
