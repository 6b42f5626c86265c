// src/decoder.cc

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

#include "arcall/decoder.h"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <optional>
#include <ostream>

#include "arcall/error.h"
#include "arcall/logmath.h"

namespace arcall {

ViterbiResult viterbi(const CompositeHmm& hmm, const EmissionTable& e) {
  const std::size_t T = e.frames(), N = e.states();
  if (T == 0) throw Error(ErrorCode::kEmptyInput, "no feature frames");
  if (T < N)
    throw Error(ErrorCode::kNoValidPath, std::to_string(T) + " frames cannot traverse " +
                                             std::to_string(N) + " states");

  // from_prev[t][j]: the best predecessor of j at t is j - 1.
  std::vector<double> prev(N, kLogZero), cur(N, kLogZero);
  std::vector<std::vector<bool>> from_prev(T, std::vector<bool>(N, false));
  prev[0] = e(0, 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < N; ++j) {
      const double stay = prev[j] + hmm.log_self[j];
      const double advance = j > 0 ? prev[j - 1] + hmm.log_next[j - 1] : kLogZero;
      // Ties go to the lower-indexed predecessor.
      const bool take_advance = j > 0 && !is_log_zero(advance) && advance >= stay;
      from_prev[t][j] = take_advance;
      cur[j] = (take_advance ? advance : stay) + e(t, j);
    }
    std::swap(prev, cur);
  }

  ViterbiResult result;
  result.log_prob = prev[N - 1] + hmm.log_exit();
  if (is_log_zero(result.log_prob) || std::isnan(result.log_prob))
    throw Error(ErrorCode::kNoValidPath, "no path with non-zero probability");

  result.state_path.resize(T);
  std::size_t j = N - 1;
  for (std::size_t t = T; t-- > 0;) {
    result.state_path[t] = int(j);
    if (t > 0 && from_prev[t][j]) --j;
  }
  return result;
}

ViterbiResult viterbi(const CompositeHmm& hmm, const FeatureSequence& features) {
  if (features.empty()) throw Error(ErrorCode::kEmptyInput, "no feature frames");
  if (features.feature_dim != hmm.dim())
    throw Error(ErrorCode::kDimensionMismatch,
                "features of dimension " + std::to_string(features.feature_dim) +
                    " against a model of dimension " + std::to_string(hmm.dim()));
  return viterbi(hmm, EmissionTable(hmm, features));
}

// ---------------------------------------------------------------------------
// Recognition

LanguagePrior LanguagePrior::from_weights(const std::map<std::string, double>& weights) {
  if (weights.empty()) throw Error(ErrorCode::kInvalidArgument, "no prior weights");
  double total = 0.0;
  for (const auto& [word, w] : weights) {
    if (!(w > 0.0) || !std::isfinite(w))
      throw Error(ErrorCode::kInvalidArgument, "prior weight for " + word + " must be > 0");
    total += w;
  }
  LanguagePrior out;
  for (const auto& [word, w] : weights) out.priors_[word] = w / total;
  return out;
}

LanguagePrior LanguagePrior::uniform(const Lexicon& lexicon) {
  std::map<std::string, double> weights;
  for (const auto& w : lexicon.words()) weights[w] = 1.0;
  return from_weights(weights);
}

double LanguagePrior::log_prior(const std::string& word) const {
  auto it = priors_.find(word);
  if (it == priors_.end())
    throw Error(ErrorCode::kInvalidArgument, "no prior for word " + word);
  return std::log(it->second);
}

namespace {

struct Candidate {
  PhonemeSequence phonemes;
  bool lead = false;
  bool trail = false;
};

std::vector<Candidate> silence_variants(const PhonemeSequence& transcript, bool pad) {
  std::vector<Candidate> out{{transcript, false, false}};
  if (!pad) return out;
  const bool can_lead = transcript.front() != Phoneme::SIL;
  const bool can_trail = transcript.back() != Phoneme::SIL;
  auto make = [&](bool lead, bool trail) {
    Candidate c{{}, lead, trail};
    if (lead) c.phonemes.push_back(Phoneme::SIL);
    c.phonemes.insert(c.phonemes.end(), transcript.begin(), transcript.end());
    if (trail) c.phonemes.push_back(Phoneme::SIL);
    out.push_back(std::move(c));
  };
  if (can_lead) make(true, false);
  if (can_trail) make(false, true);
  if (can_lead && can_trail) make(true, true);
  return out;
}

Alignment segment_path(const CompositeHmm& hmm, const EmissionTable& e,
                       const ViterbiResult& best, bool lead, bool trail) {
  const auto& path = best.state_path;
  const std::size_t T = path.size();
  Alignment out;
  out.frame_count = int(T);
  out.total_log_score = best.log_prob;

  for (std::size_t t = 0; t < T; ++t) {
    const auto j = std::size_t(path[t]);
    const std::size_t pos = hmm.position[j];
    if (out.segments.empty() || t == 0 || hmm.position[std::size_t(path[t - 1])] != pos) {
      AlignmentSegment seg;
      seg.phoneme = hmm.phonemes[pos];
      seg.start_frame = int(t);
      seg.padding = (lead && pos == 0) || (trail && pos + 1 == hmm.phonemes.size());
      out.segments.push_back(seg);
    }
    auto& seg = out.segments.back();
    seg.end_frame = int(t);
    seg.log_score += e(t, j);
    if (t + 1 < T) {
      const auto next = std::size_t(path[t + 1]);
      const double a = hmm.log_transition(j, next);
      if (hmm.position[next] == pos)
        seg.log_score += a;
      else
        out.boundary_log_score += a;
    }
  }
  out.boundary_log_score += hmm.log_exit();
  return out;
}

}  // namespace

std::vector<WordHypothesis> recognize_isolated(const FeatureSequence& features,
                                               const Lexicon& lexicon,
                                               const AcousticModel& model,
                                               const LanguagePrior& priors,
                                               const DecodeOptions& options) {
  if (lexicon.empty()) throw Error(ErrorCode::kEmptyLexicon, "lexicon has no words");
  if (features.empty()) throw Error(ErrorCode::kEmptyInput, "no feature frames");

  std::vector<WordHypothesis> out;
  for (const auto& word : lexicon.words()) {
    WordHypothesis hyp;
    hyp.word = word;
    hyp.acoustic_log_score = kLogZero;
    const auto& variants = *lexicon.lookup(word);
    for (std::size_t v = 0; v < variants.size(); ++v) {
      for (const auto& cand : silence_variants(variants[v], options.try_silence_padding)) {
        const CompositeHmm hmm = compose_word_hmm(cand.phonemes, model);
        if (features.size() < hmm.state_count()) continue;
        try {
          const double score = viterbi(hmm, EmissionTable(hmm, features)).log_prob;
          if (score > hyp.acoustic_log_score) {
            hyp.acoustic_log_score = score;
            hyp.variant_index = int(v + 1);
          }
        } catch (const Error& err) {
          if (err.code() != ErrorCode::kNoValidPath) throw;
        }
      }
    }
    hyp.prior_log = priors.log_prior(word);
    hyp.combined_log = hyp.acoustic_log_score + hyp.prior_log;
    out.push_back(std::move(hyp));
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.combined_log != b.combined_log) return a.combined_log > b.combined_log;
    return a.word < b.word;
  });
  return out;
}

Alignment align_composite(const CompositeHmm& hmm, const EmissionTable& emissions) {
  return segment_path(hmm, emissions, viterbi(hmm, emissions), false, false);
}

Alignment forced_align(const FeatureSequence& features, const PhonemeSequence& transcript,
                       const AcousticModel& model, const DecodeOptions& options) {
  if (features.empty()) throw Error(ErrorCode::kEmptyInput, "no feature frames");
  if (transcript.empty())
    throw Error(ErrorCode::kCompositionError, "cannot align an empty transcript");

  std::optional<Alignment> best;
  std::optional<Error> last_error;
  for (const auto& cand : silence_variants(transcript, options.try_silence_padding)) {
    const CompositeHmm hmm = compose_word_hmm(cand.phonemes, model);
    const EmissionTable e(hmm, features);
    try {
      const ViterbiResult v = viterbi(hmm, e);
      if (!best || v.log_prob > best->total_log_score)
        best = segment_path(hmm, e, v, cand.lead, cand.trail);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kNoValidPath) throw;
      if (!last_error) last_error = err;
    }
  }
  if (!best) throw *last_error;
  return *best;
}

void write_alignment_dump(std::ostream& os, const Alignment& alignment) {
  const auto flags = os.flags();
  const auto precision = os.precision();
  os << std::fixed << std::setprecision(6);
  for (const auto& seg : alignment.segments)
    os << symbol(seg.phoneme) << ' ' << seg.start_frame << ' ' << seg.end_frame << ' '
       << seg.log_score << '\n';
  os << "TOTAL " << alignment.total_log_score << ' ' << alignment.frame_count << '\n';
  os.flags(flags);
  os.precision(precision);
}

}  // namespace arcall
