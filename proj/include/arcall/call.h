// arcall/call.h

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
   Pronunciation-training layer: phoneme-class labels for words, the
   accept / faulty / reject decision for one attempt, the repeat-or-advance
   rule, and per-learner success rates per class.

   A phoneme's score is its per-frame forced-alignment log-likelihood. It is
   turned into z = (score - mean) / stddev against the model's per-frame
   training statistics for that phoneme; the word z is the median over the
   word's phonemes.
 */

#ifndef ARCALL_CALL_H_
#define ARCALL_CALL_H_

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arcall/acoustic.h"
#include "arcall/decoder.h"
#include "arcall/lexicon.h"

namespace arcall {

// LSVG: long or short vowel gemination, WUS: unusual sounds, SEOL: sounds
// existing in other languages, MFH: middle and final hamza, EL: emphatic
// letters, US: usual sounds.
enum class PhonemeClass { LSVG, WUS, SEOL, MFH, EL, US };
inline constexpr PhonemeClass kAllClasses[] = {PhonemeClass::LSVG, PhonemeClass::WUS,
                                               PhonemeClass::SEOL, PhonemeClass::MFH,
                                               PhonemeClass::EL,   PhonemeClass::US};

enum class Level { A1, A2, B1 };

std::string_view class_name(PhonemeClass c);
std::optional<PhonemeClass> parse_class(std::string_view name);
std::string_view level_name(Level level);
std::optional<Level> parse_level(std::string_view name);

// First match in the order MFH, EL, WUS, LSVG, SEOL, US:
//   MFH   E, AW or AY anywhere but the first phoneme
//   EL    any of Q SS DD TT DH2
//   WUS   AI or HH
//   LSVG  two identical consecutive consonants (gemination)
//   SEOL  any of DH H TH KH R
PhonemeClass classify_word(const PhonemeSequence& phonemes);

struct WordItem {
  std::string word;
  Level level = Level::A1;
  PhonemeClass phoneme_class = PhonemeClass::US;
  PhonemeSequence phonemes;
  std::vector<PhonemeSpan> spans;

  // Phonetizes and classifies; G2P errors propagate.
  static WordItem from_word(const std::string& word, Level level);
};

struct FeedbackPolicy {
  double phoneme_z_threshold = 2.0;
  double word_z_threshold = 2.5;
  double max_faulty_fraction = 0.5;

  void validate() const;
};

enum class Verdict { kAccepted, kFaulty, kRejected };
std::string_view verdict_name(Verdict v);
std::optional<Verdict> parse_verdict(std::string_view name);

struct PhonemeScore {
  Phoneme phoneme = Phoneme::SIL;
  int start_frame = 0;
  int end_frame = 0;
  double per_frame_score = 0.0;
  double z = 0.0;  // 0 when the model has no statistics for the phoneme
  bool flagged = false;
};

struct Feedback {
  Verdict verdict = Verdict::kRejected;
  std::vector<PhonemeScore> per_phoneme;  // one per item phoneme, in order
  std::vector<std::size_t> faulty;        // indices of flagged phonemes
  double word_z = 0.0;
  std::string message;
  std::optional<Alignment> alignment;  // absent when alignment failed
};

// Flags, verdict and message from already-computed z values.
Feedback apply_policy(std::vector<PhonemeScore> scores, const FeedbackPolicy& policy);

Feedback evaluate_attempt(const FeatureSequence& features, const WordItem& item,
                          const AcousticModel& model, const FeedbackPolicy& policy = {});

enum class NextAction { kAdvance, kOfferRepeat, kRepeatRequired };
std::string_view next_action_name(NextAction a);

NextAction next_action(const Feedback& feedback, int repeats_so_far, int teacher_limit);
NextAction next_action(Verdict verdict, int repeats_so_far, int teacher_limit);

struct AttemptRecord {
  std::string learner_id;
  PhonemeClass phoneme_class = PhonemeClass::US;
  Level level = Level::A1;
  Verdict verdict = Verdict::kRejected;
};

struct ClassStats {
  std::string learner_id;
  PhonemeClass phoneme_class = PhonemeClass::US;
  int attempts = 0;
  int accepted = 0;
  double success_rate = 0.0;  // percent
};

struct LevelStats {
  std::string learner_id;
  Level level = Level::A1;
  int attempts = 0;
  int accepted = 0;
  double success_rate = 0.0;
};

// Ordered by learner, then class in declaration order.
std::vector<ClassStats> aggregate_stats(std::span<const AttemptRecord> history);
std::vector<LevelStats> aggregate_level_stats(std::span<const AttemptRecord> history);

// learner_id,class,attempts,accepted,success_rate
std::string stats_to_csv(const std::vector<ClassStats>& stats);
std::string stats_to_json(const std::vector<ClassStats>& stats);

}  // namespace arcall

#endif  // ARCALL_CALL_H_
