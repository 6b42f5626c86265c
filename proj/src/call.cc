// src/call.cc

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

#include "arcall/call.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "arcall/error.h"

namespace arcall {

std::string_view class_name(PhonemeClass c) {
  switch (c) {
    case PhonemeClass::LSVG: return "LSVG";
    case PhonemeClass::WUS: return "WUS";
    case PhonemeClass::SEOL: return "SEOL";
    case PhonemeClass::MFH: return "MFH";
    case PhonemeClass::EL: return "EL";
    case PhonemeClass::US: return "US";
  }
  return "US";
}

std::optional<PhonemeClass> parse_class(std::string_view name) {
  for (PhonemeClass c : kAllClasses)
    if (class_name(c) == name) return c;
  return std::nullopt;
}

std::string_view level_name(Level level) {
  switch (level) {
    case Level::A1: return "A1";
    case Level::A2: return "A2";
    case Level::B1: return "B1";
  }
  return "A1";
}

std::optional<Level> parse_level(std::string_view name) {
  for (Level l : {Level::A1, Level::A2, Level::B1})
    if (level_name(l) == name) return l;
  return std::nullopt;
}

namespace {

bool any_of(const PhonemeSequence& ph, std::initializer_list<Phoneme> set) {
  return std::any_of(ph.begin(), ph.end(), [&](Phoneme p) {
    return std::find(set.begin(), set.end(), p) != set.end();
  });
}

bool is_consonant(Phoneme p) { return p != Phoneme::SIL && !is_vowel(p); }

}  // namespace

PhonemeClass classify_word(const PhonemeSequence& ph) {
  using P = Phoneme;
  for (std::size_t i = 1; i < ph.size(); ++i)
    if (ph[i] == P::E || ph[i] == P::AW || ph[i] == P::AY) return PhonemeClass::MFH;
  if (any_of(ph, {P::Q, P::SS, P::DD, P::TT, P::DH2})) return PhonemeClass::EL;
  if (any_of(ph, {P::AI, P::HH})) return PhonemeClass::WUS;
  for (std::size_t i = 1; i < ph.size(); ++i)
    if (ph[i] == ph[i - 1] && is_consonant(ph[i])) return PhonemeClass::LSVG;
  if (any_of(ph, {P::DH, P::H, P::TH, P::KH, P::R})) return PhonemeClass::SEOL;
  return PhonemeClass::US;
}

WordItem WordItem::from_word(const std::string& word, Level level) {
  WordItem item;
  item.word = word;
  item.level = level;
  item.spans = phonetize_with_spans(word);
  for (const auto& s : item.spans) item.phonemes.push_back(s.phoneme);
  item.phoneme_class = classify_word(item.phonemes);
  return item;
}

void FeedbackPolicy::validate() const {
  if (!std::isfinite(phoneme_z_threshold) || !std::isfinite(word_z_threshold))
    throw Error(ErrorCode::kInvalidArgument, "feedback thresholds must be finite");
  if (!(max_faulty_fraction >= 0.0 && max_faulty_fraction <= 1.0))
    throw Error(ErrorCode::kInvalidArgument, "max_faulty_fraction must be in [0, 1]");
}

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kAccepted: return "Accepted";
    case Verdict::kFaulty: return "Faulty";
    case Verdict::kRejected: return "Rejected";
  }
  return "Rejected";
}

std::optional<Verdict> parse_verdict(std::string_view name) {
  for (Verdict v : {Verdict::kAccepted, Verdict::kFaulty, Verdict::kRejected})
    if (verdict_name(v) == name) return v;
  return std::nullopt;
}

namespace {

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string flagged_list(const Feedback& fb) {
  std::string out;
  for (std::size_t i : fb.faulty) {
    if (!out.empty()) out += ", ";
    out += symbol(fb.per_phoneme[i].phoneme);
    out += " (#" + std::to_string(i + 1) + ")";
  }
  return out;
}

}  // namespace

Feedback apply_policy(std::vector<PhonemeScore> scores, const FeedbackPolicy& policy) {
  policy.validate();
  Feedback fb;
  fb.per_phoneme = std::move(scores);
  std::vector<double> zs;
  for (std::size_t i = 0; i < fb.per_phoneme.size(); ++i) {
    auto& s = fb.per_phoneme[i];
    s.flagged = s.z < -policy.phoneme_z_threshold;
    if (s.flagged) fb.faulty.push_back(i);
    zs.push_back(s.z);
  }
  fb.word_z = median(zs);

  const double fraction =
      fb.per_phoneme.empty() ? 1.0 : double(fb.faulty.size()) / double(fb.per_phoneme.size());
  if (fb.per_phoneme.empty() || fb.word_z < -policy.word_z_threshold ||
      fraction > policy.max_faulty_fraction) {
    fb.verdict = Verdict::kRejected;
    fb.message = "The word is too far from the model. Listen again and repeat it.";
  } else if (!fb.faulty.empty()) {
    fb.verdict = Verdict::kFaulty;
    fb.message = "Check the pronunciation of " + flagged_list(fb) + ".";
  } else {
    fb.verdict = Verdict::kAccepted;
    fb.message = "Well pronounced.";
  }
  return fb;
}

Feedback evaluate_attempt(const FeatureSequence& features, const WordItem& item,
                          const AcousticModel& model, const FeedbackPolicy& policy) {
  policy.validate();
  Alignment alignment;
  try {
    // Pad with SIL only if the model was trained on it.
    const bool pad = model.score_stats().count(Phoneme::SIL) > 0;
    alignment = forced_align(features, item.phonemes, model, DecodeOptions{pad});
  } catch (const Error& err) {
    if (err.code() != ErrorCode::kNoValidPath && err.code() != ErrorCode::kEmptyInput) throw;
    Feedback fb;
    fb.verdict = Verdict::kRejected;
    fb.message = "No usable speech was found for this word. Please repeat it.";
    return fb;
  }

  const auto& stats = model.score_stats();
  std::vector<PhonemeScore> scores;
  for (const auto& seg : alignment.segments) {
    if (seg.padding) continue;
    PhonemeScore s;
    s.phoneme = seg.phoneme;
    s.start_frame = seg.start_frame;
    s.end_frame = seg.end_frame;
    s.per_frame_score = seg.log_score / double(seg.frames());
    if (auto it = stats.find(seg.phoneme); it != stats.end() && it->second.stddev > 0.0)
      s.z = (s.per_frame_score - it->second.mean) / it->second.stddev;
    scores.push_back(s);
  }
  Feedback fb = apply_policy(std::move(scores), policy);
  fb.alignment = std::move(alignment);
  return fb;
}

std::string_view next_action_name(NextAction a) {
  switch (a) {
    case NextAction::kAdvance: return "Advance";
    case NextAction::kOfferRepeat: return "OfferRepeat";
    case NextAction::kRepeatRequired: return "RepeatRequired";
  }
  return "OfferRepeat";
}

NextAction next_action(Verdict verdict, int repeats_so_far, int teacher_limit) {
  if (repeats_so_far < 0)
    throw Error(ErrorCode::kInvalidArgument, "repeats_so_far must be >= 0");
  if (verdict == Verdict::kAccepted) return NextAction::kAdvance;
  return repeats_so_far < teacher_limit ? NextAction::kRepeatRequired
                                        : NextAction::kOfferRepeat;
}

NextAction next_action(const Feedback& feedback, int repeats_so_far, int teacher_limit) {
  return next_action(feedback.verdict, repeats_so_far, teacher_limit);
}

namespace {

double rate(int accepted, int attempts) {
  return attempts > 0 ? 100.0 * double(accepted) / double(attempts) : 0.0;
}

}  // namespace

std::vector<ClassStats> aggregate_stats(std::span<const AttemptRecord> history) {
  std::map<std::pair<std::string, PhonemeClass>, std::pair<int, int>> counts;
  for (const auto& a : history) {
    auto& c = counts[{a.learner_id, a.phoneme_class}];
    ++c.first;
    if (a.verdict == Verdict::kAccepted) ++c.second;
  }
  std::vector<ClassStats> out;
  for (const auto& [key, c] : counts)
    out.push_back({key.first, key.second, c.first, c.second, rate(c.second, c.first)});
  return out;
}

std::vector<LevelStats> aggregate_level_stats(std::span<const AttemptRecord> history) {
  std::map<std::pair<std::string, Level>, std::pair<int, int>> counts;
  for (const auto& a : history) {
    auto& c = counts[{a.learner_id, a.level}];
    ++c.first;
    if (a.verdict == Verdict::kAccepted) ++c.second;
  }
  std::vector<LevelStats> out;
  for (const auto& [key, c] : counts)
    out.push_back({key.first, key.second, c.first, c.second, rate(c.second, c.first)});
  return out;
}

std::string stats_to_csv(const std::vector<ClassStats>& stats) {
  std::string out = "learner_id,class,attempts,accepted,success_rate\n";
  char rate_text[32];
  for (const auto& s : stats) {
    std::snprintf(rate_text, sizeof rate_text, "%.1f", s.success_rate);
    out += s.learner_id + "," + std::string(class_name(s.phoneme_class)) + "," +
           std::to_string(s.attempts) + "," + std::to_string(s.accepted) + "," + rate_text +
           "\n";
  }
  return out;
}

std::string stats_to_json(const std::vector<ClassStats>& stats) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : stats)
    rows.push_back({{"learner_id", s.learner_id},
                    {"class", class_name(s.phoneme_class)},
                    {"attempts", s.attempts},
                    {"accepted", s.accepted},
                    {"success_rate", s.success_rate}});
  return rows.dump(2);
}

}  // namespace arcall
