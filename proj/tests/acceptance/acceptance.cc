// tests/acceptance/acceptance.cc

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

// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Pass a criterion name to run only that one.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "arcall/acoustic.h"
#include "arcall/audio.h"
#include "arcall/call.h"
#include "arcall/decoder.h"
#include "arcall/error.h"
#include "arcall/eval.h"
#include "arcall/lexicon.h"
#include "arcall/logmath.h"

#include "../support/golden.h"
#include "../support/synth.h"

namespace fs = std::filesystem;
using namespace arcall;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Direct evaluation of a diagonal Gaussian mixture density in the linear
// domain; only used on small, well-scaled inputs.
double oracle_gmm_log(const GaussianMixture& g, const std::vector<double>& x) {
  double p = 0.0;
  for (std::size_t k = 0; k < g.weights.size(); ++k) {
    double c = g.weights[k];
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double v = g.variances[k][i], d = x[i] - g.means[k][i];
      c *= std::exp(-0.5 * d * d / v) / std::sqrt(2.0 * std::numbers::pi * v);
    }
    p += c;
  }
  return std::log(p);
}

// ---------------------------------------------------------------------------

Outcome dp_oracle() {
  const auto start = std::chrono::steady_clock::now();
  synth::Rng rng(101);
  std::uniform_int_distribution<int> states_d(1, 4), frames_d(1, 6), dim_d(1, 3), mix_d(1, 2);
  std::uniform_real_distribution<double> loop_d(0.05, 0.95), mean_d(-2.0, 2.0),
      var_d(0.3, 2.0), w_d(0.2, 1.0);
  int checked = 0, failures = 0, no_path_cases = 0;
  double worst = 0.0;

  // At least 500 HMMs that admit a path, plus the ones that do not.
  while (checked - no_path_cases < 500) {
    const int N = states_d(rng), T = frames_d(rng), D = dim_d(rng);
    CompositeHmm hmm;
    for (int j = 0; j < N; ++j) {
      GaussianMixture g;
      const int K = mix_d(rng);
      double wsum = 0.0;
      for (int k = 0; k < K; ++k) {
        g.weights.push_back(w_d(rng));
        wsum += g.weights.back();
        std::vector<double> mu(D), var(D);
        for (int i = 0; i < D; ++i) {
          mu[i] = mean_d(rng);
          var[i] = var_d(rng);
        }
        g.means.push_back(mu);
        g.variances.push_back(var);
      }
      for (auto& w : g.weights) w /= wsum;
      const double stay = loop_d(rng);
      hmm.phonemes.push_back(Phoneme::SIL);
      hmm.emissions.push_back(g);
      hmm.log_self.push_back(std::log(stay));
      hmm.log_next.push_back(std::log(1.0 - stay));
      hmm.position.push_back(std::size_t(j));
      hmm.local_state.push_back(0);
    }
    FeatureSequence f;
    f.feature_dim = D;
    for (int t = 0; t < T; ++t) {
      std::vector<double> x(D);
      for (auto& v : x) v = mean_d(rng);
      f.frames.push_back(x);
    }

    // Enumerate every state sequence in [0, N)^T.
    double best = kLogZero, total = kLogZero;
    std::vector<int> s(T, 0);
    for (long code = 0, limit = std::lround(std::pow(N, T)); code < limit; ++code) {
      long c = code;
      for (int t = 0; t < T; ++t) {
        s[t] = int(c % N);
        c /= N;
      }
      if (s[0] != 0 || s[T - 1] != N - 1) continue;
      double score = 0.0;
      bool ok = true;
      for (int t = 0; t < T && ok; ++t) {
        score += oracle_gmm_log(hmm.emissions[s[t]], f.frames[t]);
        if (t + 1 < T) {
          if (s[t + 1] == s[t])
            score += hmm.log_self[s[t]];
          else if (s[t + 1] == s[t] + 1)
            score += hmm.log_next[s[t]];
          else
            ok = false;
        }
      }
      if (!ok) continue;
      score += hmm.log_next[N - 1];
      best = std::max(best, score);
      total = log_add(total, score);
    }

    const double fwd = forward_log_prob(hmm, f);
    bool ok = true;
    if (is_log_zero(best)) {
      ++no_path_cases;
      ok = is_log_zero(fwd);
      try {
        viterbi(hmm, f);
        ok = false;
      } catch (const Error& e) {
        ok = ok && e.code() == ErrorCode::kNoValidPath;
      }
    } else {
      const ViterbiResult v = viterbi(hmm, f);
      const double dv = std::abs(v.log_prob - best), df = std::abs(fwd - total);
      worst = std::max({worst, dv, df});
      ok = dv <= 1e-9 && df <= 1e-9 && int(v.state_path.size()) == T;
    }
    ++checked;
    if (!ok) ++failures;
  }
  const double secs = seconds_since(start);
  return {failures == 0 && secs < 60.0,
          fmt("%d random HMMs (%d without a path), %d mismatches, max |diff| %.2e, %.2fs",
              checked, no_path_cases, failures, worst, secs)};
}

// ---------------------------------------------------------------------------

std::string check_model_invariants(const AcousticModel& model, double floor) {
  for (const auto& h : model.hmms()) {
    const int n = h.state_count();
    for (int i = 0; i < n; ++i) {
      double row = 0.0;
      for (int j = 0; j <= n; ++j) {
        const double a = h.log_transition(i, j);
        if (!is_log_zero(a) && j != i && j != i + 1) return "non-left-to-right transition";
        row += std::exp(a);
      }
      if (std::abs(row - 1.0) > 1e-9) return fmt("row sum %.12f", row);
      const auto& g = h.emission(i);
      double w = 0.0;
      for (double x : g.weights) {
        if (x < 0.0) return "negative weight";
        w += x;
      }
      if (std::abs(w - 1.0) > 1e-9) return fmt("weights sum %.12f", w);
      for (const auto& v : g.variances)
        for (double x : v)
          if (!(x >= floor)) return fmt("variance %.3g below floor", x);
    }
  }
  return {};
}

Outcome em_monotonicity() {
  const int kCorpora = 24, kIterations = 10;
  const double kFloor = kDefaultVarianceFloor;
  int steps = 0, decreases = 0;
  double worst_drop = 0.0;
  std::string invariant_error;
  const PhonemeSequence pool = {Phoneme::SIL, Phoneme::AE, Phoneme::S, Phoneme::M, Phoneme::UW};

  for (int c = 0; c < kCorpora; ++c) {
    synth::Rng rng(1000 + c);
    const int dim = 2 + c % 3;
    const AcousticModel truth = synth::random_model(dim, 3, 3.0, rng);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> len(2, 4);
    std::vector<TrainingUtterance> corpus;
    while (corpus.size() < 12) {
      PhonemeSequence tr;
      for (int n = len(rng); n > 0; --n) tr.push_back(pool[pick(rng)]);
      corpus.push_back({synth::sample_composite(compose_word_hmm(tr, truth), rng).features, tr});
    }
    TrainingConfig cfg;
    cfg.seed = 7 + c;
    AcousticModel model = flat_start(corpus, cfg);
    if (c % 2 == 1) {
      for (const auto& e : model.inventory().entries()) {
        auto& h = model.mutable_hmm(e.id);
        for (int s = 0; s < h.state_count(); ++s)
          h.mutable_emission(s) = split_components(h.emission(s), 2);
      }
    }
    double previous = 0.0;
    for (int it = 0; it <= kIterations; ++it) {
      double ll;
      if (it < kIterations) {
        EmStep step = baum_welch_iteration(model, corpus, kFloor);
        ll = step.total_log_likelihood;
        model = std::move(step.model);
        if (auto err = check_model_invariants(model, kFloor);
            !err.empty() && invariant_error.empty())
          invariant_error = fmt("corpus %d iteration %d: %s", c, it, err.c_str());
      } else {
        ll = corpus_log_likelihood(model, corpus);
      }
      if (it > 0) {
        ++steps;
        const double drop = previous - ll;
        worst_drop = std::max(worst_drop, drop);
        if (drop > 1e-8) ++decreases;
      }
      previous = ll;
    }
  }
  return {decreases == 0 && invariant_error.empty(),
          fmt("%d corpora x %d iterations, %d steps, %d decreases > 1e-8, max drop %.2e%s%s",
              kCorpora, kIterations, steps, decreases, worst_drop,
              invariant_error.empty() ? "" : ", invariant broken: ", invariant_error.c_str())};
}

// ---------------------------------------------------------------------------

Outcome synthetic_recognition() {
  synth::Rng rng(20130);
  const int dim = 6;
  const AcousticModel truth = synth::random_model(dim, 3, 3.0, rng);
  const PhonemeSequence pool = {Phoneme::AE, Phoneme::UH, Phoneme::IH, Phoneme::B,
                                Phoneme::T,  Phoneme::K,  Phoneme::M,  Phoneme::N,
                                Phoneme::S,  Phoneme::F,  Phoneme::L,  Phoneme::R};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);

  Lexicon lexicon;
  std::vector<std::pair<std::string, PhonemeSequence>> words;
  std::set<PhonemeSequence> seen;
  while (words.size() < 10) {
    PhonemeSequence p{pool[pick(rng)], pool[pick(rng)], pool[pick(rng)]};
    if (!seen.insert(p).second) continue;
    words.emplace_back("w" + std::to_string(words.size()), p);
    lexicon.add(words.back().first, p);
  }

  std::vector<TrainingUtterance> corpus;
  for (int r = 0; r < 20; ++r)
    for (const auto& [w, p] : words)
      corpus.push_back({synth::sample_composite(compose_word_hmm(p, truth), rng).features, p});
  const TrainingResult trained = train_acoustic_model(corpus);

  const LanguagePrior uniform = LanguagePrior::uniform(lexicon);
  std::map<std::string, double> weights, scaled;
  std::uniform_real_distribution<double> wd(0.5, 2.0);
  for (const auto& [w, p] : words) {
    weights[w] = wd(rng);
    scaled[w] = 37.5 * weights[w];
  }
  const LanguagePrior skewed = LanguagePrior::from_weights(weights);
  const LanguagePrior rescaled = LanguagePrior::from_weights(scaled);

  const int kTrials = 200;
  int correct = 0, argmax_mismatch = 0;
  for (int t = 0; t < kTrials; ++t) {
    const auto& [w, p] = words[std::size_t(t) % words.size()];
    const auto sample = synth::sample_composite(compose_word_hmm(p, trained.model), rng);
    const auto hyps = recognize_isolated(sample.features, lexicon, trained.model, uniform);
    if (hyps.front().word == w) ++correct;
    const auto a = recognize_isolated(sample.features, lexicon, trained.model, skewed);
    const auto b = recognize_isolated(sample.features, lexicon, trained.model, rescaled);
    // Adding the same constant to every combined score.
    std::string shifted_best;
    double shifted_score = kLogZero;
    for (const auto& h : a) {
      const double s = h.combined_log + std::log(37.5);
      if (s > shifted_score) {
        shifted_score = s;
        shifted_best = h.word;
      }
    }
    if (a.front().word != b.front().word || a.front().word != shifted_best) ++argmax_mismatch;
  }
  const double acc = 100.0 * correct / kTrials;
  return {acc >= 95.0 && argmax_mismatch == 0,
          fmt("top-1 %.1f%% over %d trials (need >= 95%%), prior-rescaling argmax mismatches %d",
              acc, kTrials, argmax_mismatch)};
}

// ---------------------------------------------------------------------------

Outcome alignment_boundaries() {
  synth::Rng rng(555);
  const int dim = 3, kTrials = 100;
  std::uniform_int_distribution<int> dur(4, 25);
  std::uniform_real_distribution<double> base(-3.0, 3.0);
  int within = 0, decomposition_failures = 0;
  double worst_gap = 0.0;
  const Phoneme A = Phoneme::AE, B = Phoneme::S;

  for (int trial = 0; trial < kTrials; ++trial) {
    std::vector<double> mu_a(dim), mu_b(dim), var(dim, 1.0);
    for (int i = 0; i < dim; ++i) {
      mu_a[i] = base(rng);
      mu_b[i] = mu_a[i] + (rng() % 2 ? 5.0 : -5.0);
    }
    AcousticModel model = make_uniform_model(3, mu_a, var);
    for (int s = 0; s < 3; ++s) model.mutable_hmm(B).mutable_emission(s) =
        GaussianMixture::single(mu_b, var);

    const int da = dur(rng), db = dur(rng);
    FeatureSequence f;
    f.feature_dim = dim;
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int t = 0; t < da + db; ++t) {
      const auto& mu = t < da ? mu_a : mu_b;
      std::vector<double> x(dim);
      for (int i = 0; i < dim; ++i) x[i] = mu[i] + n01(rng);
      f.frames.push_back(x);
    }
    const Alignment al = forced_align(f, {A, B}, model, DecodeOptions{false});
    if (al.segments.size() == 2 && std::abs(al.segments[1].start_frame - da) <= 2) ++within;

    double sum = al.boundary_log_score;
    for (const auto& s : al.segments) sum += s.log_score;
    const CompositeHmm hmm = compose_word_hmm({A, B}, model);
    const double direct = viterbi(hmm, f).log_prob;
    const double gap = std::max(std::abs(sum - al.total_log_score), std::abs(direct - al.total_log_score));
    worst_gap = std::max(worst_gap, gap);
    if (gap > 1e-9) ++decomposition_failures;
  }
  return {within >= 90 && decomposition_failures == 0,
          fmt("boundary within +-2 frames in %d/%d trials (need >= 90), "
              "decomposition failures %d, max gap %.2e",
              within, kTrials, decomposition_failures, worst_gap)};
}

// ---------------------------------------------------------------------------

int oracle_distance(const std::vector<std::string>& a, const std::vector<std::string>& b,
                    std::size_t i, std::size_t j, std::map<std::pair<std::size_t, std::size_t>, int>& memo) {
  if (i == a.size()) return int(b.size() - j);
  if (j == b.size()) return int(a.size() - i);
  auto key = std::make_pair(i, j);
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  const int r = std::min({oracle_distance(a, b, i + 1, j + 1, memo) + (a[i] == b[j] ? 0 : 1),
                          oracle_distance(a, b, i + 1, j, memo) + 1,
                          oracle_distance(a, b, i, j + 1, memo) + 1});
  memo[key] = r;
  return r;
}

Outcome wer_oracle() {
  std::vector<std::vector<std::string>> all{{}};
  for (std::size_t len = 1; len <= 6; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& s : all)
      if (s.size() == len - 1)
        for (const char* c : {"a", "b", "c"}) {
          auto t = s;
          t.push_back(c);
          next.push_back(t);
        }
    all.insert(all.end(), next.begin(), next.end());
  }
  long pairs = 0, mismatches = 0;
  for (const auto& ref : all) {
    if (ref.empty()) continue;
    for (const auto& hyp : all) {
      std::map<std::pair<std::size_t, std::size_t>, int> memo;
      const EditOps ops = align_labels(ref, hyp);
      const int expected = oracle_distance(ref, hyp, 0, 0, memo);
      const bool consistent = ops.hits + ops.substitutions + ops.deletions == int(ref.size()) &&
                              ops.hits + ops.substitutions + ops.insertions == int(hyp.size());
      if (ops.cost() != expected || !consistent) ++mismatches;
      ++pairs;
    }
  }
  EditOps reported;
  reported.n = 1000;
  reported.deletions = 50;
  reported.substitutions = 67;
  reported.insertions = 12;
  reported.hits = 883;
  const WerReport r = compute_wer(reported);
  const bool arithmetic = std::abs(r.percent_correct - 88.3) < 1e-9 &&
                          std::abs(r.wer - 11.7) < 1e-9 &&
                          std::abs(r.percent_correct + r.wer - 100.0) < 1e-12;
  return {mismatches == 0 && arithmetic,
          fmt("%ld exhaustive pairs, %ld mismatches; N=1000 D=50 S=67 -> correct %.1f wer %.1f",
              pairs, mismatches, r.percent_correct, r.wer)};
}

// ---------------------------------------------------------------------------

Outcome g2p_golden() {
  int phonetized = 0, classified = 0;
  std::string misses;
  for (const auto& g : golden::class_table_words()) {
    PhonemeSequence got;
    try {
      got = phonetize(g.word);
    } catch (const Error& e) {
      misses += std::string(" ") + g.word + " (" + e.what() + ")";
      continue;
    }
    if (got == parse_phoneme_list(g.phonemes))
      ++phonetized;
    else
      misses += std::string(misses.empty() ? " " : "; ") + g.word + " -> " + to_string(got);
    const PhonemeClass c = classify_word(got);
    if (class_name(c) == g.expected_class)
      ++classified;
    else
      misses += std::string(misses.empty() ? " " : "; ") + g.word + " classified " +
                std::string(class_name(c)) +
                ", table says " + g.expected_class;
  }
  const int n = int(golden::class_table_words().size());
  return {phonetized == n && classified == n,
          fmt("phonetize %d/%d, classify %d/%d;", phonetized, n, classified, n) + misses};
}

// ---------------------------------------------------------------------------

Outcome mfcc_properties() {
  synth::Rng rng(77);
  std::uniform_int_distribution<int> len_d(80, 480), extra_d(0, 2400);
  std::uniform_int_distribution<int> sample_d(-20000, 20000);
  int count_errors = 0;
  for (int c = 0; c < 1000; ++c) {
    const int L = len_d(rng);
    const int H = std::uniform_int_distribution<int>(1, L)(rng);
    const int S = L + extra_d(rng);
    FrameParams p;
    p.frame_length_ms = L / 16.0;
    p.frame_shift_ms = H / 16.0;
    p.cepstral_count = 13;
    AudioBuffer a;
    a.samples.resize(std::size_t(S));
    for (auto& s : a.samples) s = std::int16_t(sample_d(rng) / 4);
    const FeatureSequence f = compute_mfcc(a, p);
    const long expected = (S - L) / H + 1;
    if (long(f.size()) != expected || p.frame_length_samples(16000) != L ||
        p.frame_shift_samples(16000) != H)
      ++count_errors;
  }

  AudioBuffer noise;
  noise.samples.resize(16000);
  for (auto& s : noise.samples) s = std::int16_t(sample_d(rng));
  const FeatureSequence f1 = compute_mfcc(noise, FrameParams{});
  const FeatureSequence f2 = compute_mfcc(noise, FrameParams{});
  bool identical = f1.size() == f2.size() && f1.size() == 98;
  for (std::size_t t = 0; identical && t < f1.size(); ++t)
    identical = f1.frames[t].size() == f2.frames[t].size() &&
                std::memcmp(f1.frames[t].data(), f2.frames[t].data(),
                            f1.frames[t].size() * sizeof(double)) == 0;

  AudioBuffer tone;
  tone.samples.resize(16000);
  for (std::size_t n = 0; n < tone.samples.size(); ++n)
    tone.samples[n] = std::int16_t(std::lround(
        32767.0 * std::sin(2.0 * std::numbers::pi * 1000.0 * double(n) / 16000.0)));
  const FrameParams params;
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto inv = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  int nearest = 0;
  double nearest_gap = 1e9;
  for (int i = 0; i < params.mel_filter_count; ++i) {
    const double center = inv(mel(8000.0) * (i + 1) / (params.mel_filter_count + 1));
    if (std::abs(center - 1000.0) < nearest_gap) {
      nearest_gap = std::abs(center - 1000.0);
      nearest = i;
    }
  }
  const auto bank = log_mel_filterbank(tone, params);
  int wrong_frames = 0;
  for (std::size_t t = 1; t + 1 < bank.size(); ++t) {
    const auto& row = bank[t];
    if (int(std::max_element(row.begin(), row.end()) - row.begin()) != nearest) ++wrong_frames;
  }
  return {count_errors == 0 && identical && wrong_frames == 0,
          fmt("frame-count errors %d/1000, bit-identical rerun %s, 1 kHz argmax filter %d "
              "wrong on %d/%zu interior frames",
              count_errors, identical ? "yes" : "no", nearest, wrong_frames, bank.size() - 2)};
}

// ---------------------------------------------------------------------------

Outcome feedback_policy() {
  synth::Rng rng(8080);
  const int dim = 6;
  const AcousticModel truth = synth::random_model(dim, 3, 3.0, rng);
  const PhonemeSequence pool = {Phoneme::AE, Phoneme::UH, Phoneme::IH, Phoneme::B,
                                Phoneme::T,  Phoneme::K,  Phoneme::M,  Phoneme::N,
                                Phoneme::S,  Phoneme::F,  Phoneme::L,  Phoneme::R};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::vector<WordItem> items;
  for (int w = 0; w < 10; ++w) {
    WordItem item;
    item.word = "w" + std::to_string(w);
    // 5 to 8 phonemes, the length range of the class-table example words.
    const int length = std::uniform_int_distribution<int>(5, 8)(rng);
    for (int k = 0; k < length; ++k) item.phonemes.push_back(pool[pick(rng)]);
    item.phoneme_class = classify_word(item.phonemes);
    items.push_back(item);
  }
  std::vector<TrainingUtterance> corpus;
  for (int r = 0; r < 20; ++r)
    for (const auto& item : items)
      corpus.push_back(
          {synth::sample_composite(compose_word_hmm(item.phonemes, truth), rng).features,
           item.phonemes});
  const AcousticModel model = train_acoustic_model(corpus).model;
  const FeedbackPolicy policy;

  const int kTrials = 100;
  int clean_accepted = 0, perturbed_detected = 0;
  std::map<std::string, int> perturbed_verdicts;
  for (int t = 0; t < kTrials; ++t) {
    const WordItem& item = items[std::size_t(t) % items.size()];
    const CompositeHmm hmm = compose_word_hmm(item.phonemes, model);
    const auto clean = synth::sample_composite(hmm, rng);
    if (evaluate_attempt(clean.features, item, model, policy).verdict == Verdict::kAccepted)
      ++clean_accepted;

    auto bad = synth::sample_composite(hmm, rng);
    const std::size_t target = std::size_t(t / items.size()) % item.phonemes.size();
    // Each dimension moves away from the mean of the word's other states.
    std::vector<double> own(dim, 0.0), rest(dim, 0.0);
    double own_n = 0.0, rest_n = 0.0;
    for (std::size_t j = 0; j < hmm.state_count(); ++j) {
      const bool mine = hmm.position[j] == target;
      for (int i = 0; i < dim; ++i) (mine ? own : rest)[i] += hmm.emissions[j].means[0][i];
      (mine ? own_n : rest_n) += 1.0;
    }
    for (std::size_t f = 0; f < bad.states.size(); ++f) {
      const auto j = std::size_t(bad.states[f]);
      if (hmm.position[j] != target) continue;
      const auto& g = hmm.emissions[j];
      for (int i = 0; i < dim; ++i) {
        const double away = own[i] / own_n >= rest[i] / rest_n ? 1.0 : -1.0;
        bad.features.frames[f][i] += away * 10.0 * std::sqrt(g.variances[0][i]);
      }
    }
    const Feedback fb = evaluate_attempt(bad.features, item, model, policy);
    ++perturbed_verdicts[std::string(verdict_name(fb.verdict))];
    if (fb.verdict == Verdict::kFaulty && fb.per_phoneme.size() == item.phonemes.size() &&
        fb.per_phoneme[target].flagged)
      ++perturbed_detected;
  }

  int monotonic_violations = 0, definitional_violations = 0;
  std::normal_distribution<double> zd(-1.0, 2.0);
  std::uniform_real_distribution<double> thr(0.5, 4.0), frac(0.0, 1.0);
  for (int c = 0; c < 100; ++c) {
    std::vector<PhonemeScore> scores(std::size_t(1 + rng() % 8));
    for (auto& s : scores) s.z = zd(rng);
    FeedbackPolicy loose{thr(rng), thr(rng), frac(rng)};
    FeedbackPolicy strict = loose;
    strict.phoneme_z_threshold = loose.phoneme_z_threshold * frac(rng);
    const Feedback a = apply_policy(scores, loose), b = apply_policy(scores, strict);
    if (a.verdict == Verdict::kFaulty && b.verdict == Verdict::kAccepted) ++monotonic_violations;
    for (const Feedback* fb : {&a, &b}) {
      const bool none_flagged = fb->faulty.empty();
      if ((fb->verdict == Verdict::kAccepted) != (none_flagged && fb->verdict != Verdict::kRejected))
        ++definitional_violations;
    }
  }
  std::string verdicts;
  for (const auto& [v, n] : perturbed_verdicts) verdicts += fmt(" %s=%d", v.c_str(), n);
  return {perturbed_detected >= 90 && clean_accepted >= 95 && monotonic_violations == 0 &&
              definitional_violations == 0,
          fmt("perturbed flagged+Faulty %d/%d (need >= 90;%s), clean Accepted %d/%d (need >= 95), "
              "monotonicity violations %d/100",
              perturbed_detected, kTrials, verdicts.c_str(), clean_accepted, kTrials,
              monotonic_violations)};
}

// ---------------------------------------------------------------------------

std::vector<std::int16_t> render(const std::string& phoneme, int samples, synth::Rng& rng) {
  std::vector<std::int16_t> out(static_cast<std::size_t>(samples));
  std::normal_distribution<double> n01(0.0, 1.0);
  double prev = 0.0;
  for (int n = 0; n < samples; ++n) {
    double v;
    if (phoneme == "SIL") {
      v = 60.0 * n01(rng);
    } else if (phoneme == "AE") {
      const double t = double(n) / 16000.0;
      v = 0.0;
      for (int h = 1; h <= 8; ++h) v += 5000.0 / h * std::sin(2.0 * std::numbers::pi * 140.0 * h * t);
      v += 40.0 * n01(rng);
    } else {
      const double w = n01(rng);
      v = 3000.0 * (w - prev);
      prev = w;
    }
    out[std::size_t(n)] = std::int16_t(std::clamp(std::lround(v), -32768L, 32767L));
  }
  return out;
}

int run(const std::string& cmd) { return std::system((cmd + " >/dev/null 2>&1").c_str()); }

Outcome cli_end_to_end() {
  const auto start = std::chrono::steady_clock::now();
  const fs::path dir = fs::temp_directory_path() / ("arcall-e2e-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir / "corpus" / "wav");
  fs::create_directories(dir / "corpus" / "etc");

  synth::Rng rng(4242);
  std::uniform_int_distribution<int> dur(2400, 4800);
  const std::vector<std::vector<std::string>> scripts = {
      {"SIL", "AE", "S", "SIL"}, {"SIL", "S", "AE", "SIL"}, {"SIL", "AE", "S", "AE", "SIL"}};
  auto make = [&](const std::vector<std::string>& script, const fs::path& path) {
    std::vector<std::int16_t> pcm;
    for (const auto& p : script) {
      auto seg = render(p, dur(rng), rng);
      pcm.insert(pcm.end(), seg.begin(), seg.end());
    }
    AudioBuffer a;
    a.samples = std::move(pcm);
    write_wav_file(path.string(), a);
  };
  std::ofstream transcripts(dir / "corpus" / "etc" / "transcripts.txt");
  for (int u = 0; u < 15; ++u) {
    const auto& script = scripts[std::size_t(u) % scripts.size()];
    const std::string id = fmt("utt%02d", u);
    make(script, dir / "corpus" / "wav" / (id + ".wav"));
    transcripts << id;
    for (const auto& p : script) transcripts << ' ' << p;
    transcripts << '\n';
  }
  transcripts.close();
  make(scripts[1], dir / "held.wav");
  std::ofstream(dir / "held.txt") << "SIL S AE SIL\n";

  const std::string cli = ARCALL_CLI;
  const fs::path model = dir / "model.json", dump = dir / "dump.txt";
  int train_rc = run(cli + " train " + (dir / "corpus").string() + " " + model.string());
  int align_rc = std::system((cli + " align " + model.string() + " " + (dir / "held.wav").string() +
                              " " + (dir / "held.txt").string() + " > " + dump.string() + " 2>/dev/null")
                                 .c_str());

  bool dump_ok = false;
  std::string dump_note = "no dump";
  if (std::ifstream in(dump); in) {
    std::vector<std::string> phones;
    int expect_start = 0, frames = -1;
    bool contiguous = true;
    std::string line;
    while (std::getline(in, line)) {
      std::istringstream ls(line);
      std::string ph;
      ls >> ph;
      if (ph == "TOTAL") {
        double total;
        ls >> total >> frames;
        continue;
      }
      int s, e;
      double score;
      if (!(ls >> s >> e >> score)) contiguous = false;
      if (s != expect_start || e < s) contiguous = false;
      expect_start = e + 1;
      phones.push_back(ph);
    }
    dump_ok = contiguous && frames == expect_start &&
              phones == std::vector<std::string>{"SIL", "S", "AE", "SIL"};
    dump_note = fmt("%zu segments over %d frames", phones.size(), frames);
  }

  std::ofstream(dir / "ref.txt") << "u1 SIL S AE SIL\nu2 SIL AE S SIL\n";
  std::ofstream(dir / "hyp.txt") << "u1 SIL S AE SIL\nu2 SIL AE SIL\n";
  int wer_rc = run(cli + " eval-wer " + (dir / "ref.txt").string() + " " + (dir / "hyp.txt").string());

  const double secs = seconds_since(start);
  fs::remove_all(dir);
  return {train_rc == 0 && align_rc == 0 && wer_rc == 0 && dump_ok && secs < 120.0,
          fmt("train exit %d, align exit %d (%s, %s), eval-wer exit %d, %.1fs", train_rc,
              align_rc, dump_note.c_str(), dump_ok ? "dump ok" : "dump wrong", wer_rc, secs)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"dp-oracle-equivalence", dp_oracle},
      {"em-monotonicity", em_monotonicity},
      {"synthetic-recognition", synthetic_recognition},
      {"forced-alignment-boundaries", alignment_boundaries},
      {"wer-oracle", wer_oracle},
      {"g2p-golden-set", g2p_golden},
      {"mfcc-properties", mfcc_properties},
      {"feedback-policy", feedback_policy},
      {"cli-end-to-end", cli_end_to_end},
  };
  int failed = 0, ran = 0;
  for (const auto& [name, fn] : criteria) {
    if (argc > 1 && name != argv[1]) continue;
    ++ran;
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  if (ran == 0) {
    std::fprintf(stderr, "unknown criterion %s\n", argv[1]);
    return 2;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
