// src/acoustic.cc

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

#include "arcall/acoustic.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "arcall/decoder.h"
#include "arcall/error.h"
#include "arcall/logmath.h"

namespace arcall {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::kInvalidArgument, what);
}

bool near_one(double s) { return std::abs(s - 1.0) <= 1e-9; }

}  // namespace

// ---------------------------------------------------------------------------
// GaussianMixture

GaussianMixture GaussianMixture::single(std::vector<double> mean,
                                        std::vector<double> variance) {
  GaussianMixture g;
  g.weights = {1.0};
  g.means.push_back(std::move(mean));
  g.variances.push_back(std::move(variance));
  return g;
}

void GaussianMixture::validate(double variance_floor) const {
  require(!weights.empty(), "mixture has no components");
  require(means.size() == weights.size() && variances.size() == weights.size(),
          "mixture component arrays differ in length");
  const std::size_t d = means.front().size();
  double sum = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    require(weights[k] >= 0.0 && std::isfinite(weights[k]), "negative mixture weight");
    sum += weights[k];
    require(means[k].size() == d && variances[k].size() == d,
            "mixture components differ in dimension");
    for (std::size_t i = 0; i < d; ++i) {
      require(std::isfinite(means[k][i]), "non-finite mean");
      require(variances[k][i] > 0.0 && variances[k][i] >= variance_floor &&
                  std::isfinite(variances[k][i]),
              "variance below floor");
    }
  }
  require(near_one(sum), "mixture weights do not sum to one");
}

void gmm_component_log_likelihoods(const GaussianMixture& gmm, std::span<const double> x,
                                   std::vector<double>& out) {
  const std::size_t d = std::size_t(gmm.dim());
  if (x.size() != d)
    throw Error(ErrorCode::kDimensionMismatch,
                "vector of dimension " + std::to_string(x.size()) + " against mixture of " +
                    std::to_string(d));
  out.resize(gmm.component_count());
  for (std::size_t k = 0; k < gmm.component_count(); ++k) {
    const auto& mu = gmm.means[k];
    const auto& var = gmm.variances[k];
    double acc = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double diff = x[i] - mu[i];
      acc += kLog2Pi + std::log(var[i]) + diff * diff / var[i];
    }
    out[k] = safe_log(gmm.weights[k]) - 0.5 * acc;
  }
}

double gmm_log_likelihood(const GaussianMixture& gmm, std::span<const double> x) {
  std::vector<double> comps;
  gmm_component_log_likelihoods(gmm, x, comps);
  return log_sum_exp(comps);
}

GaussianMixture split_components(const GaussianMixture& gmm, std::size_t target) {
  GaussianMixture out = gmm;
  while (out.component_count() < target) {
    const auto heavy = std::size_t(
        std::max_element(out.weights.begin(), out.weights.end()) - out.weights.begin());
    auto mean_hi = out.means[heavy];
    auto mean_lo = out.means[heavy];
    for (std::size_t i = 0; i < mean_hi.size(); ++i) {
      const double offset = 0.2 * std::sqrt(out.variances[heavy][i]);
      mean_hi[i] += offset;
      mean_lo[i] -= offset;
    }
    out.weights[heavy] *= 0.5;
    out.means[heavy] = std::move(mean_lo);
    out.weights.push_back(out.weights[heavy]);
    out.means.push_back(std::move(mean_hi));
    out.variances.push_back(out.variances[heavy]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// PhonemeHmm

PhonemeHmm::PhonemeHmm(Phoneme phoneme, std::vector<GaussianMixture> emissions,
                       double self_loop_prob)
    : phoneme_(phoneme), emissions_(std::move(emissions)) {
  require(!emissions_.empty(), "phoneme HMM needs at least one state");
  const int n = state_count();
  transitions_.assign(std::size_t(n) * (n + 1), kLogZero);
  for (int i = 0; i < n; ++i) set_transition_probs(i, self_loop_prob);
}

double PhonemeHmm::log_transition(int from, int to) const {
  const int n = state_count();
  if (from < 0 || from >= n || to < 0 || to > n) return kLogZero;
  return transitions_[std::size_t(from) * (n + 1) + to];
}

void PhonemeHmm::set_transition_probs(int state, double self_prob) {
  require(state >= 0 && state < state_count(), "state out of range");
  require(self_prob >= 0.0 && self_prob <= 1.0, "self-loop probability outside [0, 1]");
  const int n = state_count();
  transitions_[std::size_t(state) * (n + 1) + state] = safe_log(self_prob);
  transitions_[std::size_t(state) * (n + 1) + state + 1] = safe_log(1.0 - self_prob);
}

void PhonemeHmm::set_log_transitions(std::vector<double> matrix) {
  const int n = state_count();
  require(matrix.size() == std::size_t(n) * (n + 1), "transition matrix has wrong shape");
  transitions_ = std::move(matrix);
  validate();
}

void PhonemeHmm::validate(double variance_floor) const {
  const int n = state_count();
  require(n > 0, "phoneme HMM has no states");
  require(transitions_.size() == std::size_t(n) * (n + 1), "transition matrix has wrong shape");
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j <= n; ++j) {
      const double lp = log_transition(i, j);
      if (j != i && j != i + 1)
        require(is_log_zero(lp), "transition outside the left-to-right band");
      require(!std::isnan(lp) && lp <= 0.0, "transition log-probability above zero");
      row += std::exp(lp);
    }
    require(near_one(row), "transition row does not sum to one");
  }
  const int d = emissions_.front().dim();
  for (const auto& g : emissions_) {
    g.validate(variance_floor);
    require(g.dim() == d, "states differ in feature dimension");
  }
}

// ---------------------------------------------------------------------------
// AcousticModel

AcousticModel::AcousticModel(std::vector<PhonemeHmm> hmms, int feature_dim)
    : hmms_(std::move(hmms)), feature_dim_(feature_dim) {
  validate();
}

void AcousticModel::validate(double variance_floor) const {
  require(hmms_.size() == kPhonemeCount,
          "acoustic model needs exactly " + std::to_string(kPhonemeCount) + " phoneme HMMs");
  for (std::size_t i = 0; i < hmms_.size(); ++i) {
    require(index_of(hmms_[i].phoneme()) == i, "phoneme HMMs out of inventory order");
    hmms_[i].validate(variance_floor);
    if (hmms_[i].emission(0).dim() != feature_dim_)
      throw Error(ErrorCode::kDimensionMismatch,
                  "HMM for " + std::string(symbol(hmms_[i].phoneme())) +
                      " does not match the model feature dimension");
  }
  if (front_end_ && front_end_->feature_dim() != feature_dim_)
    throw Error(ErrorCode::kDimensionMismatch,
                "front end produces a different feature dimension than the model");
}

AcousticModel make_uniform_model(int state_count, const std::vector<double>& mean,
                                 const std::vector<double>& variance) {
  std::vector<PhonemeHmm> hmms;
  for (const auto& entry : PhonemeInventory::standard().entries()) {
    std::vector<GaussianMixture> states(std::size_t(state_count),
                                        GaussianMixture::single(mean, variance));
    hmms.emplace_back(entry.id, std::move(states));
  }
  return AcousticModel(std::move(hmms), int(mean.size()));
}

// ---------------------------------------------------------------------------
// Composite HMM and dynamic programming

double CompositeHmm::log_transition(std::size_t from, std::size_t to) const {
  if (from >= state_count()) return kLogZero;
  if (to == from) return log_self[from];
  if (to == from + 1) return log_next[from];
  return kLogZero;
}

CompositeHmm compose_word_hmm(const PhonemeSequence& phonemes, const AcousticModel& model) {
  if (phonemes.empty())
    throw Error(ErrorCode::kCompositionError, "cannot compose an empty transcript");
  CompositeHmm out;
  out.phonemes = phonemes;
  for (std::size_t pos = 0; pos < phonemes.size(); ++pos) {
    if (index_of(phonemes[pos]) >= model.hmms().size())
      throw Error(ErrorCode::kUnknownPhoneme,
                  "phoneme id " + std::to_string(index_of(phonemes[pos])) +
                      " has no HMM in the model");
    const auto& h = model.hmm(phonemes[pos]);
    for (int s = 0; s < h.state_count(); ++s) {
      out.emissions.push_back(h.emission(s));
      out.log_self.push_back(h.log_self(s));
      out.log_next.push_back(h.log_advance(s));
      out.position.push_back(pos);
      out.local_state.push_back(s);
    }
  }
  return out;
}

EmissionTable::EmissionTable(const CompositeHmm& hmm, const FeatureSequence& features)
    : frames_(features.size()), states_(hmm.state_count()) {
  const int d = hmm.dim();
  if (!features.empty() && features.feature_dim != d)
    throw Error(ErrorCode::kDimensionMismatch,
                "features of dimension " + std::to_string(features.feature_dim) +
                    " against a model of dimension " + std::to_string(d));
  data_.resize(frames_ * states_);
  std::vector<double> comps;
  for (std::size_t t = 0; t < frames_; ++t) {
    for (std::size_t j = 0; j < states_; ++j) {
      gmm_component_log_likelihoods(hmm.emissions[j], features.frames[t], comps);
      data_[t * states_ + j] = log_sum_exp(comps);
    }
  }
}

namespace {

using Trellis = std::vector<std::vector<double>>;

Trellis forward_trellis(const CompositeHmm& hmm, const EmissionTable& e) {
  const std::size_t T = e.frames(), N = e.states();
  Trellis alpha(T, std::vector<double>(N, kLogZero));
  alpha[0][0] = e(0, 0);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < N; ++j) {
      double v = alpha[t - 1][j] + hmm.log_self[j];
      if (j > 0) v = log_add(v, alpha[t - 1][j - 1] + hmm.log_next[j - 1]);
      alpha[t][j] = v + e(t, j);
    }
  }
  return alpha;
}

Trellis backward_trellis(const CompositeHmm& hmm, const EmissionTable& e) {
  const std::size_t T = e.frames(), N = e.states();
  Trellis beta(T, std::vector<double>(N, kLogZero));
  beta[T - 1][N - 1] = hmm.log_exit();
  for (std::size_t t = T - 1; t-- > 0;) {
    for (std::size_t j = 0; j < N; ++j) {
      double v = hmm.log_self[j] + e(t + 1, j) + beta[t + 1][j];
      if (j + 1 < N) v = log_add(v, hmm.log_next[j] + e(t + 1, j + 1) + beta[t + 1][j + 1]);
      beta[t][j] = v;
    }
  }
  return beta;
}

void check_features(const CompositeHmm& hmm, const FeatureSequence& features) {
  if (features.empty()) throw Error(ErrorCode::kEmptyInput, "no feature frames");
  if (features.feature_dim != hmm.dim())
    throw Error(ErrorCode::kDimensionMismatch,
                "features of dimension " + std::to_string(features.feature_dim) +
                    " against a model of dimension " + std::to_string(hmm.dim()));
}

}  // namespace

double forward_log_prob(const CompositeHmm& hmm, const EmissionTable& emissions) {
  if (emissions.frames() == 0) throw Error(ErrorCode::kEmptyInput, "no feature frames");
  if (emissions.frames() < emissions.states()) return kLogZero;
  const auto alpha = forward_trellis(hmm, emissions);
  return alpha.back().back() + hmm.log_exit();
}

double forward_log_prob(const CompositeHmm& hmm, const FeatureSequence& features) {
  check_features(hmm, features);
  return forward_log_prob(hmm, EmissionTable(hmm, features));
}

// ---------------------------------------------------------------------------
// Baum-Welch

namespace {

struct StateAccumulator {
  std::vector<double> occupancy;
  std::vector<std::vector<double>> sum;
  std::vector<std::vector<double>> sum_sq;
  double self_count = 0.0;
  double advance_count = 0.0;

  void init(std::size_t components, std::size_t dim) {
    occupancy.assign(components, 0.0);
    sum.assign(components, std::vector<double>(dim, 0.0));
    sum_sq.assign(components, std::vector<double>(dim, 0.0));
  }
};

void validate_corpus(std::span<const TrainingUtterance> corpus, int dim) {
  for (std::size_t u = 0; u < corpus.size(); ++u) {
    const auto& utt = corpus[u];
    if (utt.transcript.empty())
      throw Error(ErrorCode::kInvalidArgument,
                  "utterance " + std::to_string(u) + " has an empty transcript");
    if (utt.features.empty())
      throw Error(ErrorCode::kEmptyInput,
                  "utterance " + std::to_string(u) + " has no frames");
    if (utt.features.feature_dim != dim)
      throw Error(ErrorCode::kDimensionMismatch,
                  "utterance " + std::to_string(u) + " has feature dimension " +
                      std::to_string(utt.features.feature_dim));
  }
}

}  // namespace

EmStep baum_welch_iteration(const AcousticModel& model,
                            std::span<const TrainingUtterance> corpus,
                            double variance_floor) {
  validate_corpus(corpus, model.feature_dim());

  const std::size_t dim = std::size_t(model.feature_dim());
  std::vector<std::vector<StateAccumulator>> acc(kPhonemeCount);
  for (const auto& h : model.hmms()) {
    auto& row = acc[index_of(h.phoneme())];
    row.resize(std::size_t(h.state_count()));
    for (int s = 0; s < h.state_count(); ++s)
      row[std::size_t(s)].init(h.emission(s).component_count(), dim);
  }

  EmStep step;
  std::vector<double> comps;
  for (const auto& utt : corpus) {
    const CompositeHmm hmm = compose_word_hmm(utt.transcript, model);
    const std::size_t T = utt.features.size(), N = hmm.state_count();
    if (T < N) {
      ++step.skipped_utterances;
      continue;
    }
    const EmissionTable e(hmm, utt.features);
    const auto alpha = forward_trellis(hmm, e);
    const auto beta = backward_trellis(hmm, e);
    const double total = alpha[T - 1][N - 1] + hmm.log_exit();
    if (is_log_zero(total)) {
      ++step.skipped_utterances;
      continue;
    }
    step.total_log_likelihood += total;

    for (std::size_t t = 0; t < T; ++t) {
      const auto& x = utt.features.frames[t];
      for (std::size_t j = 0; j < N; ++j) {
        const double log_gamma = alpha[t][j] + beta[t][j] - total;
        if (is_log_zero(log_gamma)) continue;
        auto& a = acc[index_of(hmm.phonemes[hmm.position[j]])][std::size_t(hmm.local_state[j])];

        gmm_component_log_likelihoods(hmm.emissions[j], x, comps);
        for (std::size_t k = 0; k < comps.size(); ++k) {
          const double post = std::exp(log_gamma + comps[k] - e(t, j));
          if (post == 0.0) continue;
          a.occupancy[k] += post;
          for (std::size_t i = 0; i < dim; ++i) {
            a.sum[k][i] += post * x[i];
            a.sum_sq[k][i] += post * x[i] * x[i];
          }
        }

        if (t + 1 < T) {
          a.self_count += std::exp(alpha[t][j] + hmm.log_self[j] + e(t + 1, j) +
                                   beta[t + 1][j] - total);
          if (j + 1 < N)
            a.advance_count += std::exp(alpha[t][j] + hmm.log_next[j] + e(t + 1, j + 1) +
                                        beta[t + 1][j + 1] - total);
        } else if (j + 1 == N) {
          a.advance_count += std::exp(alpha[t][j] + hmm.log_exit() - total);
        }
      }
    }
  }

  step.model = model;
  for (const auto& h : model.hmms()) {
    PhonemeHmm& out = step.model.mutable_hmm(h.phoneme());
    for (int s = 0; s < h.state_count(); ++s) {
      const auto& a = acc[index_of(h.phoneme())][std::size_t(s)];
      GaussianMixture& g = out.mutable_emission(s);
      double occ = 0.0;
      for (double o : a.occupancy) occ += o;
      if (occ > 0.0) {
        for (std::size_t k = 0; k < g.component_count(); ++k) {
          g.weights[k] = a.occupancy[k] / occ;
          if (a.occupancy[k] <= 0.0) continue;
          for (std::size_t i = 0; i < dim; ++i) {
            const double mean = a.sum[k][i] / a.occupancy[k];
            const double var = a.sum_sq[k][i] / a.occupancy[k] - mean * mean;
            g.means[k][i] = mean;
            g.variances[k][i] = std::max(var, variance_floor);
          }
        }
      }
      const double leave = a.self_count + a.advance_count;
      if (leave > 0.0) out.set_transition_probs(s, a.self_count / leave);
    }
  }
  return step;
}

double corpus_log_likelihood(const AcousticModel& model,
                             std::span<const TrainingUtterance> corpus) {
  validate_corpus(corpus, model.feature_dim());
  double total = 0.0;
  for (const auto& utt : corpus) {
    const CompositeHmm hmm = compose_word_hmm(utt.transcript, model);
    if (utt.features.size() < hmm.state_count()) continue;
    total += forward_log_prob(hmm, EmissionTable(hmm, utt.features));
  }
  return total;
}

std::vector<Phoneme> uncovered_phonemes(std::span<const TrainingUtterance> corpus) {
  std::set<Phoneme> seen;
  for (const auto& utt : corpus) seen.insert(utt.transcript.begin(), utt.transcript.end());
  std::vector<Phoneme> out;
  for (const auto& entry : PhonemeInventory::standard().entries())
    if (!seen.count(entry.id)) out.push_back(entry.id);
  return out;
}

AcousticModel flat_start(std::span<const TrainingUtterance> corpus,
                         const TrainingConfig& config) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "training corpus is empty");
  const int dim = corpus.front().features.feature_dim;
  validate_corpus(corpus, dim);
  require(config.state_count >= 1, "state_count must be positive");

  std::vector<double> mean(std::size_t(dim), 0.0), var(std::size_t(dim), 0.0);
  double frames = 0.0;
  for (const auto& utt : corpus)
    for (const auto& x : utt.features.frames) {
      frames += 1.0;
      for (int i = 0; i < dim; ++i) mean[i] += x[i];
    }
  for (auto& m : mean) m /= frames;
  for (const auto& utt : corpus)
    for (const auto& x : utt.features.frames)
      for (int i = 0; i < dim; ++i) var[i] += (x[i] - mean[i]) * (x[i] - mean[i]);
  for (auto& v : var) v = std::max(v / frames, config.variance_floor);

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::vector<PhonemeHmm> hmms;
  for (const auto& entry : PhonemeInventory::standard().entries()) {
    std::vector<GaussianMixture> states;
    for (int s = 0; s < config.state_count; ++s) {
      auto m = mean;
      for (int i = 0; i < dim; ++i) m[i] += 0.01 * unit(rng) * std::sqrt(var[i]);
      states.push_back(GaussianMixture::single(std::move(m), var));
    }
    hmms.emplace_back(entry.id, std::move(states), 0.5);
  }
  return AcousticModel(std::move(hmms), dim);
}

TrainingResult train_acoustic_model(std::span<const TrainingUtterance> corpus,
                                    const TrainingConfig& config) {
  require(config.iterations >= 0, "iterations must be non-negative");
  require(config.mixtures >= 1, "mixtures must be positive");
  TrainingResult result;
  result.model = flat_start(corpus, config);
  result.uncovered = uncovered_phonemes(corpus);

  const int split_at = config.mixtures > 1 ? config.iterations / 2 : -1;
  for (int it = 0; it < config.iterations; ++it) {
    if (it == split_at) {
      for (const auto& entry : result.model.inventory().entries()) {
        auto& h = result.model.mutable_hmm(entry.id);
        for (int s = 0; s < h.state_count(); ++s)
          h.mutable_emission(s) =
              split_components(h.emission(s), std::size_t(config.mixtures));
      }
    }
    EmStep step = baum_welch_iteration(result.model, corpus, config.variance_floor);
    result.log_likelihood_history.push_back(step.total_log_likelihood);
    result.model = std::move(step.model);
  }
  result.final_log_likelihood = corpus_log_likelihood(result.model, corpus);
  result.flat_start_log_likelihood = result.log_likelihood_history.empty()
                                         ? result.final_log_likelihood
                                         : result.log_likelihood_history.front();
  result.model.set_score_stats(
      score_statistics(result.model, corpus, config.min_score_stddev));
  return result;
}

std::map<Phoneme, ScoreStats> score_statistics(const AcousticModel& model,
                                               std::span<const TrainingUtterance> corpus,
                                               double min_stddev) {
  std::map<Phoneme, std::vector<double>> scores;
  for (const auto& utt : corpus) {
    const CompositeHmm hmm = compose_word_hmm(utt.transcript, model);
    if (utt.features.size() < hmm.state_count()) continue;
    const EmissionTable e(hmm, utt.features);
    ViterbiResult best;
    try {
      best = viterbi(hmm, e);
    } catch (const Error& err) {
      if (err.code() == ErrorCode::kNoValidPath) continue;
      throw;
    }
    const auto& path = best.state_path;
    for (std::size_t t = 0; t < path.size(); ++t) {
      const auto j = std::size_t(path[t]);
      double s = e(t, j);
      if (t + 1 < path.size() && hmm.position[std::size_t(path[t + 1])] == hmm.position[j])
        s += hmm.log_transition(j, std::size_t(path[t + 1]));
      scores[hmm.phonemes[hmm.position[j]]].push_back(s);
    }
  }

  std::map<Phoneme, ScoreStats> out;
  for (const auto& [p, v] : scores) {
    double mean = 0.0;
    for (double s : v) mean += s;
    mean /= double(v.size());
    double var = 0.0;
    for (double s : v) var += (s - mean) * (s - mean);
    var /= double(v.size());
    out[p] = ScoreStats{mean, std::max(std::sqrt(var), min_stddev), v.size()};
  }
  return out;
}

}  // namespace arcall
