// arcall/acoustic.h

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
   GMM-HMM acoustic models: one left-to-right HMM per phoneme of the
   44-symbol inventory, diagonal-covariance Gaussian-mixture emissions, and
   Baum-Welch training from phoneme-transcribed feature sequences.

   All probabilities are natural logs. A phoneme HMM with n emitting states
   has an n x (n+1) transition matrix; column n is the exit. Only (i, i) and
   (i, i+1) are finite.

   Words are scored on a composite HMM: the phoneme HMMs of the transcript
   chained left to right, where the exit of phoneme k enters phoneme k+1.
   A path must start in the first state and leave through the exit of the
   last state after the final frame.
 */

#ifndef ARCALL_ACOUSTIC_H_
#define ARCALL_ACOUSTIC_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "arcall/audio.h"
#include "arcall/lexicon.h"

namespace arcall {

inline constexpr double kDefaultVarianceFloor = 1e-4;

struct GaussianMixture {
  std::vector<double> weights;
  std::vector<std::vector<double>> means;
  std::vector<std::vector<double>> variances;  // diagonal

  static GaussianMixture single(std::vector<double> mean, std::vector<double> variance);

  std::size_t component_count() const { return weights.size(); }
  int dim() const { return means.empty() ? 0 : int(means.front().size()); }

  // Throws kInvalidArgument on unnormalized weights, ragged shapes or
  // variances below `variance_floor`.
  void validate(double variance_floor = 0.0) const;
};

double gmm_log_likelihood(const GaussianMixture& gmm, std::span<const double> x);

// log(w_k) + log N(x; mu_k, sigma_k) per component.
void gmm_component_log_likelihoods(const GaussianMixture& gmm, std::span<const double> x,
                                   std::vector<double>& out);

// Repeatedly splits the heaviest component into two halves with means moved
// by +-0.2 standard deviations until `target` components exist.
GaussianMixture split_components(const GaussianMixture& gmm, std::size_t target);

class PhonemeHmm {
 public:
  PhonemeHmm() = default;

  // Left-to-right model with every self-loop set to `self_loop_prob`.
  PhonemeHmm(Phoneme phoneme, std::vector<GaussianMixture> emissions,
             double self_loop_prob = 0.5);

  Phoneme phoneme() const { return phoneme_; }
  int state_count() const { return int(emissions_.size()); }

  // Column state_count() is the exit.
  double log_transition(int from, int to) const;
  void set_transition_probs(int state, double self_prob);

  double log_self(int state) const { return log_transition(state, state); }
  double log_advance(int state) const { return log_transition(state, state + 1); }

  const GaussianMixture& emission(int state) const { return emissions_.at(state); }
  GaussianMixture& mutable_emission(int state) { return emissions_.at(state); }
  const std::vector<GaussianMixture>& emissions() const { return emissions_; }

  // Rebuilds from a full matrix (n x (n+1), log domain); topology is checked.
  void set_log_transitions(std::vector<double> matrix);
  const std::vector<double>& log_transitions() const { return transitions_; }

  void validate(double variance_floor = 0.0) const;

 private:
  Phoneme phoneme_ = Phoneme::SIL;
  std::vector<double> transitions_;
  std::vector<GaussianMixture> emissions_;
};

// Mean and standard deviation of per-frame forced-alignment scores.
struct ScoreStats {
  double mean = 0.0;
  double stddev = 1.0;
  std::size_t frames = 0;
};

class AcousticModel {
 public:
  AcousticModel() = default;

  // `hmms` must hold exactly one model per inventory phoneme, in inventory
  // order, all with emissions of dimension `feature_dim`.
  AcousticModel(std::vector<PhonemeHmm> hmms, int feature_dim);

  const PhonemeInventory& inventory() const { return PhonemeInventory::standard(); }
  int feature_dim() const { return feature_dim_; }

  const PhonemeHmm& hmm(Phoneme p) const { return hmms_.at(index_of(p)); }
  PhonemeHmm& mutable_hmm(Phoneme p) { return hmms_.at(index_of(p)); }
  const std::vector<PhonemeHmm>& hmms() const { return hmms_; }

  const std::map<Phoneme, ScoreStats>& score_stats() const { return score_stats_; }
  void set_score_stats(std::map<Phoneme, ScoreStats> stats) { score_stats_ = std::move(stats); }

  // Front end the features were computed with; absent for models trained on
  // raw feature vectors.
  const std::optional<FrameParams>& front_end() const { return front_end_; }
  void set_front_end(std::optional<FrameParams> params) { front_end_ = std::move(params); }

  void validate(double variance_floor = 0.0) const;

 private:
  std::vector<PhonemeHmm> hmms_;
  int feature_dim_ = 0;
  std::map<Phoneme, ScoreStats> score_stats_;
  std::optional<FrameParams> front_end_;
};

// Every phoneme gets `state_count` states with one Gaussian N(mean, variance).
AcousticModel make_uniform_model(int state_count, const std::vector<double>& mean,
                                 const std::vector<double>& variance);

struct CompositeHmm {
  PhonemeSequence phonemes;
  std::vector<GaussianMixture> emissions;
  std::vector<double> log_self;
  std::vector<double> log_next;  // last entry is the exit
  std::vector<std::size_t> position;  // transcript index of each state
  std::vector<int> local_state;       // state index inside its phoneme HMM

  std::size_t state_count() const { return emissions.size(); }
  int dim() const { return emissions.empty() ? 0 : emissions.front().dim(); }
  double log_exit() const { return log_next.back(); }

  // log a(i -> j); kLogZero outside the left-to-right band.
  double log_transition(std::size_t from, std::size_t to) const;
};

CompositeHmm compose_word_hmm(const PhonemeSequence& phonemes, const AcousticModel& model);

// Frame-by-state emission log-likelihoods.
class EmissionTable {
 public:
  EmissionTable(const CompositeHmm& hmm, const FeatureSequence& features);

  std::size_t frames() const { return frames_; }
  std::size_t states() const { return states_; }
  double operator()(std::size_t t, std::size_t j) const { return data_[t * states_ + j]; }

 private:
  std::size_t frames_;
  std::size_t states_;
  std::vector<double> data_;
};

double forward_log_prob(const CompositeHmm& hmm, const FeatureSequence& features);
double forward_log_prob(const CompositeHmm& hmm, const EmissionTable& emissions);

struct TrainingUtterance {
  FeatureSequence features;
  PhonemeSequence transcript;
};

struct EmStep {
  AcousticModel model;
  double total_log_likelihood = 0.0;  // under the input model
  std::size_t skipped_utterances = 0;  // shorter than their composite HMM
};

EmStep baum_welch_iteration(const AcousticModel& model,
                            std::span<const TrainingUtterance> corpus,
                            double variance_floor = kDefaultVarianceFloor);

struct TrainingConfig {
  int iterations = 8;
  int state_count = 3;
  int mixtures = 1;
  double variance_floor = kDefaultVarianceFloor;
  double min_score_stddev = 0.1;
  std::uint64_t seed = 20130101;
};

struct TrainingResult {
  AcousticModel model;
  double flat_start_log_likelihood = 0.0;
  double final_log_likelihood = 0.0;
  std::vector<double> log_likelihood_history;  // one per iteration, pre-update
  std::vector<Phoneme> uncovered;              // inventory phonemes absent from the corpus
};

// Sum of forward log-probabilities; utterances shorter than their composite
// HMM are skipped.
double corpus_log_likelihood(const AcousticModel& model,
                             std::span<const TrainingUtterance> corpus);

std::vector<Phoneme> uncovered_phonemes(std::span<const TrainingUtterance> corpus);

// Global mean/variance for every state, means perturbed by a seeded +-1% of
// the global standard deviation, self-loops 0.5.
AcousticModel flat_start(std::span<const TrainingUtterance> corpus,
                         const TrainingConfig& config);

TrainingResult train_acoustic_model(std::span<const TrainingUtterance> corpus,
                                    const TrainingConfig& config = {});

// Per-phoneme statistics of per-frame scores under Viterbi forced alignment.
std::map<Phoneme, ScoreStats> score_statistics(const AcousticModel& model,
                                               std::span<const TrainingUtterance> corpus,
                                               double min_stddev = 0.1);

}  // namespace arcall

#endif  // ARCALL_ACOUSTIC_H_
