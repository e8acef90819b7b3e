// Copyright 2026 The DRLM Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "drlm/model.hpp"

namespace drlm {

// Probability vector over the Z relation labels of one slot.
struct RelationDistribution {
  std::vector<double> probs;

  // Index of the largest entry; exact ties go to the lowest label.
  int argmax() const;
  double total() const;
};

// Builds a distribution from unnormalized log-scores (normalized by logsumexp).
RelationDistribution from_log_scores(std::span<const double> log_scores);

// Relation posterior p(z | y_t, y_{t-1}) of one sentence given the previous
// context vector (c_0 for the first slot). Model I (drlm variant) only.
RelationDistribution relation_posterior(const DrlmParams& params, std::span<const int> sentence,
                                        const Tensor& c_prev);

// Per-slot posteriors of a whole document. For drlm-model2 these are the
// exact marginals from enumeration.
std::vector<RelationDistribution> slot_posteriors(const DrlmParams& params, const Document& doc);

// Per-slot argmax of slot_posteriors.
std::vector<int> tag_document(const DrlmParams& params, const Document& doc);

// log p(y_{1:T}) with relations summed out per slot; any labels in `doc` are
// ignored. drlm-model2 goes through exact enumeration.
double marginal_log_likelihood(const DrlmParams& params, const Document& doc);

// log p(y_{1:T}, z_{1:T}) for the labels stored in `doc`.
double document_joint_log_prob(const DrlmParams& params, const Document& doc);
double document_joint_log_prob(const DrlmParams& params, const Document& doc,
                               std::span<const int> labels);

// Context vectors c_0, c_1, ..., c_{T-1} seen by each slot (Model I family).
std::vector<Tensor> context_chain(const DrlmParams& params, const Document& doc);

// ---- drlm-model2 -------------------------------------------------------

// Recurrent state carried between sentences plus the context that feeds the
// next relation prior.
struct Model2State {
  Tensor h;
  Tensor c_mem;
  Tensor context;
};

Model2State model2_initial_state(const DrlmParams& params);
// Log relation prior at a state (length Z).
std::vector<double> model2_log_prior(const DrlmParams& params, const Model2State& state);

struct Model2Extension {
  double sentence_log_prob = 0.0;
  Model2State next;
};
// Runs one sentence under relation z from `state`.
Model2Extension model2_extend(const DrlmParams& params, const Model2State& state,
                              std::span<const int> sentence, int z);

inline constexpr std::uint64_t kMaxEnumeration = 1'000'000;

struct ExactModel2 {
  double log_marginal = 0.0;
  std::vector<RelationDistribution> slot_marginals;
  std::uint64_t sequences = 0;
};

// Brute-force sum over all Z^T relation sequences. Throws std::invalid_argument
// when Z^T exceeds kMaxEnumeration.
ExactModel2 enumerate_exact_model2(const DrlmParams& params, const Document& doc);

// ---- sequential Monte Carlo ---------------------------------------------

enum class Proposal { kPrior, kUniform };

struct SmcConfig {
  std::size_t particles = 1000;
  Proposal proposal = Proposal::kPrior;
  double resample_threshold = 0.5;  // resample when ESS < threshold * N
  std::uint64_t seed = 0;
};

struct ParticleSet {
  std::vector<std::vector<int>> paths;  // relation prefixes z_{<=t}
  std::vector<double> weights;          // normalized

  double ess() const;
};

struct SmcTrajectory {
  ParticleSet particles;  // after the final step
  // log Σ_n W_{t-1}^(n) u_t^(n) per step, W normalized before reweighting.
  std::vector<double> log_increments;
  // Weighted relation marginal of slot t right after reweighting at step t.
  std::vector<RelationDistribution> slot_filter;
  std::vector<double> ess;         // before any resampling at step t
  std::vector<bool> resampled;
  // Weighted mean of log p(y, z^(n)) over the final particles.
  double averaged_complete_log_likelihood = 0.0;
};

SmcTrajectory smc_sample(const DrlmParams& params, const Document& doc, const SmcConfig& config);

// Σ_t log Σ_n W_{t-1}^(n) u_t^(n): the log of the standard unbiased estimate of
// p(y_{1:T}). Reduces to Σ_t log((1/N) Σ_n u_t^(n)) when resampling every step.
double smc_log_marginal(const SmcTrajectory& trajectory);

}  // namespace drlm
