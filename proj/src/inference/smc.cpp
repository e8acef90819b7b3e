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

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <stdexcept>
#include <string>

#include "drlm/inference.hpp"

namespace drlm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Supplies log p(z_t | prefix) and log p(y_t | z_t, prefix) for a particle.
class SlotScorer {
 public:
  SlotScorer(const DrlmParams& params, const Document& doc) : params_(params), doc_(doc) {
    if (params.variant == Variant::kDrlm) {
      Tape tape;
      ModelGraph graph(tape, params);
      for (const auto& slot : graph.score_document(doc, nullptr, true)) {
        const Tensor& prior = tape.value(slot.log_prior);
        std::vector<double> lp(prior.values().begin(), prior.values().end());
        std::vector<double> sent;
        for (Var v : slot.sentence_lp) sent.push_back(tape.scalar(v));
        priors_.push_back(std::move(lp));
        sentence_.push_back(std::move(sent));
      }
    } else if (params.variant != Variant::kModel2) {
      throw std::invalid_argument(std::string(variant_name(params.variant)) +
                                  " has no relation labels to sample");
    }
  }

  const std::vector<double>& log_prior(const std::vector<int>& prefix) {
    const std::size_t t = prefix.size();
    if (params_.variant == Variant::kDrlm) return priors_[t];
    Node& node = lookup(prefix);
    if (node.log_prior.empty()) node.log_prior = model2_log_prior(params_, node.state);
    return node.log_prior;
  }

  // log p(y_t | z_t = prefix.back(), prefix).
  double sentence_log_prob(const std::vector<int>& prefix) {
    const std::size_t t = prefix.size() - 1;
    if (params_.variant == Variant::kDrlm) return sentence_[t][prefix.back()];
    return lookup(prefix).sentence_lp;
  }

 private:
  struct Node {
    Model2State state;
    double sentence_lp = 0.0;
    std::vector<double> log_prior;
  };

  // Prefix cache: identical prefixes (common after resampling) share one evaluation.
  Node& lookup(const std::vector<int>& prefix) {
    auto it = cache_.find(prefix);
    if (it != cache_.end()) return it->second;
    Node node;
    if (prefix.empty()) {
      node.state = model2_initial_state(params_);
    } else {
      std::vector<int> parent(prefix.begin(), prefix.end() - 1);
      const Model2State parent_state = lookup(parent).state;
      auto ext = model2_extend(params_, parent_state, doc_.sentences[prefix.size() - 1],
                               prefix.back());
      node.state = std::move(ext.next);
      node.sentence_lp = ext.sentence_log_prob;
    }
    return cache_.emplace(prefix, std::move(node)).first->second;
  }

  const DrlmParams& params_;
  const Document& doc_;
  std::vector<std::vector<double>> priors_;
  std::vector<std::vector<double>> sentence_;
  std::map<std::vector<int>, Node> cache_;
};

int sample_index(std::span<const double> probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  // u landed in the rounding gap above the cumulative sum; take the last
  // index with positive mass.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return static_cast<int>(i);
  }
  return 0;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, std::mt19937_64& rng) {
  const std::size_t n = weights.size();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double offset = unif(rng) / static_cast<double>(n);
  std::vector<std::size_t> picks(n);
  double cumulative = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double point = offset + static_cast<double>(i) / static_cast<double>(n);
    while (point >= cumulative && j + 1 < n) cumulative += weights[++j];
    picks[i] = j;
  }
  return picks;
}

}  // namespace

double ParticleSet::ess() const {
  double sq = 0.0;
  for (double w : weights) sq += w * w;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

SmcTrajectory smc_sample(const DrlmParams& params, const Document& doc, const SmcConfig& config) {
  if (config.particles == 0) throw std::invalid_argument("SMC needs at least one particle");
  if (!(config.resample_threshold >= 0.0 && config.resample_threshold <= 1.0)) {
    throw std::invalid_argument("resample threshold must lie in [0, 1]");
  }
  check_document(doc, params.dims);
  SlotScorer scorer(params, doc);

  const std::size_t N = config.particles;
  const std::size_t Z = params.dims.Z;
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  SmcTrajectory traj;
  ParticleSet& set = traj.particles;
  set.paths.assign(N, {});
  set.weights.assign(N, 1.0 / static_cast<double>(N));
  std::vector<double> complete_ll(N, 0.0);
  std::vector<double> log_w(N);
  std::vector<double> q(Z);

  for (std::size_t t = 0; t < doc.size(); ++t) {
    for (std::size_t n = 0; n < N; ++n) {
      auto& path = set.paths[n];
      const std::vector<double>& prior = scorer.log_prior(path);
      double log_q = 0.0;
      int z = 0;
      if (config.proposal == Proposal::kPrior) {
        for (std::size_t k = 0; k < Z; ++k) q[k] = std::exp(prior[k]);
        z = sample_index(q, unif(rng));
        log_q = prior[z];
      } else {
        z = static_cast<int>(std::min<std::size_t>(Z - 1, static_cast<std::size_t>(unif(rng) * Z)));
        log_q = -std::log(static_cast<double>(Z));
      }
      path.push_back(z);
      const double joint_step = prior[z] + scorer.sentence_log_prob(path);
      complete_ll[n] += joint_step;
      // u_t = p_t(z_{<=t}) / (p_{t-1}(z_{<t}) q(z_t | z_{<t}))
      log_w[n] = std::log(set.weights[n]) + joint_step - log_q;
    }

    double m = kNegInf;
    for (double lw : log_w) m = std::max(m, lw);
    if (m == kNegInf || std::isnan(m)) {
      throw std::runtime_error("all particles have zero weight at slot " + std::to_string(t));
    }
    double total = 0.0;
    for (double lw : log_w) total += std::exp(lw - m);
    traj.log_increments.push_back(m + std::log(total));
    for (std::size_t n = 0; n < N; ++n) set.weights[n] = std::exp(log_w[n] - m) / total;

    RelationDistribution filter;
    filter.probs.assign(Z, 0.0);
    for (std::size_t n = 0; n < N; ++n) filter.probs[set.paths[n].back()] += set.weights[n];
    traj.slot_filter.push_back(std::move(filter));

    const double ess = set.ess();
    traj.ess.push_back(ess);
    const bool resample = ess < config.resample_threshold * static_cast<double>(N);
    traj.resampled.push_back(resample);
    if (resample) {
      const auto picks = systematic_resample(set.weights, rng);
      std::vector<std::vector<int>> paths(N);
      std::vector<double> ll(N);
      for (std::size_t n = 0; n < N; ++n) {
        paths[n] = set.paths[picks[n]];
        ll[n] = complete_ll[picks[n]];
      }
      set.paths = std::move(paths);
      complete_ll = std::move(ll);
      set.weights.assign(N, 1.0 / static_cast<double>(N));
    }
  }

  traj.averaged_complete_log_likelihood = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    traj.averaged_complete_log_likelihood += set.weights[n] * complete_ll[n];
  }
  return traj;
}

double smc_log_marginal(const SmcTrajectory& trajectory) {
  double total = 0.0;
  for (double inc : trajectory.log_increments) total += inc;
  return total;
}

}  // namespace drlm
