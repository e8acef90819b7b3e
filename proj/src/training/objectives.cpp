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

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "drlm/training.hpp"

namespace drlm {
namespace {

inline constexpr std::uint64_t kMaxConditionalSequences = 4096;

// −log p(z_{1:T} | y_{1:T}) for drlm-model2, summing the joint over every
// relation sequence on the tape.
Var model2_conditional(ModelGraph& graph, const Document& doc, Dropout* dropout) {
  Tape& tape = graph.tape();
  const std::size_t T = doc.size();
  const std::size_t Z = graph.dims().Z;
  std::uint64_t count = 1;
  for (std::size_t t = 0; t < T; ++t) {
    count *= Z;
    if (count > kMaxConditionalSequences) {
      throw std::invalid_argument("conditional objective for drlm-model2 enumerates Z^T sequences; " +
                                  std::to_string(Z) + "^" + std::to_string(T) + " is too many");
    }
  }
  std::vector<Var> leaves;
  Var observed;
  std::vector<int> path(T);

  auto visit = [&](auto&& self, std::size_t t, const RecurrentState& state, Var c_prev,
                   Var logp) -> void {
    if (t == T) {
      leaves.push_back(logp);
      bool match = true;
      for (std::size_t s = 0; s < T; ++s) match = match && path[s] == doc.relations[s];
      if (match) observed = logp;
      return;
    }
    const Var c_used = dropout != nullptr ? dropout->apply(tape, c_prev) : c_prev;
    const Var log_prior = graph.relation_log_prior(c_used);
    for (std::size_t z = 0; z < Z; ++z) {
      path[t] = static_cast<int>(z);
      const SentencePass pass =
          graph.encode_sentence(doc.sentences[t], dropout, &state, static_cast<int>(z));
      const Var step = tape.add(tape.pick(log_prior, z),
                                graph.sentence_log_prob(pass, doc.sentences[t], Var{},
                                                        static_cast<int>(z)));
      self(self, t + 1, pass.run.final, pass.context, logp.valid() ? tape.add(logp, step) : step);
    }
  };
  visit(visit, 0, zero_state(tape, graph.dims().H), graph.default_context(), Var{});
  return tape.sub(tape.logsumexp(tape.concat(leaves)), observed);
}

void require_labels(const Document& doc) {
  for (std::size_t t = 0; t < doc.relations.size(); ++t) {
    if (doc.relations[t] == kNoLabel) {
      throw std::invalid_argument("slot " + std::to_string(t) + " has no relation label");
    }
  }
}

}  // namespace

std::string_view objective_name(Objective o) {
  return o == Objective::kJoint ? "joint" : "conditional";
}

std::optional<Objective> objective_from_name(std::string_view name) {
  if (name == "joint") return Objective::kJoint;
  if (name == "conditional") return Objective::kConditional;
  return std::nullopt;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (!(clip > 0.0)) throw std::invalid_argument("clip threshold must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must lie in [0, 1)");
  if (max_epochs < 1) throw std::invalid_argument("max epochs must be at least 1");
  if (!(adagrad_epsilon > 0.0)) throw std::invalid_argument("AdaGrad epsilon must be positive");
}

DrlmParams init_params(const ModelDims& dims, Variant variant, std::uint64_t seed) {
  DrlmParams params = allocate_params(dims, variant);
  std::mt19937_64 rng(seed);
  for (Parameter* p : params.all()) {
    if (p->name == "b" || p->name == "c_0") continue;
    const double range =
        p->name == "U" ? 1e-5
                       : std::sqrt(6.0 / static_cast<double>(p->value.rows() + p->value.cols()));
    std::uniform_real_distribution<double> unif(-range, range);
    for (double& v : p->value.values()) v = unif(rng);
  }
  return params;
}

Var joint_objective(ModelGraph& graph, const Document& doc, Dropout* dropout) {
  if (has_relations(graph.variant())) require_labels(doc);
  return graph.tape().scale(graph.joint_log_prob(doc, doc.relations, dropout), -1.0);
}

Var conditional_objective(ModelGraph& graph, const Document& doc, Dropout* dropout,
                          bool include_dummy) {
  if (!has_relations(graph.variant())) {
    throw std::invalid_argument(std::string(variant_name(graph.variant())) +
                                " has no relations; the conditional objective needs them");
  }
  require_labels(doc);
  check_document(doc, graph.dims());
  Tape& tape = graph.tape();
  if (graph.variant() == Variant::kModel2) return model2_conditional(graph, doc, dropout);

  const auto slots = graph.score_document(doc, dropout, true);
  std::vector<Var> terms;
  for (std::size_t t = 0; t < slots.size(); ++t) {
    if (!include_dummy && doc.relations[t] == kDummyLabel) continue;
    // log p(z|c) + log p(y|z,c) - log Σ_z' p(z'|c) p(y|z',c) == log posterior(z)
    const Var scores = tape.add(slots[t].log_prior, tape.concat(slots[t].sentence_lp));
    terms.push_back(tape.pick_log_prob(scores, static_cast<std::size_t>(doc.relations[t])));
  }
  if (terms.empty()) return tape.constant(Tensor::scalar(0.0));
  const Var total = terms.size() == 1 ? terms[0] : tape.sum(tape.concat(terms));
  return tape.scale(total, -1.0);
}

Var objective(ModelGraph& graph, const Document& doc, Dropout* dropout, const TrainConfig& config) {
  if (config.objective == Objective::kJoint) return joint_objective(graph, doc, dropout);
  return conditional_objective(graph, doc, dropout, config.conditional_includes_dummy);
}

}  // namespace drlm
