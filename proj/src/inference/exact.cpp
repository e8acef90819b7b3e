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
#include <stdexcept>
#include <string>
#include <utility>

#include "drlm/inference.hpp"

namespace drlm {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double logsumexp(std::span<const double> v) {
  double m = kNegInf;
  for (double x : v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void require_relations(const DrlmParams& params) {
  if (!has_relations(params.variant)) {
    throw std::invalid_argument(std::string(variant_name(params.variant)) +
                                " has no relation labels");
  }
}

// Per-slot log p(z, y_t | y_{t-1}) for every z (Model I family).
std::vector<std::vector<double>> slot_log_joints(const DrlmParams& params, const Document& doc) {
  Tape tape;
  ModelGraph graph(tape, params);
  const auto slots = graph.score_document(doc, nullptr, true);
  std::vector<std::vector<double>> out;
  out.reserve(slots.size());
  for (const auto& slot : slots) {
    std::vector<double> row;
    if (slot.log_prior.valid()) {
      const Tensor& prior = tape.value(slot.log_prior);
      for (std::size_t z = 0; z < slot.sentence_lp.size(); ++z) {
        row.push_back(prior[z] + tape.scalar(slot.sentence_lp[z]));
      }
    } else {
      row.push_back(tape.scalar(slot.sentence_lp[0]));
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

int RelationDistribution::argmax() const {
  if (probs.empty()) throw std::invalid_argument("argmax of an empty distribution");
  // max_element returns the first maximal element, i.e. the lowest label on ties.
  return static_cast<int>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

double RelationDistribution::total() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

RelationDistribution from_log_scores(std::span<const double> log_scores) {
  const double lse = logsumexp(log_scores);
  if (!std::isfinite(lse)) throw std::domain_error("relation scores have no finite mass");
  RelationDistribution d;
  d.probs.reserve(log_scores.size());
  for (double s : log_scores) d.probs.push_back(std::exp(s - lse));
  return d;
}

RelationDistribution relation_posterior(const DrlmParams& params, std::span<const int> sentence,
                                        const Tensor& c_prev) {
  if (params.variant != Variant::kDrlm) {
    throw std::invalid_argument("relation_posterior applies to the drlm variant");
  }
  Tape tape;
  ModelGraph graph(tape, params);
  const Var c = tape.constant_ref(c_prev);
  const SentencePass pass = graph.encode_sentence(sentence, nullptr);
  const Tensor log_prior = tape.value(graph.relation_log_prior(c));
  std::vector<double> scores(params.dims.Z);
  for (std::size_t z = 0; z < scores.size(); ++z) {
    scores[z] = log_prior[z] + tape.scalar(graph.sentence_log_prob(pass, sentence, c,
                                                                   static_cast<int>(z)));
  }
  return from_log_scores(scores);
}

std::vector<Tensor> context_chain(const DrlmParams& params, const Document& doc) {
  if (params.variant == Variant::kModel2 || params.variant == Variant::kRnnlm) {
    throw std::invalid_argument("context chain is defined for dclm and drlm");
  }
  check_document(doc, params.dims);
  Tape tape;
  ModelGraph graph(tape, params);
  std::vector<Tensor> chain;
  chain.push_back(tape.value(graph.default_context()));
  for (std::size_t t = 0; t + 1 < doc.size(); ++t) {
    chain.push_back(tape.value(graph.encode_sentence(doc.sentences[t], nullptr).context));
  }
  return chain;
}

std::vector<RelationDistribution> slot_posteriors(const DrlmParams& params, const Document& doc) {
  require_relations(params);
  if (params.variant == Variant::kModel2) return enumerate_exact_model2(params, doc).slot_marginals;
  std::vector<RelationDistribution> out;
  for (const auto& row : slot_log_joints(params, doc)) out.push_back(from_log_scores(row));
  return out;
}

std::vector<int> tag_document(const DrlmParams& params, const Document& doc) {
  std::vector<int> labels;
  for (const auto& d : slot_posteriors(params, doc)) labels.push_back(d.argmax());
  return labels;
}

double marginal_log_likelihood(const DrlmParams& params, const Document& doc) {
  if (params.variant == Variant::kModel2) return enumerate_exact_model2(params, doc).log_marginal;
  double total = 0.0;
  for (const auto& row : slot_log_joints(params, doc)) total += logsumexp(row);
  return total;
}

double document_joint_log_prob(const DrlmParams& params, const Document& doc) {
  return document_joint_log_prob(params, doc, doc.relations);
}

double document_joint_log_prob(const DrlmParams& params, const Document& doc,
                               std::span<const int> labels) {
  Tape tape;
  ModelGraph graph(tape, params);
  return tape.scalar(graph.joint_log_prob(doc, labels, nullptr));
}

Model2State model2_initial_state(const DrlmParams& params) {
  return {Tensor(params.dims.H, 1), Tensor(params.dims.H, 1), params.c_0.value};
}

std::vector<double> model2_log_prior(const DrlmParams& params, const Model2State& state) {
  Tape tape;
  ModelGraph graph(tape, params);
  const Tensor& lp = tape.value(graph.relation_log_prior(tape.constant_ref(state.context)));
  return {lp.values().begin(), lp.values().end()};
}

Model2Extension model2_extend(const DrlmParams& params, const Model2State& state,
                              std::span<const int> sentence, int z) {
  if (params.variant != Variant::kModel2) {
    throw std::invalid_argument("model2_extend requires the drlm-model2 variant");
  }
  Tape tape;
  ModelGraph graph(tape, params);
  const RecurrentState start{tape.constant_ref(state.h), tape.constant_ref(state.c_mem)};
  const SentencePass pass = graph.encode_sentence(sentence, nullptr, &start, z);
  Model2Extension ext;
  ext.sentence_log_prob = tape.scalar(graph.sentence_log_prob(pass, sentence, Var{}, z));
  ext.next.h = tape.value(pass.run.final.h);
  ext.next.c_mem = tape.value(pass.run.final.c_mem);
  ext.next.context = ext.next.h;
  return ext;
}

ExactModel2 enumerate_exact_model2(const DrlmParams& params, const Document& doc) {
  if (params.variant != Variant::kModel2) {
    throw std::invalid_argument("exact enumeration is implemented for drlm-model2");
  }
  check_document(doc, params.dims);
  const std::size_t T = doc.size();
  const std::size_t Z = params.dims.Z;
  std::uint64_t count = 1;
  for (std::size_t t = 0; t < T; ++t) {
    if (count > kMaxEnumeration / Z) {
      throw std::invalid_argument("Z^T = " + std::to_string(Z) + "^" + std::to_string(T) +
                                  " exceeds the enumeration limit of " +
                                  std::to_string(kMaxEnumeration) + "; use smc_sample instead");
    }
    count *= Z;
  }

  ExactModel2 result;
  result.sequences = count;
  double total = kNegInf;
  std::vector<std::vector<double>> slot_mass(T, std::vector<double>(Z, kNegInf));
  std::vector<int> path(T, 0);

  // Depth-first over the prefix tree so each prefix is evaluated once.
  auto visit = [&](auto&& self, std::size_t t, const Model2State& state, double logp) -> void {
    if (t == T) {
      total = log_add(total, logp);
      for (std::size_t s = 0; s < T; ++s) {
        slot_mass[s][path[s]] = log_add(slot_mass[s][path[s]], logp);
      }
      return;
    }
    const std::vector<double> prior = model2_log_prior(params, state);
    for (std::size_t z = 0; z < Z; ++z) {
      path[t] = static_cast<int>(z);
      const auto ext = model2_extend(params, state, doc.sentences[t], static_cast<int>(z));
      self(self, t + 1, ext.next, logp + prior[z] + ext.sentence_log_prob);
    }
  };
  visit(visit, 0, model2_initial_state(params), 0.0);

  result.log_marginal = total;
  for (std::size_t t = 0; t < T; ++t) {
    RelationDistribution d;
    for (double m : slot_mass[t]) d.probs.push_back(std::exp(m - total));
    result.slot_marginals.push_back(std::move(d));
  }
  return result;
}

}  // namespace drlm
