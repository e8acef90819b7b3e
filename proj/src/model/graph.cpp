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

#include <stdexcept>
#include <string>

#include "drlm/model.hpp"

namespace drlm {
namespace {

template <typename Bind>
std::vector<Var> bind_all(std::vector<Parameter>& params, Bind bind) {
  std::vector<Var> out;
  out.reserve(params.size());
  for (auto& p : params) out.push_back(bind(p));
  return out;
}

Var sum_scalars(Tape& tape, const std::vector<Var>& terms) {
  if (terms.size() == 1) return terms.front();
  return tape.sum(tape.concat(terms));
}

}  // namespace

ModelGraph::ModelGraph(Tape& tape, DrlmParams& params) : tape_(&tape), params_(&params) {
  auto bind = [&](Parameter& p) { return p.allocated() ? tape.parameter(p) : Var{}; };
  X_ = bind(params.X);
  lstm_ = {bind(params.lstm.wx), bind(params.lstm.wh), bind(params.lstm.b), params.dims.H};
  W_o_ = bind(params.W_o);
  W_c_ = bind(params.W_c);
  U_ = bind(params.U);
  b_ = bind(params.b);
  c_0_ = bind(params.c_0);
  V_z_ = bind_all(params.V_z, bind);
  M_z_ = bind_all(params.M_z, bind);
  b_o_ = bind_all(params.b_o, bind);
  W_trans_ = bind_all(params.W_trans, bind);
}

ModelGraph::ModelGraph(Tape& tape, const DrlmParams& params) : tape_(&tape), params_(&params) {
  auto bind = [&](const Parameter& p) { return p.allocated() ? tape.constant_ref(p.value) : Var{}; };
  auto bind_vec = [&](const std::vector<Parameter>& ps) {
    std::vector<Var> out;
    for (const auto& p : ps) out.push_back(bind(p));
    return out;
  };
  X_ = bind(params.X);
  lstm_ = {bind(params.lstm.wx), bind(params.lstm.wh), bind(params.lstm.b), params.dims.H};
  W_o_ = bind(params.W_o);
  W_c_ = bind(params.W_c);
  U_ = bind(params.U);
  b_ = bind(params.b);
  c_0_ = bind(params.c_0);
  V_z_ = bind_vec(params.V_z);
  M_z_ = bind_vec(params.M_z);
  b_o_ = bind_vec(params.b_o);
  W_trans_ = bind_vec(params.W_trans);
}

void ModelGraph::check_relation(int z) const {
  if (z < 0 || static_cast<std::size_t>(z) >= dims().Z) {
    throw std::out_of_range("relation " + std::to_string(z) + " outside [0, " +
                            std::to_string(dims().Z) + ")");
  }
}

Var ModelGraph::embed(int token) { return drlm::embed(*tape_, X_, token); }

SentencePass ModelGraph::encode_sentence(std::span<const int> sentence, Dropout* dropout,
                                         const RecurrentState* initial, int z) {
  if (sentence.empty()) throw std::invalid_argument("sentence is empty");
  std::vector<int> tokens;
  tokens.reserve(sentence.size() + 1);
  tokens.push_back(kBosId);
  tokens.insert(tokens.end(), sentence.begin(), sentence.end());

  Var transition;
  if (variant() == Variant::kModel2) {
    check_relation(z);
    transition = W_trans_[z];
  }
  const RecurrentState start = initial != nullptr ? *initial : zero_state(*tape_, dims().H);
  SentencePass pass;
  pass.run = run_sentence(*tape_, lstm_, X_, tokens, start, dropout, transition);
  pass.context = pass.run.final.h;
  return pass;
}

Var ModelGraph::relation_log_prior(Var c_prev) {
  if (!has_relations(variant())) {
    throw std::invalid_argument(std::string(variant_name(variant())) +
                                " has no relation prior");
  }
  return tape_->log_softmax(tape_->add(tape_->matmul(U_, c_prev), b_));
}

Var ModelGraph::relation_prior(Var c_prev) {
  if (!has_relations(variant())) {
    throw std::invalid_argument(std::string(variant_name(variant())) +
                                " has no relation prior");
  }
  return tape_->softmax(tape_->add(tape_->matmul(U_, c_prev), b_));
}

Var ModelGraph::context_term(Var c_prev, int z) {
  Tape& t = *tape_;
  switch (variant()) {
    case Variant::kDrlm:
      check_relation(z);
      return t.add(t.matmul(W_c_, t.matmul(M_z_[z], c_prev)), b_o_[z]);
    case Variant::kDclm:
      return t.add(t.matmul(W_c_, c_prev), b_o_[0]);
    case Variant::kRnnlm:
    case Variant::kModel2:
      break;
  }
  return b_o_[0];
}

Var ModelGraph::output_logits(Var h, Var context, int z) {
  Tape& t = *tape_;
  // W_o (V_z h): the V x H product is never materialized per relation.
  const Var intra = variant() == Variant::kDrlm ? t.matmul(W_o_, t.matmul(V_z_[z], h))
                                                : t.matmul(W_o_, h);
  return t.add(intra, context);
}

Var ModelGraph::token_log_probs(Var h, Var c_prev, int z) {
  return tape_->log_softmax(output_logits(h, context_term(c_prev, z), z));
}

Var ModelGraph::sentence_log_prob(const SentencePass& pass, std::span<const int> sentence,
                                  Var c_prev, int z) {
  if (sentence.empty()) throw std::invalid_argument("sentence is empty");
  if (pass.run.hidden.size() < sentence.size()) {
    throw std::invalid_argument("sentence pass is shorter than the sentence");
  }
  const Var context = context_term(c_prev, z);
  std::vector<Var> terms;
  terms.reserve(sentence.size());
  for (std::size_t n = 0; n < sentence.size(); ++n) {
    const Var logits = output_logits(pass.run.hidden[n], context, z);
    terms.push_back(tape_->pick_log_prob(logits, static_cast<std::size_t>(sentence[n])));
  }
  return sum_scalars(*tape_, terms);
}

std::vector<SlotScores> ModelGraph::score_document(const Document& doc, Dropout* dropout,
                                                   bool all_relations) {
  if (variant() == Variant::kModel2) {
    throw std::invalid_argument("per-slot scoring does not apply to drlm-model2");
  }
  check_document(doc, dims());
  std::vector<SlotScores> slots;
  slots.reserve(doc.size());
  Var c_prev = c_0_;
  for (std::size_t t = 0; t < doc.size(); ++t) {
    const auto& sentence = doc.sentences[t];
    const SentencePass pass = encode_sentence(sentence, dropout);
    Var c_used = c_prev;
    if (dropout != nullptr && c_prev.valid()) c_used = dropout->apply(*tape_, c_prev);

    SlotScores slot;
    if (variant() == Variant::kDrlm) {
      slot.log_prior = relation_log_prior(c_used);
      slot.sentence_lp.assign(dims().Z, Var{});
      for (std::size_t z = 0; z < dims().Z; ++z) {
        if (!all_relations && static_cast<int>(z) != doc.relations[t]) continue;
        slot.sentence_lp[z] = sentence_log_prob(pass, sentence, c_used, static_cast<int>(z));
      }
      if (!all_relations && doc.relations[t] == kNoLabel) {
        throw std::invalid_argument("slot " + std::to_string(t) + " has no relation label");
      }
    } else {
      slot.sentence_lp.push_back(sentence_log_prob(pass, sentence, c_used, 0));
    }
    slots.push_back(std::move(slot));
    c_prev = pass.context;
  }
  return slots;
}

Var ModelGraph::joint_log_prob(const Document& doc, std::span<const int> labels,
                               Dropout* dropout) {
  check_document(doc, dims());
  if (has_relations(variant())) {
    if (labels.size() != doc.size()) {
      throw std::invalid_argument("expected " + std::to_string(doc.size()) +
                                  " relation labels, got " + std::to_string(labels.size()));
    }
    for (std::size_t t = 0; t < labels.size(); ++t) {
      if (labels[t] == kNoLabel) {
        throw std::invalid_argument("slot " + std::to_string(t) + " has no relation label");
      }
      check_relation(labels[t]);
    }
  }
  Tape& t = *tape_;
  std::vector<Var> terms;
  if (variant() == Variant::kModel2) {
    RecurrentState state = zero_state(t, dims().H);
    Var c_prev = c_0_;
    for (std::size_t s = 0; s < doc.size(); ++s) {
      const int z = labels[s];
      const Var c_used = dropout != nullptr ? dropout->apply(t, c_prev) : c_prev;
      terms.push_back(t.pick(relation_log_prior(c_used), static_cast<std::size_t>(z)));
      const SentencePass pass = encode_sentence(doc.sentences[s], dropout, &state, z);
      terms.push_back(sentence_log_prob(pass, doc.sentences[s], Var{}, z));
      state = pass.run.final;
      c_prev = pass.context;
    }
    return sum_scalars(t, terms);
  }

  Document relabeled;
  const Document* source = &doc;
  if (variant() == Variant::kDrlm) {
    relabeled = doc;
    relabeled.relations.assign(labels.begin(), labels.end());
    source = &relabeled;
  }
  const auto slots = score_document(*source, dropout, false);
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (variant() == Variant::kDrlm) {
      const auto z = static_cast<std::size_t>(labels[s]);
      terms.push_back(t.pick(slots[s].log_prior, z));
      terms.push_back(slots[s].sentence_lp[z]);
    } else {
      terms.push_back(slots[s].sentence_lp[0]);
    }
  }
  return sum_scalars(t, terms);
}

void check_document(const Document& doc, const ModelDims& dims) {
  if (doc.sentences.empty()) throw std::invalid_argument("document has no sentences");
  if (doc.relations.size() != doc.sentences.size()) {
    throw std::invalid_argument("document has " + std::to_string(doc.sentences.size()) +
                                " sentences but " + std::to_string(doc.relations.size()) +
                                " relation slots");
  }
  for (std::size_t t = 0; t < doc.sentences.size(); ++t) {
    if (doc.sentences[t].empty()) {
      throw std::invalid_argument("sentence " + std::to_string(t) + " is empty");
    }
    for (int id : doc.sentences[t]) {
      if (id < 0 || static_cast<std::size_t>(id) >= dims.V) {
        throw std::out_of_range("token id " + std::to_string(id) + " in sentence " +
                                std::to_string(t) + " outside vocabulary of size " +
                                std::to_string(dims.V));
      }
    }
    const int z = doc.relations[t];
    if (z != kNoLabel && (z < 0 || static_cast<std::size_t>(z) >= dims.Z)) {
      throw std::out_of_range("relation " + std::to_string(z) + " in slot " + std::to_string(t) +
                              " outside [0, " + std::to_string(dims.Z) + ")");
    }
  }
}

}  // namespace drlm
