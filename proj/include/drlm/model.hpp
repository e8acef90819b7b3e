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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "drlm/document.hpp"
#include "drlm/recurrent.hpp"

namespace drlm {

// rnnlm:  softmax(W_o h + b_o)
// dclm:   softmax(W_o h + W_c c + b_o)
// drlm:   softmax(W_o V_z h + W_c M_z c + b_o^(z)) with prior softmax(U c + b)
// model2: relation z selects an H x H transition applied to h before each LSTM
//         step; state carries across sentences and the output is softmax(W_o h + b_o).
enum class Variant : std::uint8_t { kRnnlm = 0, kDclm = 1, kDrlm = 2, kModel2 = 3 };

std::string_view variant_name(Variant v);
std::optional<Variant> variant_from_name(std::string_view name);
bool has_relations(Variant v);

struct ModelDims {
  std::size_t V = 0;  // vocabulary size, including reserved tokens
  std::size_t K = 0;  // embedding size
  std::size_t H = 0;  // hidden size
  std::size_t Z = 1;  // relation labels, including the dummy

  void validate() const;
  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

// Every trainable tensor. Which ones are allocated depends on the variant;
// unallocated parameters have empty values.
struct DrlmParams {
  ModelDims dims;
  Variant variant = Variant::kDrlm;

  Parameter X;  // K x V
  LstmParams lstm;
  Parameter W_o;                  // V x H
  Parameter W_c;                  // V x H
  std::vector<Parameter> V_z;     // Z of H x H
  std::vector<Parameter> M_z;     // Z of H x H
  std::vector<Parameter> b_o;     // Z (drlm) or 1 vectors of length V
  Parameter U;                    // Z x H
  Parameter b;                    // Z
  Parameter c_0;                  // H
  std::vector<Parameter> W_trans; // model2: Z of H x H

  // Allocated parameters in checkpoint order.
  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  Parameter* find(std::string_view name);

  void zero_grad();
  std::size_t parameter_count() const;
};

// Zero-filled parameters with the tensors `variant` needs.
DrlmParams allocate_params(const ModelDims& dims, Variant variant);

// Output-layer parameter count with tying: 2VH + Z(2H^2 + V) + ZH + Z + H.
std::size_t tied_output_param_count(const ModelDims& dims);
// Same layer with a separate V x H pair per relation: 2ZVH + ZV.
std::size_t untied_output_param_count(const ModelDims& dims);

// Materializes (W_o V_z, W_c M_z). Only used for checks; the model applies
// the factors lazily.
std::pair<Tensor, Tensor> tied_output_matrices(const DrlmParams& params, int z);

// Per-sentence LSTM pass: predictions use hidden[0..N-1] (hidden[0] follows
// the start token) and `context` is the final state, after the end token.
struct SentencePass {
  SentenceRun run;
  Var context;
};

// Scores of one slot: log prior over relations (invalid when the variant has
// no relations) and the sentence log-likelihood under each relation. For
// variants without relations `sentence_lp` has a single entry.
struct SlotScores {
  Var log_prior;
  std::vector<Var> sentence_lp;
};

// Parameters bound to a tape. The mutable constructor binds trainable leaves;
// the const one binds borrowed constants for evaluation.
class ModelGraph {
 public:
  ModelGraph(Tape& tape, DrlmParams& params);
  ModelGraph(Tape& tape, const DrlmParams& params);

  Tape& tape() { return *tape_; }
  const DrlmParams& params() const { return *params_; }
  const ModelDims& dims() const { return params_->dims; }
  Variant variant() const { return params_->variant; }

  Var default_context() const { return c_0_; }
  Var embed(int token);

  // LSTM over [start] + sentence from `initial` (zero state when omitted);
  // `z` selects the model2 transition.
  SentencePass encode_sentence(std::span<const int> sentence, Dropout* dropout,
                               const RecurrentState* initial = nullptr, int z = -1);

  // log softmax(U c + b)
  Var relation_log_prior(Var c_prev);
  Var relation_prior(Var c_prev);

  // V-vector of per-token log-probabilities from hidden state h.
  Var token_log_probs(Var h, Var c_prev, int z);
  // Σ_n log p(sentence[n] | hidden[n], c_prev, z) for an encoded sentence.
  Var sentence_log_prob(const SentencePass& pass, std::span<const int> sentence, Var c_prev,
                        int z);

  // Model I family: scores every slot of a document. With `all_relations`
  // false, only the observed relation of each slot is scored.
  std::vector<SlotScores> score_document(const Document& doc, Dropout* dropout,
                                         bool all_relations);

  // Σ_t log p(z_t | c_{t-1}) + log p(y_t | z_t, ...) for the given labeling
  // (any variant; for model2 the labeling drives the transition chain).
  Var joint_log_prob(const Document& doc, std::span<const int> labels, Dropout* dropout);

 private:
  Var output_logits(Var h, Var context_term, int z);
  Var context_term(Var c_prev, int z);
  void check_relation(int z) const;

  Tape* tape_;
  const DrlmParams* params_;
  Var X_;
  LstmVars lstm_;
  Var W_o_, W_c_, U_, b_, c_0_;
  std::vector<Var> V_z_, M_z_, b_o_, W_trans_;
};

// Validates token ids and labels of a document against the dimensions.
void check_document(const Document& doc, const ModelDims& dims);

}  // namespace drlm
