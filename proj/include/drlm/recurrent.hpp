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
#include <random>
#include <span>
#include <vector>

#include "drlm/autodiff/tape.hpp"

namespace drlm {

using autodiff::Parameter;
using autodiff::Tape;
using autodiff::Tensor;
using autodiff::Var;

// Input-to-gates (4H x K), hidden-to-gates (4H x H) and bias (4H). Gate rows
// are stacked in the order input, forget, output, candidate.
struct LstmParams {
  Parameter wx;
  Parameter wh;
  Parameter b;
};

// LstmParams bound to one tape.
struct LstmVars {
  Var wx;
  Var wh;
  Var b;
  std::size_t hidden = 0;
};

// h and the cell memory, both H-vectors on a tape.
struct RecurrentState {
  Var h;
  Var c_mem;
};

// Inverted dropout. A rate of 0 disables it; masks hold 0 or 1/(1-rate).
class Dropout {
 public:
  Dropout(double rate, std::uint64_t seed);
  double rate() const { return rate_; }
  bool active() const { return rate_ > 0.0; }
  Tensor mask(std::size_t n);
  Var apply(Tape& tape, Var v);

 private:
  double rate_;
  std::mt19937_64 rng_;
};

RecurrentState zero_state(Tape& tape, std::size_t hidden);

// Column `token` of the K x V embedding matrix; throws std::out_of_range for
// ids outside [0, V).
Var embed(Tape& tape, Var embeddings, int token);

// Standard LSTM update:
//   c' = f * c + i * g,  h' = o * tanh(c')
RecurrentState lstm_step(Tape& tape, const LstmVars& lstm, Var x, const RecurrentState& state);

// As lstm_step, with `hidden_input` feeding the hidden-to-gates product in
// place of state.h.
RecurrentState lstm_step_from(Tape& tape, const LstmVars& lstm, Var x, Var hidden_input,
                              Var c_mem);

struct SentenceRun {
  // hidden[n] is the (possibly dropped-out) output after consuming tokens[n].
  std::vector<Var> hidden;
  // Recurrent state after the last token, never dropped out.
  RecurrentState final;
};

// Runs the LSTM over `tokens` from `initial`. With an active dropout, a fresh
// mask is drawn for every embedding input and every emitted hidden state.
// `transition`, when valid, is an H x H matrix applied to h before each step.
SentenceRun run_sentence(Tape& tape, const LstmVars& lstm, Var embeddings,
                         std::span<const int> tokens, const RecurrentState& initial,
                         Dropout* dropout, Var transition = Var{});

}  // namespace drlm
