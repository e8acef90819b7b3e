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

#include "drlm/recurrent.hpp"

#include <array>
#include <stdexcept>
#include <string>

#include "drlm/errors.hpp"

namespace drlm {

Dropout::Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw std::invalid_argument("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
}

Tensor Dropout::mask(std::size_t n) {
  Tensor m(n, 1, 1.0);
  if (!active()) return m;
  const double keep = 1.0 - rate_;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) m[i] = unif(rng_) < keep ? 1.0 / keep : 0.0;
  return m;
}

Var Dropout::apply(Tape& tape, Var v) {
  if (!active()) return v;
  return tape.dropout(v, mask(tape.value(v).size()));
}

RecurrentState zero_state(Tape& tape, std::size_t hidden) {
  return {tape.constant(Tensor(hidden, 1)), tape.constant(Tensor(hidden, 1))};
}

Var embed(Tape& tape, Var embeddings, int token) {
  const std::size_t vocab = tape.value(embeddings).cols();
  if (token < 0 || static_cast<std::size_t>(token) >= vocab) {
    throw std::out_of_range("token id " + std::to_string(token) + " outside vocabulary of size " +
                            std::to_string(vocab));
  }
  return tape.column(embeddings, static_cast<std::size_t>(token));
}

RecurrentState lstm_step_from(Tape& tape, const LstmVars& lstm, Var x, Var hidden_input,
                              Var c_mem) {
  const std::size_t H = lstm.hidden;
  const Var pre = tape.add(tape.add(tape.matmul(lstm.wx, x), tape.matmul(lstm.wh, hidden_input)),
                           lstm.b);
  const Var in_gate = tape.sigmoid(tape.slice(pre, 0, H));
  const Var forget_gate = tape.sigmoid(tape.slice(pre, H, H));
  const Var out_gate = tape.sigmoid(tape.slice(pre, 2 * H, H));
  const Var candidate = tape.tanh(tape.slice(pre, 3 * H, H));
  const Var c_next = tape.add(tape.mul(forget_gate, c_mem), tape.mul(in_gate, candidate));
  const Var h_next = tape.mul(out_gate, tape.tanh(c_next));
  return {h_next, c_next};
}

RecurrentState lstm_step(Tape& tape, const LstmVars& lstm, Var x, const RecurrentState& state) {
  return lstm_step_from(tape, lstm, x, state.h, state.c_mem);
}

SentenceRun run_sentence(Tape& tape, const LstmVars& lstm, Var embeddings,
                         std::span<const int> tokens, const RecurrentState& initial,
                         Dropout* dropout, Var transition) {
  if (tokens.empty()) throw std::invalid_argument("run_sentence: empty token list");
  SentenceRun run;
  run.hidden.reserve(tokens.size());
  RecurrentState state = initial;
  for (int token : tokens) {
    Var x = embed(tape, embeddings, token);
    if (dropout != nullptr) x = dropout->apply(tape, x);
    const Var hidden_input = transition.valid() ? tape.matmul(transition, state.h) : state.h;
    state = lstm_step_from(tape, lstm, x, hidden_input, state.c_mem);
    run.hidden.push_back(dropout != nullptr ? dropout->apply(tape, state.h) : state.h);
  }
  run.final = state;
  return run;
}

}  // namespace drlm
