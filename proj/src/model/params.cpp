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

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kRnnlm: return "rnnlm";
    case Variant::kDclm: return "dclm";
    case Variant::kDrlm: return "drlm";
    case Variant::kModel2: return "drlm-model2";
  }
  return "unknown";
}

std::optional<Variant> variant_from_name(std::string_view name) {
  for (Variant v : {Variant::kRnnlm, Variant::kDclm, Variant::kDrlm, Variant::kModel2}) {
    if (variant_name(v) == name) return v;
  }
  return std::nullopt;
}

bool has_relations(Variant v) { return v == Variant::kDrlm || v == Variant::kModel2; }

void ModelDims::validate() const {
  if (V == 0 || K == 0 || H == 0 || Z == 0) {
    throw std::invalid_argument("model dimensions must be positive (V=" + std::to_string(V) +
                                ", K=" + std::to_string(K) + ", H=" + std::to_string(H) +
                                ", Z=" + std::to_string(Z) + ")");
  }
}

DrlmParams allocate_params(const ModelDims& dims, Variant variant) {
  dims.validate();
  const std::size_t V = dims.V, K = dims.K, H = dims.H, Z = dims.Z;
  DrlmParams p;
  p.dims = dims;
  p.variant = variant;
  p.X = Parameter("X", Tensor(K, V));
  p.lstm.wx = Parameter("lstm.Wx", Tensor(4 * H, K));
  p.lstm.wh = Parameter("lstm.Wh", Tensor(4 * H, H));
  p.lstm.b = Parameter("lstm.b", Tensor(4 * H, 1));
  p.W_o = Parameter("W_o", Tensor(V, H));
  if (variant == Variant::kDclm || variant == Variant::kDrlm) {
    p.W_c = Parameter("W_c", Tensor(V, H));
  }
  const std::size_t n_bias = variant == Variant::kDrlm ? Z : 1;
  for (std::size_t i = 0; i < n_bias; ++i) {
    p.b_o.emplace_back("b_o." + std::to_string(i), Tensor(V, 1));
  }
  if (variant == Variant::kDrlm) {
    for (std::size_t i = 0; i < Z; ++i) {
      p.V_z.emplace_back("V_z." + std::to_string(i), Tensor(H, H));
      p.M_z.emplace_back("M_z." + std::to_string(i), Tensor(H, H));
    }
  }
  if (has_relations(variant)) {
    p.U = Parameter("U", Tensor(Z, H));
    p.b = Parameter("b", Tensor(Z, 1));
  }
  if (variant != Variant::kRnnlm) p.c_0 = Parameter("c_0", Tensor(H, 1));
  if (variant == Variant::kModel2) {
    for (std::size_t i = 0; i < Z; ++i) {
      p.W_trans.emplace_back("Wtrans." + std::to_string(i), Tensor(H, H));
    }
  }
  return p;
}

namespace {

template <typename Self, typename Out>
void collect(Self& self, Out& out) {
  auto add = [&](auto& param) {
    if (param.allocated()) out.push_back(&param);
  };
  add(self.X);
  add(self.lstm.wx);
  add(self.lstm.wh);
  add(self.lstm.b);
  add(self.W_o);
  add(self.W_c);
  for (auto& v : self.V_z) add(v);
  for (auto& m : self.M_z) add(m);
  for (auto& bo : self.b_o) add(bo);
  add(self.U);
  add(self.b);
  add(self.c_0);
  for (auto& w : self.W_trans) add(w);
}

}  // namespace

std::vector<Parameter*> DrlmParams::all() {
  std::vector<Parameter*> out;
  collect(*this, out);
  return out;
}

std::vector<const Parameter*> DrlmParams::all() const {
  std::vector<const Parameter*> out;
  collect(*this, out);
  return out;
}

Parameter* DrlmParams::find(std::string_view name) {
  for (Parameter* p : all()) {
    if (p->name == name) return p;
  }
  return nullptr;
}

void DrlmParams::zero_grad() {
  for (Parameter* p : all()) p->zero_grad();
}

std::size_t DrlmParams::parameter_count() const {
  std::size_t n = 0;
  for (const Parameter* p : all()) n += p->value.size();
  return n;
}

std::size_t tied_output_param_count(const ModelDims& d) {
  return 2 * d.V * d.H + d.Z * (2 * d.H * d.H + d.V) + d.Z * d.H + d.Z + d.H;
}

std::size_t untied_output_param_count(const ModelDims& d) {
  return 2 * d.Z * d.V * d.H + d.Z * d.V;
}

std::pair<Tensor, Tensor> tied_output_matrices(const DrlmParams& params, int z) {
  if (params.variant != Variant::kDrlm) {
    throw std::invalid_argument("tied output matrices exist only for the drlm variant");
  }
  if (z < 0 || static_cast<std::size_t>(z) >= params.dims.Z) {
    throw std::out_of_range("relation " + std::to_string(z) + " outside [0, " +
                            std::to_string(params.dims.Z) + ")");
  }
  Tape tape;
  const Var wo = tape.constant_ref(params.W_o.value);
  const Var wc = tape.constant_ref(params.W_c.value);
  const Var vz = tape.constant_ref(params.V_z[z].value);
  const Var mz = tape.constant_ref(params.M_z[z].value);
  return {tape.value(tape.matmul(wo, vz)), tape.value(tape.matmul(wc, mz))};
}

}  // namespace drlm
