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

#include "drlm/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>
#include <string>

namespace drlm {
namespace {

constexpr std::array<char, 5> kMagic = {'D', 'R', 'L', 'M', '1'};

void put_u64(std::ostream& out, std::uint64_t v) {
  std::array<char, 8> bytes{};
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

void put_u32(std::ostream& out, std::uint32_t v) {
  std::array<char, 4> bytes{};
  for (int i = 0; i < 4; ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <std::size_t N>
bool get_bytes(std::istream& in, std::array<unsigned char, N>& bytes) {
  in.read(reinterpret_cast<char*>(bytes.data()), N);
  return static_cast<std::size_t>(in.gcount()) == N;
}

std::uint64_t get_u64(std::istream& in, const char* what) {
  std::array<unsigned char, 8> bytes{};
  if (!get_bytes(in, bytes)) throw std::runtime_error(std::string("checkpoint truncated in ") + what);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const DrlmParams& params) {
  out.write(kMagic.data(), kMagic.size());
  put_u64(out, params.dims.V);
  put_u64(out, params.dims.K);
  put_u64(out, params.dims.H);
  put_u64(out, params.dims.Z);
  put_u64(out, static_cast<std::uint64_t>(params.variant));
  for (const Parameter* p : params.all()) {
    put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u64(out, p->value.rows());
    put_u64(out, p->value.cols());
    for (double v : p->value.values()) put_u64(out, std::bit_cast<std::uint64_t>(v));
  }
  if (!out) throw std::runtime_error("failed writing checkpoint");
}

DrlmParams read_checkpoint(std::istream& in) {
  std::array<char, 5> magic{};
  in.read(magic.data(), magic.size());
  if (in.gcount() != 5 || magic != kMagic) throw std::runtime_error("not a DRLM1 checkpoint");
  ModelDims dims;
  dims.V = get_u64(in, "dims");
  dims.K = get_u64(in, "dims");
  dims.H = get_u64(in, "dims");
  dims.Z = get_u64(in, "dims");
  const std::uint64_t tag = get_u64(in, "dims");
  if (tag > static_cast<std::uint64_t>(Variant::kModel2)) {
    throw std::runtime_error("unknown variant tag " + std::to_string(tag));
  }
  DrlmParams params = allocate_params(dims, static_cast<Variant>(tag));

  std::set<std::string> seen;
  while (true) {
    std::array<unsigned char, 4> len_bytes{};
    in.read(reinterpret_cast<char*>(len_bytes.data()), 4);
    if (in.gcount() == 0 && in.eof()) break;
    if (in.gcount() != 4) throw std::runtime_error("checkpoint truncated in tensor header");
    std::uint32_t len = 0;
    for (int i = 0; i < 4; ++i) len |= static_cast<std::uint32_t>(len_bytes[i]) << (8 * i);
    if (len > 4096) throw std::runtime_error("implausible tensor name length " + std::to_string(len));
    std::string name(len, '\0');
    in.read(name.data(), len);
    if (static_cast<std::uint32_t>(in.gcount()) != len) {
      throw std::runtime_error("checkpoint truncated in tensor name");
    }
    const std::uint64_t rows = get_u64(in, name.c_str());
    const std::uint64_t cols = get_u64(in, name.c_str());
    Parameter* p = params.find(name);
    if (p == nullptr) throw std::runtime_error("unexpected tensor '" + name + "' in checkpoint");
    if (seen.contains(name)) throw std::runtime_error("duplicate tensor '" + name + "' in checkpoint");
    if (p->value.rows() != rows || p->value.cols() != cols) {
      throw std::runtime_error("tensor '" + name + "' has shape " + std::to_string(rows) + "x" +
                               std::to_string(cols) + ", expected " + p->value.shape_string());
    }
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      p->value[i] = std::bit_cast<double>(get_u64(in, name.c_str()));
    }
    seen.insert(name);
  }
  for (const Parameter* p : params.all()) {
    if (!seen.contains(p->name)) {
      throw std::runtime_error("checkpoint is missing tensor '" + p->name + "'");
    }
  }
  params.zero_grad();
  return params;
}

void save_checkpoint(const std::filesystem::path& path, const DrlmParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, params);
}

DrlmParams load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace drlm
