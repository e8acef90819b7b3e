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
#include <vector>

#include <gtest/gtest.h>

#include "drlm/simd/kernels.hpp"

namespace drlm::simd {
namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

class KernelEquivalence : public ::testing::Test {
 protected:
  void SetUp() override {
    avx2_ = avx2_kernels();
    if (avx2_ == nullptr) GTEST_SKIP() << "AVX2 not available on this machine";
  }
  const KernelTable& scalar_ = scalar_kernels();
  const KernelTable* avx2_ = nullptr;
  std::mt19937_64 rng_{20240601};
};

TEST_F(KernelEquivalence, DotAgreesToRounding) {
  for (std::size_t n = 0; n < 70; ++n) {
    auto a = random_vec(n, rng_), b = random_vec(n, rng_);
    const double s = scalar_.dot(a.data(), b.data(), n);
    const double v = avx2_->dot(a.data(), b.data(), n);
    EXPECT_NEAR(s, v, 1e-13 * (1.0 + std::abs(s))) << "n=" << n;
  }
}

TEST_F(KernelEquivalence, SumSqAgreesToRounding) {
  for (std::size_t n = 0; n < 70; ++n) {
    auto a = random_vec(n, rng_);
    EXPECT_NEAR(scalar_.sum_sq(a.data(), n), avx2_->sum_sq(a.data(), n), 1e-13 * (1.0 + n)) << "n=" << n;
  }
}

TEST_F(KernelEquivalence, GemvAgreesToRounding) {
  for (std::size_t rows : {1u, 3u, 8u, 17u}) {
    for (std::size_t cols : {1u, 4u, 7u, 33u}) {
      auto a = random_vec(rows * cols, rng_), x = random_vec(cols, rng_);
      std::vector<double> ys(rows), yv(rows);
      scalar_.gemv(a.data(), rows, cols, x.data(), ys.data());
      avx2_->gemv(a.data(), rows, cols, x.data(), yv.data());
      for (std::size_t i = 0; i < rows; ++i) EXPECT_NEAR(ys[i], yv[i], 1e-12);
    }
  }
}

TEST_F(KernelEquivalence, ElementwiseKernelsAreBitIdentical) {
  for (std::size_t rows : {1u, 5u, 12u}) {
    for (std::size_t cols : {1u, 3u, 4u, 9u, 31u}) {
      const std::size_t n = rows * cols;
      auto a = random_vec(n, rng_), x = random_vec(rows, rng_), y = random_vec(cols, rng_);

      auto gs = random_vec(cols, rng_);
      auto gv = gs;
      scalar_.gemv_t_acc(a.data(), rows, cols, x.data(), gs.data());
      avx2_->gemv_t_acc(a.data(), rows, cols, x.data(), gv.data());
      EXPECT_EQ(gs, gv);

      auto ms = a, mv = a;
      scalar_.ger_acc(ms.data(), rows, cols, x.data(), y.data());
      avx2_->ger_acc(mv.data(), rows, cols, x.data(), y.data());
      EXPECT_EQ(ms, mv);

      auto b = random_vec(n, rng_);
      auto ys = random_vec(n, rng_);
      auto yv = ys;
      scalar_.axpy(0.37, a.data(), ys.data(), n);
      avx2_->axpy(0.37, a.data(), yv.data(), n);
      EXPECT_EQ(ys, yv);

      scalar_.mul_acc(a.data(), b.data(), ys.data(), n);
      avx2_->mul_acc(a.data(), b.data(), yv.data(), n);
      EXPECT_EQ(ys, yv);

      auto ps = random_vec(n, rng_);
      auto pv = ps;
      std::vector<double> as(n, 0.25), av(n, 0.25);
      for (int step = 0; step < 3; ++step) {
        scalar_.adagrad_update(ps.data(), as.data(), b.data(), n, 0.1, 1e-8);
        avx2_->adagrad_update(pv.data(), av.data(), b.data(), n, 0.1, 1e-8);
      }
      EXPECT_EQ(ps, pv);
      EXPECT_EQ(as, av);
    }
  }
}

TEST(KernelReference, ScalarDotMatchesNaiveLoop) {
  std::mt19937_64 rng(3);
  auto a = random_vec(13, rng), b = random_vec(13, rng);
  double expect = 0.0;
  for (std::size_t i = 0; i < 13; ++i) expect += a[i] * b[i];
  EXPECT_DOUBLE_EQ(scalar_kernels().dot(a.data(), b.data(), 13), expect);
}

TEST(KernelReference, AdagradUpdateFollowsFormula) {
  std::vector<double> p{1.0, -2.0}, acc{0.0, 4.0}, g{0.5, -1.0};
  scalar_kernels().adagrad_update(p.data(), acc.data(), g.data(), 2, 0.1, 1e-8);
  EXPECT_DOUBLE_EQ(acc[0], 0.25);
  EXPECT_DOUBLE_EQ(acc[1], 5.0);
  EXPECT_DOUBLE_EQ(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8));
  EXPECT_DOUBLE_EQ(p[1], -2.0 + 0.1 * 1.0 / (std::sqrt(5.0) + 1e-8));
}

TEST(KernelDispatch, ForceSelectsTable) {
  force_kernels("scalar");
  EXPECT_STREQ(kernels().name, "scalar");
  if (avx2_kernels() != nullptr) {
    force_kernels("avx2");
    EXPECT_STREQ(kernels().name, "avx2");
  }
  EXPECT_THROW(force_kernels("neon-bogus"), std::invalid_argument);
}

}  // namespace
}  // namespace drlm::simd
