// Copyright 2026 The qjump Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qjump/simd/kernels.h"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "gtest/gtest.h"

namespace qjump::simd {
namespace {

std::vector<double> integers(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> d(-1000, 1000);
    std::vector<double> v(n);
    for (auto &x : v) {
        x = d(rng);
    }
    return v;
}

std::vector<double> reals(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(0.3, 1.0);
    std::vector<double> v(n);
    for (auto &x : v) {
        x = d(rng);
    }
    return v;
}

// Restores the startup dispatch target after each test.
class SimdTest : public ::testing::Test {
   protected:
    void TearDown() override { set_active_isa(saved_); }
    Isa saved_ = active_isa();
};

TEST_F(SimdTest, ScalarAlwaysAvailable) {
    EXPECT_TRUE(isa_supported(Isa::kScalar));
    set_active_isa(Isa::kScalar);
    EXPECT_EQ(active_isa(), Isa::kScalar);
    EXPECT_STREQ(isa_name(Isa::kScalar), "scalar");
}

TEST_F(SimdTest, ScalarReferenceValues) {
    const std::vector<double> a = {1, 2, 3, 4};
    const std::vector<double> b = {5, 6, 7, 8};
    EXPECT_EQ(scalar::dot(a, b), 70.0);
    EXPECT_EQ(scalar::sum(a), 10.0);
    const std::vector<std::int64_t> lags = {-2, 0, 3};
    std::vector<double> out(3);
    scalar::lagged_products(a, b, lags, out);
    EXPECT_EQ(out[0], 3.0 * 5 + 4.0 * 6);
    EXPECT_EQ(out[1], 70.0);
    EXPECT_EQ(out[2], 1.0 * 8);
    const std::vector<float> iq = {1.0f, 2.0f, -0.5f, 4.0f};
    std::vector<double> proj(2);
    scalar::project_iq(iq, 2.0, 0.5, proj);
    EXPECT_EQ(proj[0], 3.0);
    EXPECT_EQ(proj[1], 1.0);
}

#if defined(QJUMP_HAVE_AVX2)

class Avx2Test : public SimdTest {
   protected:
    void SetUp() override {
        if (!isa_supported(Isa::kAvx2)) {
            GTEST_SKIP() << "CPU lacks AVX2";
        }
    }
};

TEST_F(Avx2Test, IntegerInputsAreBitIdentical) {
    // Odd lengths exercise the tails.
    for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 16u, 33u, 1001u, 4096u}) {
        const auto a = integers(n, n + 1);
        const auto b = integers(n, n + 2);
        EXPECT_EQ(avx2::dot(a, b), scalar::dot(a, b)) << n;
        EXPECT_EQ(avx2::sum(a), scalar::sum(a)) << n;
        if (n == 0) {
            continue;
        }
        std::vector<std::int64_t> lags;
        const auto span = static_cast<std::int64_t>(n) - 1;
        for (std::int64_t l = -span; l <= span; l += std::max<std::int64_t>(1, span / 13)) {
            lags.push_back(l);
        }
        std::vector<double> x(lags.size()), y(lags.size());
        scalar::lagged_products(a, b, lags, x);
        avx2::lagged_products(a, b, lags, y);
        EXPECT_EQ(x, y) << n;
    }
}

TEST_F(Avx2Test, RealInputsAgreeToRounding) {
    for (std::size_t n : {5u, 64u, 4099u}) {
        const auto a = reals(n, 3 * n);
        const auto b = reals(n, 3 * n + 1);
        double abs_sum = 0;
        for (std::size_t i = 0; i < n; ++i) {
            abs_sum += std::abs(a[i] * b[i]);
        }
        EXPECT_NEAR(avx2::dot(a, b), scalar::dot(a, b), 1e-14 * abs_sum) << n;
        const std::vector<std::int64_t> lags = {-static_cast<std::int64_t>(n) + 1, -2, 0, 1, 4};
        std::vector<double> x(lags.size()), y(lags.size());
        scalar::lagged_products(a, b, lags, x);
        avx2::lagged_products(a, b, lags, y);
        for (std::size_t k = 0; k < lags.size(); ++k) {
            EXPECT_NEAR(x[k], y[k], 1e-14 * abs_sum) << n << " lag " << lags[k];
        }
    }
}

TEST_F(Avx2Test, ProjectionIsExact) {
    std::mt19937_64 rng(11);
    std::normal_distribution<float> d(0.0f, 1.0f);
    for (std::size_t n : {1u, 3u, 8u, 4097u}) {
        std::vector<float> iq(2 * n);
        for (auto &v : iq) {
            v = d(rng);
        }
        std::vector<double> x(n), y(n);
        scalar::project_iq(iq, 0.8, -0.6, x);
        avx2::project_iq(iq, 0.8, -0.6, y);
        EXPECT_EQ(x, y) << n;
    }
}

TEST_F(Avx2Test, DispatchFollowsSelection) {
    const auto a = reals(1003, 1);
    const auto b = reals(1003, 2);
    set_active_isa(Isa::kAvx2);
    EXPECT_EQ(dot(a, b), avx2::dot(a, b));
    EXPECT_EQ(sum(a), avx2::sum(a));
    set_active_isa(Isa::kScalar);
    EXPECT_EQ(dot(a, b), scalar::dot(a, b));
    EXPECT_EQ(sum(a), scalar::sum(a));
}

#endif

}  // namespace
}  // namespace qjump::simd
