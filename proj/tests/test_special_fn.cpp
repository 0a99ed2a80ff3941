// SPDX-License-Identifier: Apache-2.0
//
// hgm-mimo: holonomic-gradient evaluation of MIMO zero-forcing performance
// Copyright (C) 2026 The hgm-mimo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <doctest.h>

#include <cmath>
#include <limits>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/special_fn.hpp"
#include "oracle.hpp"

using namespace hgm_mimo;

namespace
{
    double rel_err(double x, double ref) { return std::abs(x - ref) / std::abs(ref); }

    // 50-digit series values, frozen
    constexpr double f11_5_6_2 = 5.4863201236633128;
    constexpr double df11_5_6_2 = 4.7568399381683436;
    constexpr double f11_1_4_m2 = 0.64849853757254048;
}

TEST_SUITE("special_fn")
{
    TEST_CASE("frozen references agree with the extended-precision series")
    {
        CHECK(rel_err(static_cast<double>(oracle::hyp1f1(5, 6, 2)), f11_5_6_2) <= 1e-16);
        CHECK(rel_err(static_cast<double>(oracle::mp50(5) / 6 * oracle::hyp1f1(6, 7, 2)), df11_5_6_2) <= 1e-16);
        CHECK(rel_err(static_cast<double>(oracle::hyp1f1(1, 4, -2)), f11_1_4_m2) <= 1e-16);
    }

    TEST_CASE("pochhammer")
    {
        CHECK(pochhammer(5.0, 0) == 1.0);
        CHECK(pochhammer(3.0, 2) == 12.0);
        CHECK(pochhammer(1.0, 5) == 120.0);
        CHECK_THROWS_AS(pochhammer(1.0, -1), DomainError);
    }

    TEST_CASE("series values")
    {
        const auto zero = hyp1f1_series(5, 6, 0.0, 1e-13);
        CHECK(zero.converged);
        CHECK(zero.value == 1.0);

        const auto e = hyp1f1_series(1, 1, 1.0, 1e-13);
        CHECK(e.converged);
        CHECK(rel_err(e.value, std::exp(1.0)) <= 1e-14);

        const auto s = hyp1f1_series(5, 6, 2.0, 1e-13);
        CHECK(s.converged);
        CHECK(rel_err(s.value, f11_5_6_2) <= 1e-13);

        CHECK(rel_err(hyp1f1_series(1, 4, -2.0, 1e-13).value, f11_1_4_m2) <= 1e-13);
    }

    TEST_CASE("series derivative")
    {
        CHECK(hyp1f1_deriv_series(5, 6, 0.0, 1e-13).value == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
        CHECK(rel_err(hyp1f1_deriv_series(1, 1, 1.0, 1e-13).value, std::exp(1.0)) <= 1e-14);
        CHECK(rel_err(hyp1f1_deriv_series(5, 6, 2.0, 1e-13).value, df11_5_6_2) <= 1e-13);
    }

    TEST_CASE("series reports breakdown instead of returning garbage")
    {
        // 1F1(1; 4; -60) ~ 5e-2 is the sum of alternating terms up to ~1e22
        const auto s = hyp1f1_series(1, 4, -60.0, 1e-13);
        CHECK_FALSE(s.converged);
        CHECK(s.cancellation_ratio() > TruncationPolicy{}.max_cancellation);

        TruncationPolicy tight;
        tight.n_max = 50;
        CHECK_FALSE(hyp1f1_series(5, 6, 100.0, tight).converged);

        TruncationPolicy low_guard;
        low_guard.overflow_guard = 1e10;
        CHECK_FALSE(hyp1f1_series(5, 6, 40.0, low_guard).converged);
    }

    TEST_CASE("truncation policy validation")
    {
        TruncationPolicy p;
        p.rel_tol = 0.0;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = {};
        p.rel_tol = 1e-2;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        p = {};
        p.n_max = 10;
        CHECK_THROWS_AS(p.validate(), ValidationError);
        CHECK_THROWS_AS(hyp1f1_series(-1, 4, 1.0, 1e-13), DomainError);
    }

    TEST_CASE("holonomic gradient method")
    {
        IntegratorSettings<double> s;
        const auto same = hyp1f1_hgm(5, 6, 0.01, 0.01, s);
        CHECK(rel_err(same.f, hyp1f1_series(5, 6, 0.01, 1e-13).value) <= 1e-13);

        const auto five = hyp1f1_hgm(5, 6, 5.0, 0.01, s);
        CHECK(rel_err(five.f, hyp1f1_series(5, 6, 5.0, 1e-13).value) <= 1e-8);
        CHECK(rel_err(five.f1, hyp1f1_deriv_series(5, 6, 5.0, 1e-13).value) <= 1e-8);

        CHECK(rel_err(hyp1f1_hgm(1, 1, 3.0, 0.01, s).f, std::exp(3.0)) <= 1e-8);
        CHECK(rel_err(hyp1f1_hgm(1, 4, -2.0, -0.01, s).f, f11_1_4_m2) <= 1e-8);

        CHECK_THROWS_AS(hyp1f1_hgm(5, 6, 1.0, 0.0, s), DomainError);
        CHECK_THROWS_AS(hyp1f1_hgm(5, 6, -1.0, 0.01, s), DomainError);
        CHECK_THROWS_AS(hyp1f1_companion(5, 6, 0.0), DomainError);
    }

    TEST_CASE("HGM and series agree wherever the series converges")
    {
        IntegratorSettings<double> s;
        for (int N : {1, 2, 5})
            for (int NR : {N, N + 1, 6})
                for (double sigma : {0.05, 0.3, 1.0, 3.0, 8.0, 15.0})
                {
                    const auto ref = hyp1f1_series(N, NR, sigma, 1e-13);
                    REQUIRE(ref.converged);
                    CHECK(rel_err(hyp1f1_hgm(N, NR, sigma, 0.01, s).f, ref.value) <= 10 * s.rel_tol);
                }
    }

    TEST_CASE("Kummer ODE residual from series values")
    {
        // f'' = N (N + 1) / (NR (NR + 1)) 1F1(N + 2; NR + 2; sigma)
        for (int N : {1, 2, 5})
            for (double sigma : {0.1, 1.0, 4.0})
            {
                const int NR = 6;
                const double f = hyp1f1_series(N, NR, sigma, 1e-15).value;
                const double f1 = hyp1f1_deriv_series(N, NR, sigma, 1e-15).value;
                const double f2 = double(N) * (N + 1) / (double(NR) * (NR + 1)) *
                                  hyp1f1_series(N + 2, NR + 2, sigma, 1e-15).value;
                const double scale = std::max({std::abs(sigma * f2), std::abs((NR - sigma) * f1), std::abs(N * f)});
                CHECK(std::abs(sigma * f2 + (NR - sigma) * f1 - N * f) <= 1e-8 * scale);
            }
    }

    TEST_CASE("Kummer reflection")
    {
        for (int N : {1, 2, 5})
            for (double sigma : {-2.0, -0.5, 0.3, 1.0, 2.0})
            {
                const int NR = 6;
                const double lhs = hyp1f1(N, NR, sigma);
                const double rhs = std::exp(sigma) * hyp1f1(NR - N, NR, -sigma);
                CHECK(rel_err(lhs, rhs) <= 1e-8);
            }
    }

    TEST_CASE("dispatch falls back to HGM for large negative arguments")
    {
        const double ref = static_cast<double>(oracle::hyp1f1(1, 4, -60, 2000));
        CHECK(rel_err(hyp1f1(1, 4, -60.0), ref) <= 1e-8);
    }

    TEST_CASE("templated scalar: long double")
    {
        const auto s = hyp1f1_series<long double>(5, 6, 2.0L, 1e-18L);
        CHECK(s.converged);
        CHECK(std::abs(static_cast<double>(s.value) - f11_5_6_2) <= 1e-15);
    }
}
