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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/hgm_engine.hpp"
#include "hgm_mimo/series_model.hpp"
#include "oracle.hpp"

using namespace hgm_mimo;

namespace
{
    struct OraclePoint
    {
        double t, a;
        int N, NR;
        double p, p1, p2, p3;
    };

    // 50-digit positive-term expansion (tests/oracle.hpp), frozen
    constexpr OraclePoint oracle_points[] = {
        {0.5, 0.1, 5, 6, 1.46548693568201061e-03, 1.02827459173564385e-02, 4.87021387665811101e-02,
         1.06466257750661847e-01},
        {1.0, 1.0, 5, 6, 7.90464071850928603e-03, 2.49697574030963536e-02, 4.72312507486264271e-02,
         1.25112366921644198e-02},
        {2.0, 5.0, 5, 6, 7.05493203585237996e-03, 1.13600883867428851e-02, 1.10146212990481496e-02,
         1.39040640168158714e-03},
        {5.0, 10.0, 5, 6, 1.70647051875987554e-02, 1.04105366537356157e-02, 3.15017877107243030e-03,
         -8.58766119586398357e-04},
        {0.5, 0.1, 1, 4, 5.98987648252208182e-01, -5.84271172093391078e-01, 5.69845618067692739e-01, 0.0},
        {1.0, 1.0, 1, 4, 3.60476526115508566e-01, -2.85331341631304358e-01, 2.23425097016960644e-01, 0.0},
        {2.0, 5.0, 1, 4, 1.89489521613132900e-01, -7.69374169008157638e-02, 2.71369667350824934e-02, 0.0},
        {0.5, 0.1, 2, 2, 2.81323370172935572e-01, 2.95273766561223505e-01, -8.15606229260795401e-01, 0.0},
        {1.0, 1.0, 2, 2, 2.15269289248937651e-01, 9.32390333047333764e-02, -1.86478066609466753e-01, 0.0},
        {2.0, 5.0, 2, 2, 4.78553079971653292e-02, 3.46480831331786657e-02, 2.48679572939065939e-03, 0.0},
    };

    constexpr double mgf_a10_s02 = 25.873447228663720; // (0.8)^-5 1F1(5; 6; 2.5)
    constexpr double f11_1_4_m2 = 0.64849853757254048;

    double gamma_density(double t, int N) { return std::exp(-t + (N - 1) * std::log(t) - std::lgamma(double(N))); }
}

TEST_SUITE("series_model")
{
    TEST_CASE("frozen oracle table matches the extended-precision expansion")
    {
        for (const auto &pt : oracle_points)
        {
            const auto d = oracle::pdf_derivatives(pt.t, pt.a, pt.N, pt.NR);
            CHECK(d[0] == doctest::Approx(pt.p).epsilon(1e-15));
            CHECK(d[1] == doctest::Approx(pt.p1).epsilon(1e-15));
        }
        CHECK(static_cast<double>(pow(oracle::mp50("0.8"), -5) * oracle::hyp1f1(5, 6, oracle::mp50("2.5"))) ==
              doctest::Approx(mgf_a10_s02).epsilon(1e-15));
    }

    TEST_CASE("series density and derivatives against the oracle")
    {
        for (const auto &pt : oracle_points)
        {
            CAPTURE(pt.t);
            CAPTURE(pt.a);
            CAPTURE(pt.N);
            const auto d = pdf_derivatives_series(pt.t, pt.a, pt.N, pt.NR, TruncationPolicy{}, pt.N >= 3 ? 3 : 2);
            REQUIRE(d.converged());
            CHECK(d.state.p == doctest::Approx(pt.p).epsilon(1e-10));
            CHECK(d.state.p1 == doctest::Approx(pt.p1).epsilon(1e-10));
            CHECK(d.state.p2 == doctest::Approx(pt.p2).epsilon(1e-10));
            if (pt.N >= 3)
                CHECK(d.p3 == doctest::Approx(pt.p3).epsilon(1e-9));
            CHECK(pdf_series(pt.t, pt.a, pt.N, pt.NR).value == doctest::Approx(pt.p).epsilon(1e-10));
        }
    }

    TEST_CASE("a = 0 reduces to the Gamma density")
    {
        CHECK(pdf_series(1.0, 0.0, 5, 6).value == doctest::Approx(std::exp(-1.0) / 24.0).epsilon(1e-15));
        for (int N : {1, 2, 3, 5, 8})
            for (double t : {0.1, 1.0, 4.0, 12.0})
                CHECK(pdf_series(t, 0.0, N, N + 2).value == doctest::Approx(gamma_density(t, N)).epsilon(1e-13));

        const auto d = pdf_derivatives_series(1.0, 0.0, 5, 6);
        CHECK(d.state.p1 == doctest::Approx(std::exp(-1.0) * (1.0 / 6.0 - 1.0 / 24.0)).epsilon(1e-14));
        const auto e = pdf_derivatives_series(1.0, 0.0, 1, 1);
        CHECK(e.state.p == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
        CHECK(e.state.p1 == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
        CHECK(e.state.p2 == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    }

    TEST_CASE("N = 2 derivatives against central differences")
    {
        const double t = 0.5, a = 0.01, h = 1e-4;
        const auto d = pdf_derivatives_series(t, a, 2, 4);
        const double pp = pdf_series(t + h, a, 2, 4).value, pm = pdf_series(t - h, a, 2, 4).value;
        const double p0 = pdf_series(t, a, 2, 4).value;
        CHECK(std::abs(d.state.p1 - (pp - pm) / (2 * h)) <= 1e-6);
        CHECK(std::abs(d.state.p2 - (pp - 2 * p0 + pm) / (h * h)) <= 1e-6);
    }

    TEST_CASE("boundary value p(0+, a)")
    {
        CHECK(pdf_boundary(0.0, 1, 4) == 1.0);
        CHECK(pdf_boundary(3.0, 5, 6) == 0.0);
        CHECK(pdf_boundary(2.0, 1, 4) == doctest::Approx(f11_1_4_m2).epsilon(1e-13));
        // continuity from the right
        CHECK(pdf_series(1e-6, 2.0, 1, 4).value == doctest::Approx(f11_1_4_m2).epsilon(1e-5));
    }

    TEST_CASE("closed-form m.g.f.")
    {
        CHECK(mgf_closed(0.0, 7.0, 5, 6, 1.0) == 1.0);
        CHECK(mgf_closed(0.5, 0.0, 5, 6, 1.0) == doctest::Approx(32.0).epsilon(1e-15));
        CHECK(mgf_closed(0.2, 10.0, 5, 6, 1.0) == doctest::Approx(mgf_a10_s02).epsilon(1e-12));
        // Gamma_1 enters only through Gamma_1 s
        CHECK(mgf_closed(0.1, 10.0, 5, 6, 2.0) == doctest::Approx(mgf_a10_s02).epsilon(1e-12));
        CHECK_THROWS_AS(mgf_closed(1.0, 1.0, 5, 6, 1.0), DomainError);
    }

    TEST_CASE("breakdown at K = 7 dB in the 6x2 scenario")
    {
        const double a = 60.142468035272675;
        for (double t : {1.0, 5.0, 10.0, 20.0, 30.0})
            CHECK_FALSE(pdf_series(t, a, 5, 6).converged);
    }

    TEST_CASE("nonnegative wherever the series converges")
    {
        for (double a : {0.0, 0.5, 2.0, 8.0, 15.0})
            for (double t = 0.05; t < 40.0; t *= 1.3)
            {
                const auto r = pdf_series(t, a, 5, 6);
                if (r.converged)
                    CHECK(r.value >= -1e-12);
            }
    }

    TEST_CASE("t-ODE residual with series derivatives")
    {
        for (double t : {0.5, 1.0, 2.0, 3.5, 5.0})
            for (double a : {0.0, 0.1, 0.5, 1.0})
            {
                const auto d = pdf_derivatives_series(t, a, 5, 6, TruncationPolicy{}, 3);
                REQUIRE(d.converged());
                const auto P = companion_p(t, a, 5, 6);
                const Eigen::Vector3d y = d.state.vector();
                const double rhs = P.row(2).dot(y);
                const double scale = std::max(std::abs(d.p3), (P.row(2).transpose().cwiseProduct(y)).cwiseAbs().maxCoeff());
                CHECK(std::abs(d.p3 - rhs) <= 1e-8 * scale);
            }
    }

    TEST_CASE("a dM/da = s (1 - s) dM/ds - N s M")
    {
        const int N = 5, NR = 6;
        const double h = 1e-5;
        for (double a : {0.5, 2.0, 6.0})
            for (double s : {-1.0, -0.3, 0.2, 0.5})
            {
                const auto M = [&](double ss, double aa) { return mgf_closed(ss, aa, N, NR, 1.0); };
                const double dMda = (M(s, a + h) - M(s, a - h)) / (2 * h);
                const double dMds = (M(s + h, a) - M(s - h, a)) / (2 * h);
                const double lhs = a * dMda;
                const double rhs = s * (1 - s) * dMds - N * s * M(s, a);
                CHECK(std::abs(lhs - rhs) <= 1e-6 * std::max(1.0, std::abs(M(s, a))));
            }
    }

    TEST_CASE("Laplace transform of the density equals the m.g.f.")
    {
        using boost::math::quadrature::gauss_kronrod;
        for (double a : {0.2, 1.0})
            for (double s : {-1.0, -0.25, 0.0})
            {
                const auto f = [&](double t) { return t > 0.0 ? std::exp(s * t) * pdf_series(t, a, 5, 6).value : 0.0; };
                const double integral = gauss_kronrod<double, 61>::integrate(f, 0.0, 80.0, 15, 1e-13);
                CHECK(integral == doctest::Approx(mgf_closed(s, a, 5, 6, 1.0)).epsilon(1e-6));
            }
    }

    TEST_CASE("initial state")
    {
        const double u0 = 1e-3;
        const auto s0 = initial_state(u0, 0.0, 5, 6);
        CHECK(s0.p == doctest::Approx(std::pow(u0, 4) / 24.0).epsilon(2e-3));

        const auto s1 = initial_state(u0, 10.0, 1, 4);
        CHECK(s1.p == doctest::Approx(hyp1f1(1, 4, -10.0 * u0)).epsilon(2e-3));

        const auto d = pdf_derivatives_series(u0, 10.0 * u0, 5, 6);
        CHECK(d.converged());
        for (int q = 0; q <= 2; ++q)
            CHECK(d.g_series[q].terms_used < 20);

        CHECK_THROWS_AS(initial_state(0.0, 1.0, 5, 6), DomainError);
        CHECK_THROWS_AS(initial_state(20.0, 3.0, 5, 6), NumericalError);
    }
}
