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
#include <vector>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/measures.hpp"

using namespace hgm_mimo;

namespace
{
    // e E1(1) / ln 2, 50-digit reference, frozen
    constexpr double rayleigh_capacity_n1 = 0.86034738227088595;
    const double one_minus_inv_e = 1.0 - std::exp(-1.0);

    DerivedParams params_with(int N, double gamma1, double a)
    {
        DerivedParams d;
        d.dof = N;
        d.gamma1 = gamma1;
        d.noncentrality = a;
        return d;
    }
}

TEST_SUITE("measures")
{
    TEST_CASE("Rayleigh closed forms")
    {
        CHECK(rayleigh_pdf(0.0, 5, 1.0) == 0.0);
        CHECK(rayleigh_pdf(1.0, 5, 1.0) == doctest::Approx(std::exp(-1.0) / 24.0).epsilon(1e-15));
        CHECK(rayleigh_pdf(0.0, 1, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(rayleigh_outage(1.0, 1, 1.0) == doctest::Approx(one_minus_inv_e).epsilon(1e-13));
        CHECK(rayleigh_outage(1e6, 5, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(rayleigh_capacity(1, 1.0) == doctest::Approx(rayleigh_capacity_n1).epsilon(1e-10));
        CHECK_THROWS_AS(rayleigh_pdf(-1.0, 5, 1.0), DomainError);
    }

    TEST_CASE("trapezoid c.d.f. from a sampled density")
    {
        PdfGrid g;
        g.params = params_with(1, 1.0, 0.0);
        g.n_rx = 1;
        for (int i = 1; i <= 10000; ++i)
        {
            const double t = i * 1e-3;
            g.points.push_back({t, std::exp(-t)});
        }
        const auto cdf = cdf_from_pdf(g);
        CHECK(cdf[999].t == doctest::Approx(1.0));
        CHECK(cdf[999].pdf == doctest::Approx(one_minus_inv_e).epsilon(1e-7));
        for (std::size_t i = 1; i < cdf.size(); ++i)
            CHECK(cdf[i].pdf >= cdf[i - 1].pdf);
        CHECK(cdf.back().pdf <= 1.0 + 1e-3);

        PdfGrid zero;
        zero.params = params_with(5, 1.0, 0.0);
        zero.points = {{1.0, 0.0}, {2.0, 0.0}, {3.0, 0.0}};
        for (const auto &pt : cdf_from_pdf(zero))
            CHECK(pt.pdf == 0.0);

        PdfGrid unordered;
        unordered.params = params_with(5, 1.0, 0.0);
        unordered.points = {{2.0, 0.1}, {1.0, 0.1}};
        CHECK_THROWS_AS(cdf_from_pdf(unordered), DomainError);
    }

    TEST_CASE("rectangle-rule outage for exponential and Gamma laws")
    {
        const PdfSource exp_law = rayleigh_source(1, 1.0);
        CHECK(outage_probability(exp_law, OutageSpec{1.0}) == doctest::Approx(one_minus_inv_e).epsilon(1e-7));
        CHECK(outage_probability(exp_law, OutageSpec{1e-12}) <= 1e-11);
        CHECK(outage_probability(exp_law, OutageSpec{1e3}) == doctest::Approx(1.0).epsilon(1e-6));

        for (int N : {2, 5, 9})
            for (double th : {0.3, 2.0, 7.5})
                CHECK(outage_probability(rayleigh_source(N, 1.5), OutageSpec{th}) ==
                      doctest::Approx(rayleigh_outage(th, N, 1.5)).epsilon(1e-5));
    }

    TEST_CASE("outage is nondecreasing in the threshold")
    {
        const PdfSource src = memoized(hgm_source(params_with(5, 0.5, 20.0), 6));
        std::vector<double> th;
        for (double x = 0.5; x <= 40.0; x += 0.5)
            th.push_back(x);
        const auto cdf = cdf_curve(src, th, 400);
        for (std::size_t i = 1; i < cdf.size(); ++i)
            CHECK(cdf[i] >= cdf[i - 1]);
        CHECK(cdf.back() <= 1.0);
    }

    TEST_CASE("sweeps agree with single evaluations")
    {
        const PdfSource src = memoized(hgm_source(params_with(5, 1.0, 10.0), 6));
        const std::vector<double> g1 = {0.2, 0.7, 2.0};
        const auto curve = outage_curve(src, g1, OutageSpec{3.0}, 300);
        for (std::size_t i = 0; i < g1.size(); ++i)
        {
            PdfSource scaled = src;
            scaled.gamma1 = g1[i];
            CHECK(curve[i] == doctest::Approx(outage_probability(scaled, OutageSpec{3.0}, 300)).epsilon(1e-12));
        }
    }

    TEST_CASE("ergodic capacity")
    {
        const CapacityResult r = ergodic_capacity(rayleigh_source(1, 1.0));
        CHECK(r.bpcu == doctest::Approx(rayleigh_capacity_n1).epsilon(1e-6));
        CHECK(r.tail_mass_dropped <= 1e-7);

        CHECK(ergodic_capacity(rayleigh_source(5, 1e-3)).bpcu <= 1e-2);
        CHECK_THROWS_AS(ergodic_capacity(rayleigh_source(1, 1.0), 2000, 1e-5), DomainError);
    }

    TEST_CASE("capacity is nondecreasing in the input SNR")
    {
        const PdfSource src = memoized(hgm_source(params_with(5, 1.0, 15.0), 6));
        const auto caps = capacity_curve(src, std::vector<double>{0.3, 1.0, 3.0}, 300);
        CHECK(caps[1].bpcu > caps[0].bpcu);
        CHECK(caps[2].bpcu > caps[1].bpcu);
        for (const auto &c : caps)
            CHECK(c.tail_mass_dropped <= 1e-6);
    }

    TEST_CASE("near-Rayleigh HGM measures approach the closed forms")
    {
        const PdfSource src = memoized(hgm_source(params_with(5, 1.0, 1e-6), 6));
        CHECK(std::abs(outage_probability(src, OutageSpec{3.0}) - rayleigh_outage(3.0, 5, 1.0)) <= 1e-4);
        CHECK(std::abs(ergodic_capacity(src).bpcu - rayleigh_capacity(5, 1.0)) <= 1e-4);
    }

    TEST_CASE("tail bound")
    {
        CHECK(normalized_tail_bound(200.0, 5, 10.0) < 1e-20);
        CHECK(normalized_tail_bound(400.0, 5, 60.0) < normalized_tail_bound(200.0, 5, 60.0));
        // a Chernoff bound: never below the Gamma tail for a = 0
        CHECK(normalized_tail_bound(20.0, 5, 0.0) >= 1.0 - rayleigh_outage(20.0, 5, 1.0));
    }

    TEST_CASE("input checks")
    {
        CHECK_THROWS_AS(OutageSpec{0.0}.validate(), ValidationError);
        CHECK_THROWS_AS(outage_probability(rayleigh_source(1, 1.0), OutageSpec{1.0}, 10), DomainError);
        PdfSource empty;
        empty.dof = 5;
        CHECK_THROWS_AS(outage_probability(empty, OutageSpec{1.0}), DomainError);
    }
}
