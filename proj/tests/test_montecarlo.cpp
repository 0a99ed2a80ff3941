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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/measures.hpp"
#include "hgm_mimo/montecarlo.hpp"
#include "hgm_mimo/scenario.hpp"

using namespace hgm_mimo;
using cd = std::complex<double>;

namespace
{
    ScenarioConfig scenario(double k_db)
    {
        ScenarioConfig cfg;
        cfg.k_factor_db = k_db;
        cfg.gamma_s_db = 0.0;
        return cfg;
    }

    double ks_two_sample(std::vector<double> x, std::vector<double> y)
    {
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        std::size_t i = 0, j = 0;
        double d = 0.0;
        while (i < x.size() && j < y.size())
        {
            const double v = std::min(x[i], y[j]);
            while (i < x.size() && x[i] <= v)
                ++i;
            while (j < y.size() && y[j] <= v)
                ++j;
            d = std::max(d, std::abs(double(i) / x.size() - double(j) / y.size()));
        }
        return d;
    }
}

TEST_SUITE("montecarlo")
{
    TEST_CASE("complex normal has unit power and circular symmetry")
    {
        std::mt19937_64 engine(3);
        const int n = 200000;
        double power = 0.0;
        cd mean = 0.0, pseudo = 0.0;
        for (int i = 0; i < n; ++i)
        {
            const cd z = complex_normal(engine);
            power += std::norm(z);
            mean += z;
            pseudo += z * z;
        }
        CHECK(power / n == doctest::Approx(1.0).epsilon(0.01));
        CHECK(std::abs(mean / double(n)) < 0.01);
        CHECK(std::abs(pseudo / double(n)) < 0.01);
    }

    TEST_CASE("ZF SNR of simple matrices")
    {
        CHECK(*zf_snr(Eigen::MatrixXcd::Identity(2, 2), 3.162) == doctest::Approx(3.162).epsilon(1e-14));

        Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(3, 2);
        h(0, 0) = 2.0;
        h(1, 1) = 3.0;
        CHECK(*zf_snr(h, 1.0) == doctest::Approx(4.0).epsilon(1e-14));
        CHECK(*zf_snr(h, 1.0, 2) == doctest::Approx(9.0).epsilon(1e-14));

        Eigen::MatrixXcd v(3, 1);
        v << cd(1, 1), cd(0, 2), 0.5;
        CHECK(*zf_snr(v, 2.0) == doctest::Approx(2.0 * v.squaredNorm()).epsilon(1e-14));

        Eigen::MatrixXcd singular(2, 2);
        singular << 1, 2, 2, 4;
        CHECK_FALSE(zf_snr(singular, 1.0).has_value());
        CHECK_THROWS(zf_snr(h, 1.0, 3));
    }

    TEST_CASE("Rician column norm and the near-deterministic limit")
    {
        ScenarioConfig cfg = scenario(60.0); // K = 10^6
        const auto rt = CorrelationMatrix::identity(2);
        const ChannelModel model(cfg, rt);
        std::mt19937_64 engine(5);
        double norm = 0.0;
        for (int i = 0; i < 1000; ++i)
            norm += model.draw(engine).h.squaredNorm();
        // only column 1 is Rician here; column 2 is Rayleigh with power NR / (K + 1)
        const double K = 1e6;
        CHECK(norm / 1000 == doctest::Approx(K / (K + 1) * 12.0 + 12.0 / (K + 1)).epsilon(0.01));
        CHECK(model.mean_entry() * model.mean_entry() * 6 == doctest::Approx(K / (K + 1) * 12.0).epsilon(1e-12));
    }

    TEST_CASE("Rayleigh power and column covariance")
    {
        ScenarioConfig cfg = scenario(-300.0);
        const auto rt = CorrelationMatrix::identity(2);
        const ChannelModel model(cfg, rt);
        std::mt19937_64 engine(11);
        const int n = 100000;
        double power = 0.0;
        Eigen::Matrix2cd cov = Eigen::Matrix2cd::Zero();
        Eigen::MatrixXcd h;
        for (int i = 0; i < n; ++i)
        {
            model.draw_into(engine, h);
            power += h.squaredNorm();
            cov += h.adjoint() * h;
        }
        CHECK(power / n == doctest::Approx(12.0).epsilon(0.01));
        cov /= double(n) * 6.0;
        CHECK((cov - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 0.02);
    }

    TEST_CASE("correlated rows follow R_T")
    {
        ScenarioConfig cfg = scenario(-300.0);
        const auto rt = laplacian_ula_correlation(2, 0.5, 20.0);
        const ChannelModel model(cfg, rt);
        CHECK((model.factor() * model.factor().adjoint() - rt.entries).cwiseAbs().maxCoeff() < 1e-12);
        std::mt19937_64 engine(13);
        Eigen::Matrix2cd cov = Eigen::Matrix2cd::Zero();
        Eigen::MatrixXcd h;
        const int n = 50000;
        for (int i = 0; i < n; ++i)
        {
            model.draw_into(engine, h);
            cov += h.adjoint() * h;
        }
        cov /= double(n) * 6.0;
        CHECK((cov - rt.entries).cwiseAbs().maxCoeff() < 0.02);
    }

    TEST_CASE("semi-definite correlation falls back to an eigen factor")
    {
        CorrelationMatrix rt;
        rt.entries = Eigen::MatrixXcd::Ones(2, 2);
        ScenarioConfig cfg = scenario(7.0);
        const ChannelModel model(cfg, rt);
        CHECK((model.factor() * model.factor().adjoint() - rt.entries / (db_to_linear(7.0) + 1.0)).cwiseAbs().maxCoeff() <
              1e-12);
    }

    TEST_CASE("Rayleigh SNR follows the Gamma law")
    {
        ScenarioConfig cfg = scenario(-std::numeric_limits<double>::infinity());
        const auto rt = CorrelationMatrix::identity(2);
        const auto sim = simulate(cfg, rt, 200'000, 50, 21);
        double ks = 0.0;
        for (std::size_t i = 0; i < sim.sorted_snr.size(); i += 97)
        {
            const double x = sim.sorted_snr[i];
            const double f = rayleigh_outage(x, 5, 1.0);
            ks = std::max({ks, std::abs(f - double(i) / sim.sorted_snr.size()),
                           std::abs(f - double(i + 1) / sim.sorted_snr.size())});
        }
        CHECK(ks < 0.006);
        CHECK(sim.mean_snr == doctest::Approx(5.0).epsilon(0.01));
    }

    TEST_CASE("Rician mean SNR matches the m.g.f. slope")
    {
        ScenarioConfig cfg = scenario(7.0);
        const auto rt = CorrelationMatrix::identity(2);
        const DerivedParams d = derive_params(cfg, rt);
        const auto sim = simulate(cfg, rt, 100'000, 50, 3);
        const double predicted = d.gamma1 * (d.dof + d.noncentrality * d.dof / cfg.n_rx);
        CHECK(sim.mean_snr == doctest::Approx(predicted).epsilon(0.01));
    }

    TEST_CASE("histogram bookkeeping and determinism")
    {
        ScenarioConfig cfg = scenario(7.0);
        const auto rt = laplacian_ula_correlation(2, 0.5, 51.0);
        const auto a = simulate(cfg, rt, 30'000, 40, 99);
        const auto b = simulate(cfg, rt, 30'000, 40, 99);
        const auto c = simulate(cfg, rt, 30'000, 40, 100);
        CHECK(a.sorted_snr == b.sorted_snr);
        CHECK(a.histogram.counts == b.histogram.counts);
        CHECK(a.sorted_snr != c.sorted_snr);

        const auto &h = a.histogram;
        CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::int64_t{0}) == h.n_samples);
        CHECK(h.n_samples + a.rejected == 30'000);
        CHECK(h.bin_edges.front() == 0.0);
        for (std::size_t i = 1; i < h.bin_edges.size(); ++i)
            CHECK(h.bin_edges[i] > h.bin_edges[i - 1]);
        CHECK(std::is_sorted(a.sorted_snr.begin(), a.sorted_snr.end()));

        CHECK_THROWS_AS(simulate(cfg, rt, 100, 10, 1), ValidationError);
    }

    TEST_CASE("thread count does not change the samples")
    {
        ScenarioConfig cfg = scenario(7.0);
        const auto rt = CorrelationMatrix::identity(2);
        setenv("HGM_MIMO_THREADS", "1", 1);
        const auto one = simulate(cfg, rt, 20'000, 10, 8);
        setenv("HGM_MIMO_THREADS", "3", 1);
        const auto three = simulate(cfg, rt, 20'000, 10, 8);
        unsetenv("HGM_MIMO_THREADS");
        CHECK(one.sorted_snr == three.sorted_snr);
        CHECK(one.capacity_bpcu == three.capacity_bpcu);
    }

    TEST_CASE("permuting the Rayleigh columns leaves the SNR law unchanged")
    {
        ScenarioConfig cfg;
        cfg.n_rx = 6;
        cfg.n_tx = 3;
        cfg.k_factor_db = 5.0;
        cfg.gamma_s_db = 0.0;
        const auto rt = CorrelationMatrix::identity(3);
        const ChannelModel model(cfg, rt);
        std::mt19937_64 e1(1), e2(2);
        std::vector<double> x, y;
        Eigen::MatrixXcd h;
        for (int i = 0; i < 20000; ++i)
        {
            model.draw_into(e1, h);
            x.push_back(*zf_snr(h, 1.0));
            model.draw_into(e2, h);
            h.col(1).swap(h.col(2));
            y.push_back(*zf_snr(h, 1.0));
        }
        // 1.63 sqrt(2 / n) is the 1% critical value
        CHECK(ks_two_sample(x, y) < 1.63 * std::sqrt(2.0 / 20000));
    }

    TEST_CASE("empirical summaries")
    {
        const std::vector<double> s = {0.5, 1.0, 2.0, 4.0};
        CHECK(empirical_outage(s, 1.0) == 0.5);
        CHECK(empirical_outage(s, 1.0, 2.0) == 0.25);
        CHECK(empirical_cdf(s, 10.0) == 1.0);
        CHECK(empirical_cdf(s, 0.1) == 0.0);
        CHECK(empirical_capacity(s) ==
              doctest::Approx((std::log2(1.5) + 1.0 + std::log2(3.0) + std::log2(5.0)) / 4.0).epsilon(1e-15));
    }
}
