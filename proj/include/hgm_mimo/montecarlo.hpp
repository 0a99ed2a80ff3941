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

// Monte Carlo oracle: Rician-Rayleigh channel draws H = H_d + H_r and the Stream-1 ZF SNR
// Gamma_s / [(H^H H)^-1]_11.
//
// Draws are generated in fixed-size batches; batch b uses its own std::mt19937_64 seeded with
// (seed XOR b), so results do not depend on the number of worker threads.

#pragma once

#include <Eigen/Core>

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "hgm_mimo/scenario.hpp"

namespace hgm_mimo
{
    struct ChannelSample
    {
        Eigen::MatrixXcd h; // N_R x N_T
    };

    struct EmpiricalDistribution
    {
        std::vector<double> bin_edges;  // bins + 1 strictly increasing edges starting at 0
        std::vector<std::int64_t> counts; // samples above the last edge are counted in the last bin
        std::int64_t n_samples = 0;

        /// Histogram density of bin i.
        double density(std::size_t i) const;
    };

    struct SimulationResult
    {
        EmpiricalDistribution histogram;
        std::vector<double> sorted_snr; // accepted samples of gamma_1, ascending
        std::int64_t rejected = 0;      // numerically singular H^H H
        double mean_snr = 0.0;
        double capacity_bpcu = 0.0;     // mean of log2(1 + gamma_1)
    };

    inline constexpr std::int64_t simulation_batch = 4096;

    /// Standard complex Gaussian CN(0, 1) from two 53-bit uniforms (Box-Muller).
    std::complex<double> complex_normal(std::mt19937_64 &engine);

    /// Sampler for one scenario; holds the mean column and the Cholesky-type factor L with
    /// L L^H = R_T / (K + 1).
    class ChannelModel
    {
    public:
        ChannelModel(const ScenarioConfig &cfg, const CorrelationMatrix &rt);

        ChannelSample draw(std::mt19937_64 &engine) const;
        void draw_into(std::mt19937_64 &engine, Eigen::MatrixXcd &h) const;

        const Eigen::MatrixXcd &factor() const { return factor_; }
        double mean_entry() const { return mean_entry_; }

    private:
        int n_rx_ = 0;
        int n_tx_ = 0;
        double mean_entry_ = 0.0;  // every entry of h_d1; ||h_d1||^2 = K / (K + 1) NR NT
        Eigen::MatrixXcd factor_;  // N_T x N_T
    };

    ChannelSample draw_channel(const ScenarioConfig &cfg, const CorrelationMatrix &rt, std::uint64_t rng_seed);

    /// Gamma_s / [(H^H H)^-1]_kk for the 1-based stream k; empty when H^H H is numerically
    /// singular (reciprocal condition estimate below 1e-12).
    std::optional<double> zf_snr(const ChannelSample &sample, double gamma_s_linear, int stream = 1);
    std::optional<double> zf_snr(const Eigen::MatrixXcd &h, double gamma_s_linear, int stream = 1);

    /// n_samples draws of gamma_1 for stream 1 with a histogram over [0, 0.9999 quantile].
    SimulationResult simulate(const ScenarioConfig &cfg, const CorrelationMatrix &rt, std::int64_t n_samples,
                              int bins, std::uint64_t rng_seed);

    /// Fraction of samples scale * gamma_1 <= threshold.
    double empirical_outage(std::span<const double> sorted_snr, double threshold, double scale = 1.0);

    /// Mean of log2(1 + scale * gamma_1), summed in sample order.
    double empirical_capacity(std::span<const double> sorted_snr, double scale = 1.0);

    /// Empirical c.d.f. at t (fraction of samples <= t).
    double empirical_cdf(std::span<const double> sorted_snr, double t);
}
