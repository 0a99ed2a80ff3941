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

#include "hgm_mimo/montecarlo.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/parallel.hpp"

namespace hgm_mimo
{
    namespace
    {
        double unit_open_closed(std::uint64_t bits) // (0, 1]
        {
            return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
        }

        double unit_closed_open(std::uint64_t bits) // [0, 1)
        {
            return static_cast<double>(bits >> 11) * 0x1.0p-53;
        }
    }

    double EmpiricalDistribution::density(std::size_t i) const
    {
        if (i >= counts.size())
            throw DomainError("EmpiricalDistribution::density: bin index out of range");
        if (n_samples == 0)
            return 0.0;
        return static_cast<double>(counts[i]) / (static_cast<double>(n_samples) * (bin_edges[i + 1] - bin_edges[i]));
    }

    std::complex<double> complex_normal(std::mt19937_64 &engine)
    {
        const double u1 = unit_open_closed(engine());
        const double u2 = unit_closed_open(engine());
        // |z|^2 = -ln u1 is Exp(1), so E|z|^2 = 1
        const double r = std::sqrt(-std::log(u1));
        const double phase = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phase), r * std::sin(phase)};
    }

    ChannelModel::ChannelModel(const ScenarioConfig &cfg, const CorrelationMatrix &rt)
        : n_rx_(cfg.n_rx), n_tx_(cfg.n_tx)
    {
        cfg.validate();
        if (rt.order() != cfg.n_tx)
            throw ValidationError("correlation order does not match n_tx");
        rt.validate();
        const double k = db_to_linear(cfg.k_factor_db);
        mean_entry_ = std::sqrt(k / (k + 1.0) * cfg.n_tx);

        const Eigen::MatrixXcd cov = rt.entries / (k + 1.0);
        const Eigen::LLT<Eigen::MatrixXcd> llt(cov);
        if (llt.info() == Eigen::Success)
        {
            factor_ = llt.matrixL();
        }
        else
        {
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(cov);
            const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
            factor_ = eig.eigenvectors() * root.asDiagonal();
        }
    }

    void ChannelModel::draw_into(std::mt19937_64 &engine, Eigen::MatrixXcd &h) const
    {
        h.resize(n_rx_, n_tx_);
        Eigen::VectorXcd w(n_tx_);
        for (int i = 0; i < n_rx_; ++i)
        {
            for (int k = 0; k < n_tx_; ++k)
                w[k] = complex_normal(engine);
            // row_i = w^T L^H, so row_i^H = L conj(w) ~ CN(0, L L^H)
            h.row(i).noalias() = w.transpose() * factor_.adjoint();
        }
        h.col(0).array() += mean_entry_;
    }

    ChannelSample ChannelModel::draw(std::mt19937_64 &engine) const
    {
        ChannelSample out;
        draw_into(engine, out.h);
        return out;
    }

    ChannelSample draw_channel(const ScenarioConfig &cfg, const CorrelationMatrix &rt, std::uint64_t rng_seed)
    {
        const ChannelModel model(cfg, rt);
        std::mt19937_64 engine(rng_seed);
        return model.draw(engine);
    }

    std::optional<double> zf_snr(const Eigen::MatrixXcd &h, double gamma_s_linear, int stream)
    {
        if (stream < 1 || stream > h.cols())
            throw DomainError("zf_snr: stream index out of range");
        if (!(gamma_s_linear > 0.0))
            throw DomainError("zf_snr: gamma_s must be positive");
        const Eigen::MatrixXcd gram = h.adjoint() * h;
        const Eigen::LLT<Eigen::MatrixXcd> llt(gram);
        if (llt.info() != Eigen::Success || !(llt.rcond() >= 1e-12))
            return std::nullopt;
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(gram.rows());
        e[stream - 1] = 1.0;
        const double inv_kk = llt.solve(e)[stream - 1].real();
        const double snr = gamma_s_linear / inv_kk;
        if (!(snr > 0.0) || !std::isfinite(snr))
            return std::nullopt;
        return snr;
    }

    std::optional<double> zf_snr(const ChannelSample &sample, double gamma_s_linear, int stream)
    {
        return zf_snr(sample.h, gamma_s_linear, stream);
    }

    SimulationResult simulate(const ScenarioConfig &cfg, const CorrelationMatrix &rt, std::int64_t n_samples,
                              int bins, std::uint64_t rng_seed)
    {
        if (n_samples < 10'000)
            throw ValidationError("simulate: n_samples must be at least 10^4");
        if (bins < 1)
            throw ValidationError("simulate: bins must be at least 1");
        const ChannelModel model(cfg, rt);
        const double gamma_s = db_to_linear(cfg.gamma_s_db);

        const std::int64_t n_batches = (n_samples + simulation_batch - 1) / simulation_batch;
        std::vector<double> snr(static_cast<std::size_t>(n_samples));
        parallel_for(static_cast<std::size_t>(n_batches), [&](std::size_t b) {
            std::mt19937_64 engine(rng_seed ^ static_cast<std::uint64_t>(b));
            Eigen::MatrixXcd h;
            const std::int64_t begin = static_cast<std::int64_t>(b) * simulation_batch;
            const std::int64_t end = std::min(n_samples, begin + simulation_batch);
            for (std::int64_t i = begin; i < end; ++i)
            {
                model.draw_into(engine, h);
                snr[static_cast<std::size_t>(i)] =
                    zf_snr(h, gamma_s).value_or(std::numeric_limits<double>::quiet_NaN());
            }
        });

        SimulationResult out;
        out.sorted_snr.reserve(snr.size());
        double sum = 0.0, cap = 0.0;
        for (double x : snr)
        {
            if (std::isnan(x))
            {
                ++out.rejected;
                continue;
            }
            out.sorted_snr.push_back(x);
            sum += x;
            cap += std::log2(1.0 + x);
        }
        if (static_cast<double>(out.rejected) > 1e-6 * static_cast<double>(n_samples))
            throw NumericalError("simulate: too many numerically singular channel draws");
        const auto n = static_cast<std::int64_t>(out.sorted_snr.size());
        out.mean_snr = sum / static_cast<double>(n);
        out.capacity_bpcu = cap / static_cast<double>(n);
        std::sort(out.sorted_snr.begin(), out.sorted_snr.end());

        const auto q_index = static_cast<std::size_t>(std::ceil(0.9999 * static_cast<double>(n))) - 1;
        double upper = out.sorted_snr[std::min(q_index, out.sorted_snr.size() - 1)];
        if (!(upper > 0.0))
            upper = 1.0;
        EmpiricalDistribution &hist = out.histogram;
        hist.n_samples = n;
        hist.bin_edges.resize(static_cast<std::size_t>(bins) + 1);
        for (int i = 0; i <= bins; ++i)
            hist.bin_edges[static_cast<std::size_t>(i)] = upper * i / bins;
        hist.counts.assign(static_cast<std::size_t>(bins), 0);
        const double width = upper / bins;
        for (double x : out.sorted_snr)
        {
            const auto idx = static_cast<std::size_t>(std::min<double>(bins - 1, std::floor(x / width)));
            ++hist.counts[idx];
        }
        return out;
    }

    double empirical_outage(std::span<const double> sorted_snr, double threshold, double scale)
    {
        if (!(scale > 0.0))
            throw DomainError("empirical_outage: scale must be positive");
        return empirical_cdf(sorted_snr, threshold / scale);
    }

    double empirical_capacity(std::span<const double> sorted_snr, double scale)
    {
        if (sorted_snr.empty())
            throw DomainError("empirical_capacity: no samples");
        double cap = 0.0;
        for (double x : sorted_snr)
            cap += std::log2(1.0 + scale * x);
        return cap / static_cast<double>(sorted_snr.size());
    }

    double empirical_cdf(std::span<const double> sorted_snr, double t)
    {
        if (sorted_snr.empty())
            throw DomainError("empirical_cdf: no samples");
        const auto it = std::upper_bound(sorted_snr.begin(), sorted_snr.end(), t);
        return static_cast<double>(it - sorted_snr.begin()) / static_cast<double>(sorted_snr.size());
    }
}
