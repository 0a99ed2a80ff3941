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

#include "hgm_mimo/measures.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/series_model.hpp"

namespace hgm_mimo
{
    namespace
    {
        constexpr double u_cap = 1048576.0; // 2^20, in units of Gamma_1

        void check_source(const PdfSource &source)
        {
            if (source.dof < 1)
                throw DomainError("density source: dof must be at least 1");
            if (!(source.gamma1 > 0.0) || !std::isfinite(source.gamma1))
                throw DomainError("density source: gamma1 must be finite and positive");
            if (!(source.noncentrality >= 0.0))
                throw DomainError("density source: noncentrality must be non-negative");
            if (!source.normalized_pdf)
                throw DomainError("density source: no density callback");
        }

        void check_grid_args(int resolution, double u0)
        {
            if (resolution < 100)
                throw DomainError("resolution must be at least 100 panels per decade");
            if (!(u0 > 0.0) || !std::isfinite(u0))
                throw DomainError("u0 must be finite and positive");
        }

        // Log-spaced panels [e_k, e_{k+1}], e_k = u0 10^(k / resolution), with midpoint nodes.
        class PanelTable
        {
        public:
            PanelTable(const PdfSource &source, int resolution, double u0, std::span<const double> limits)
                : source_(source), resolution_(resolution), u0_(u0)
            {
                long k_max = 0;
                for (double U : limits)
                    k_max = std::max(k_max, full_panels(U));
                std::vector<double> nodes;
                nodes.reserve(static_cast<std::size_t>(k_max) + limits.size() + 2);
                for (long k = 0; k < k_max; ++k)
                    nodes.push_back(std::sqrt(edge(k) * edge(k + 1)));
                nodes.push_back(u0_);
                nodes.push_back(0.5 * u0_);
                for (double U : limits)
                    nodes.push_back(U > u0_ ? std::sqrt(edge(full_panels(U)) * U) : U);
                values_ = source_.normalized_pdf(nodes);
                if (values_.size() != nodes.size())
                    throw NumericalError("density source returned the wrong number of values");
                nodes_ = std::move(nodes);
                full_count_ = static_cast<std::size_t>(k_max);
            }

            // Integral of weight(u) p(u) over [0, limits[j]]. Near zero weight(u) p(u) = u^m f(u)
            // with m = N - 1 + weight_order and f smooth; on the sliver [0, u0] f is taken linear
            // through u0 / 2 and u0.
            template <typename Weight>
            double integral(std::size_t j, double U, Weight &&weight, int weight_order) const
            {
                const std::size_t tail = full_count_ + 2 + j;
                const int m = source_.dof - 1 + weight_order;
                if (!(U > u0_))
                    return U * values_[tail] * weight(U) / (m + 1);

                const double g1 = values_[full_count_] * weight(u0_);
                const double gh = values_[full_count_ + 1] * weight(0.5 * u0_);
                const double slope = 2.0 * (g1 - std::ldexp(gh, m)); // f'(u0) u0^(m+1)
                double sum = u0_ * ((g1 - slope) / (m + 1) + slope / (m + 2));

                const long k_end = full_panels(U);
                for (long k = 0; k < k_end; ++k)
                {
                    const double m = nodes_[static_cast<std::size_t>(k)];
                    sum += (edge(k + 1) - edge(k)) * weight(m) * values_[static_cast<std::size_t>(k)];
                }
                sum += (U - edge(k_end)) * weight(nodes_[tail]) * values_[tail];
                return sum;
            }

        private:
            double edge(long k) const
            {
                return u0_ * std::pow(10.0, static_cast<double>(k) / static_cast<double>(resolution_));
            }

            // number of complete panels below U
            long full_panels(double U) const
            {
                if (!(U > u0_))
                    return 0;
                long k = static_cast<long>(std::floor(resolution_ * std::log10(U / u0_)));
                while (k > 0 && edge(k) > U)
                    --k;
                while (edge(k + 1) <= U)
                    ++k;
                return k;
            }

            const PdfSource &source_;
            int resolution_;
            double u0_;
            std::vector<double> nodes_;
            std::vector<double> values_;
            std::size_t full_count_ = 0;
        };

        double checked_probability(double value)
        {
            if (!(value >= -1e-12) || value > 1.0 + 1e-3)
            {
                std::ostringstream msg;
                msg.precision(17);
                msg << "integrated probability " << value << " lies outside [0, 1 + 1e-3]";
                throw NumericalError(msg.str());
            }
            return std::clamp(value, 0.0, 1.0);
        }

        double normalized_cap_limit(int N, double a, double tail_tol, double &bound)
        {
            double U = static_cast<double>(N) + a;
            bound = normalized_tail_bound(U, N, a);
            while (bound >= tail_tol)
            {
                U *= 2.0;
                if (U > u_cap)
                    throw NumericalError("capacity: tail mass stays above tail_tol up to 2^20 Gamma_1");
                bound = normalized_tail_bound(U, N, a);
            }
            return U;
        }

        template <typename F>
        double kronrod(F &&f, double lo, double hi)
        {
            using boost::math::quadrature::gauss_kronrod;
            // the Gauss-Kronrod difference bottoms out near 1e-13 relative; a tighter target
            // only recurses to max depth
            double error = 0.0, l1 = 0.0;
            const double value = gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-12, &error, &l1);
            if (!(error <= 1e-10 * l1))
                throw NumericalError("adaptive quadrature did not reach its tolerance");
            return value;
        }

        double gamma_density(double x, int N)
        {
            if (x == 0.0)
                return N == 1 ? 1.0 : 0.0;
            return std::exp((N - 1) * std::log(x) - x - std::lgamma(static_cast<double>(N)));
        }
    }

    void OutageSpec::validate() const
    {
        if (!(threshold_snr > 0.0) || !std::isfinite(threshold_snr))
            throw ValidationError("outage threshold must be finite and positive");
    }

    PdfSource hgm_source(const DerivedParams &params, int NR, double u0, const IntegratorSettings<double> &settings)
    {
        if (params.noncentrality == 0.0)
            return rayleigh_source(params.dof, params.gamma1);
        if (params.dof < 1 || NR < params.dof)
            throw DomainError("hgm_source: requires NR >= N >= 1");
        PdfSource out;
        out.dof = params.dof;
        out.gamma1 = params.gamma1;
        out.noncentrality = params.noncentrality;
        const double a = params.noncentrality;
        const int N = params.dof;
        out.normalized_pdf = [a, N, NR, u0, settings](std::span<const double> u) {
            return normalized_pdf_hgm(a, N, NR, u, u0, settings);
        };
        return out;
    }

    PdfSource rayleigh_source(int N, double gamma1)
    {
        PdfSource out;
        out.dof = N;
        out.gamma1 = gamma1;
        out.noncentrality = 0.0;
        out.normalized_pdf = [N](std::span<const double> u) {
            std::vector<double> p(u.size());
            std::transform(u.begin(), u.end(), p.begin(), [N](double x) { return gamma_density(x, N); });
            return p;
        };
        check_source(out);
        return out;
    }

    PdfSource memoized(PdfSource source)
    {
        check_source(source);
        struct Cache
        {
            std::mutex lock;
            std::unordered_map<double, double> values;
        };
        auto cache = std::make_shared<Cache>();
        auto inner = std::move(source.normalized_pdf);
        source.normalized_pdf = [cache, inner](std::span<const double> u) {
            std::vector<double> out(u.size());
            std::vector<double> missing;
            std::vector<std::size_t> where;
            {
                const std::lock_guard<std::mutex> guard(cache->lock);
                for (std::size_t i = 0; i < u.size(); ++i)
                {
                    const auto it = cache->values.find(u[i]);
                    if (it != cache->values.end())
                        out[i] = it->second;
                    else
                    {
                        missing.push_back(u[i]);
                        where.push_back(i);
                    }
                }
            }
            if (missing.empty())
                return out;
            const std::vector<double> fresh = inner(missing);
            const std::lock_guard<std::mutex> guard(cache->lock);
            for (std::size_t j = 0; j < missing.size(); ++j)
            {
                out[where[j]] = fresh[j];
                cache->values.emplace(missing[j], fresh[j]);
            }
            return out;
        };
        return source;
    }

    std::vector<PdfPoint> cdf_from_pdf(const PdfGrid &grid)
    {
        if (grid.points.empty())
            throw DomainError("cdf_from_pdf: empty grid");
        for (std::size_t i = 0; i < grid.points.size(); ++i)
        {
            if (!(grid.points[i].t > 0.0))
                throw DomainError("cdf_from_pdf: grid values must be positive");
            if (i > 0 && !(grid.points[i].t > grid.points[i - 1].t))
                throw DomainError("cdf_from_pdf: grid must be strictly increasing");
        }
        const DerivedParams &prm = grid.params;
        double p_zero = 0.0;
        if (prm.dof == 1)
        {
            if (!(prm.gamma1 > 0.0))
                throw DomainError("cdf_from_pdf: grid parameters need gamma1 > 0");
            const int NR = std::max(grid.n_rx, 1);
            p_zero = pdf_boundary<double>(prm.noncentrality, 1, NR) / prm.gamma1;
        }

        std::vector<PdfPoint> out(grid.points.size());
        double acc = 0.0, t_prev = 0.0, p_prev = p_zero;
        for (std::size_t i = 0; i < grid.points.size(); ++i)
        {
            const auto &pt = grid.points[i];
            acc += 0.5 * (pt.t - t_prev) * (pt.pdf + p_prev);
            out[i] = {pt.t, acc};
            t_prev = pt.t;
            p_prev = pt.pdf;
        }
        return out;
    }

    std::vector<double> cdf_curve(const PdfSource &source, std::span<const double> thresholds, int resolution,
                                  double u0)
    {
        check_source(source);
        check_grid_args(resolution, u0);
        std::vector<double> limits(thresholds.size());
        for (std::size_t j = 0; j < thresholds.size(); ++j)
        {
            OutageSpec{thresholds[j]}.validate();
            limits[j] = thresholds[j] / source.gamma1;
        }
        const PanelTable table(source, resolution, u0, limits);
        std::vector<double> out(limits.size());
        for (std::size_t j = 0; j < limits.size(); ++j)
            out[j] = checked_probability(table.integral(j, limits[j], [](double) { return 1.0; }, 0));
        return out;
    }

    double outage_probability(const PdfSource &source, const OutageSpec &spec, int resolution, double u0)
    {
        const double th = spec.threshold_snr;
        return cdf_curve(source, std::span<const double>(&th, 1), resolution, u0).front();
    }

    std::vector<double> outage_curve(const PdfSource &source, std::span<const double> gamma1_values,
                                     const OutageSpec &spec, int resolution, double u0)
    {
        check_source(source);
        check_grid_args(resolution, u0);
        spec.validate();
        std::vector<double> limits(gamma1_values.size());
        for (std::size_t j = 0; j < limits.size(); ++j)
        {
            if (!(gamma1_values[j] > 0.0) || !std::isfinite(gamma1_values[j]))
                throw DomainError("outage_curve: gamma1 values must be finite and positive");
            limits[j] = spec.threshold_snr / gamma1_values[j];
        }
        const PanelTable table(source, resolution, u0, limits);
        std::vector<double> out(limits.size());
        for (std::size_t j = 0; j < limits.size(); ++j)
            out[j] = checked_probability(table.integral(j, limits[j], [](double) { return 1.0; }, 0));
        return out;
    }

    double normalized_tail_bound(double U, int N, double a)
    {
        // min over x in [0, 1) of (1 - x)^-N exp(a x / (1 - x) - x U); with y = 1 / (1 - x) the
        // stationarity condition is a y^2 + N y - U = 0
        const double n = static_cast<double>(N);
        if (!(U > n + a))
            return 1.0;
        const double y = a > 0.0 ? (-n + std::sqrt(n * n + 4.0 * a * U)) / (2.0 * a) : U / n;
        const double x = 1.0 - 1.0 / y;
        return std::min(1.0, std::exp(n * std::log(y) + a * (y - 1.0) - x * U));
    }

    std::vector<CapacityResult> capacity_curve(const PdfSource &source, std::span<const double> gamma1_values,
                                               int resolution, double tail_tol, double u0)
    {
        check_source(source);
        check_grid_args(resolution, u0);
        if (!(tail_tol > 0.0) || tail_tol > 1e-6)
            throw DomainError("capacity: tail_tol must lie in (0, 1e-6]");
        for (double g : gamma1_values)
            if (!(g > 0.0) || !std::isfinite(g))
                throw DomainError("capacity_curve: gamma1 values must be finite and positive");

        double bound = 0.0;
        const double U = normalized_cap_limit(source.dof, source.noncentrality, tail_tol, bound);
        const std::vector<double> limits(gamma1_values.size(), U);
        const PanelTable table(source, resolution, u0, limits);
        std::vector<CapacityResult> out(limits.size());
        for (std::size_t j = 0; j < limits.size(); ++j)
        {
            const double g = gamma1_values[j];
            out[j].bpcu = table.integral(j, U, [g](double u) { return std::log2(1.0 + g * u); }, 1);
            out[j].tail_mass_dropped = bound;
        }
        return out;
    }

    CapacityResult ergodic_capacity(const PdfSource &source, int resolution, double tail_tol, double u0)
    {
        const double g = source.gamma1;
        return capacity_curve(source, std::span<const double>(&g, 1), resolution, tail_tol, u0).front();
    }

    double rayleigh_pdf(double t, int N, double gamma1)
    {
        if (!(t >= 0.0))
            throw DomainError("rayleigh_pdf: requires t >= 0");
        if (N < 1 || !(gamma1 > 0.0))
            throw DomainError("rayleigh_pdf: requires N >= 1 and gamma1 > 0");
        return gamma_density(t / gamma1, N) / gamma1;
    }

    double rayleigh_outage(double threshold, int N, double gamma1)
    {
        if (!(threshold > 0.0))
            throw DomainError("rayleigh_outage: threshold must be positive");
        if (N < 1 || !(gamma1 > 0.0) || !std::isfinite(gamma1))
            throw DomainError("rayleigh_outage: requires N >= 1 and finite gamma1 > 0");
        const double x = threshold / gamma1;
        const double n = static_cast<double>(N);
        const auto f = [N](double u) { return gamma_density(u, N); };
        // pieces around the bulk of the mass so that no rule step skips it
        const double b1 = n, b2 = n + 10.0 * std::sqrt(n) + 10.0;
        // below the mode, u = h v keeps the integrand of order one however small the mass is
        const double h = std::min(x, b1);
        const auto scaled = [N, h](double v) { return v == 0.0 ? (N == 1 ? 1.0 : 0.0) : std::exp((N - 1) * std::log(v) - h * v); };
        double sum = std::exp(n * std::log(h) - std::lgamma(n)) * kronrod(scaled, 0.0, 1.0);
        if (x > b1)
            sum += kronrod(f, b1, std::min(x, b2));
        if (x > b2)
            sum += kronrod(f, b2, x);
        return std::clamp(sum, 0.0, 1.0);
    }

    double rayleigh_capacity(int N, double gamma1)
    {
        if (N < 1 || !(gamma1 > 0.0) || !std::isfinite(gamma1))
            throw DomainError("rayleigh_capacity: requires N >= 1 and finite gamma1 > 0");
        const double n = static_cast<double>(N);
        const auto f = [N, gamma1](double u) { return std::log2(1.0 + gamma1 * u) * gamma_density(u, N); };
        const double b1 = n, b2 = n + 10.0 * std::sqrt(n) + 10.0;
        return kronrod(f, 0.0, b1) + kronrod(f, b1, b2) +
               kronrod(f, b2, std::numeric_limits<double>::infinity());
    }
}
