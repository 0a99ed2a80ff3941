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

#include "hgm_mimo/hgm_engine.hpp"

#include <cstdlib>
#include <sstream>
#include <string>
#include <thread>

#include "hgm_mimo/parallel.hpp"

namespace hgm_mimo
{
    unsigned worker_count()
    {
        if (const char *env = std::getenv("HGM_MIMO_THREADS"))
        {
            char *end = nullptr;
            const long n = std::strtol(env, &end, 10);
            if (end != env && *end == '\0' && n >= 1)
                return static_cast<unsigned>(n);
        }
        return std::max(1u, std::thread::hardware_concurrency());
    }

    namespace
    {
        double line_point(double u, double a, int N, int NR, double u0, const IntegratorSettings<double> &settings)
        {
            try
            {
                return hgm_point<double>(u, a, N, NR, line_anchor(u, a, u0), settings).p;
            }
            catch (const NumericalError &e)
            {
                std::ostringstream msg;
                msg.precision(17);
                msg << "HGM failed at normalized SNR u = " << u << ", a = " << a << ": " << e.what();
                throw NumericalError(msg.str());
            }
        }
    }

    std::vector<double> normalized_pdf_hgm(double a, int N, int NR, std::span<const double> u_values, double u0,
                                           const IntegratorSettings<double> &settings)
    {
        if (!(a > 0.0) || !std::isfinite(a))
            throw DomainError("normalized_pdf_hgm: requires finite a > 0");
        if (N < 1 || NR < N)
            throw DomainError("normalized_pdf_hgm: requires NR >= N >= 1");
        if (!(u0 > 0.0))
            throw DomainError("normalized_pdf_hgm: u0 must be positive");
        settings.validate();
        for (double u : u_values)
            if (!(u > 0.0) || !std::isfinite(u))
                throw DomainError("normalized_pdf_hgm: every u must be finite and positive");

        std::vector<double> out(u_values.size());
        parallel_for(u_values.size(),
                     [&](std::size_t i) { out[i] = line_point(u_values[i], a, N, NR, u0, settings); });
        return out;
    }

    PdfGrid pdf_hgm(const DerivedParams &params, int NR, std::span<const double> t_grid, double u0,
                    const IntegratorSettings<double> &settings)
    {
        const double a = params.noncentrality;
        const double g1 = params.gamma1;
        if (!(a > 0.0))
            throw DomainError("pdf_hgm: requires a > 0 (use rayleigh_pdf for a = 0)");
        if (!(g1 > 0.0))
            throw DomainError("pdf_hgm: gamma1 must be positive");
        if (t_grid.empty())
            throw DomainError("pdf_hgm: empty grid");
        for (std::size_t i = 0; i < t_grid.size(); ++i)
        {
            if (!(t_grid[i] > 0.0) || !std::isfinite(t_grid[i]))
                throw DomainError("pdf_hgm: grid values must be finite and positive");
            if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
                throw DomainError("pdf_hgm: grid must be strictly increasing");
        }
        if (!(u0 > 0.0) || u0 > t_grid.front() / (10.0 * g1))
            throw DomainError("pdf_hgm: requires 0 < u0 <= min(t) / (10 gamma1)");

        std::vector<double> u(t_grid.size());
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] = t_grid[i] / g1;
        const std::vector<double> p = normalized_pdf_hgm(a, params.dof, NR, u, u0, settings);

        PdfGrid out;
        out.params = params;
        out.n_rx = NR;
        out.points.reserve(p.size());
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            double pdf = p[i] / g1;
            if (pdf < 0.0)
            {
                if (pdf < -1e-10)
                {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "pdf_hgm: negative density " << pdf << " at t = " << t_grid[i];
                    throw NumericalError(msg.str());
                }
                pdf = 0.0;
            }
            out.points.push_back({t_grid[i], pdf});
        }
        return out;
    }
}
