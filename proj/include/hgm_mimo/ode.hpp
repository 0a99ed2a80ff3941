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

// Adaptive embedded Runge-Kutta 5(4) integrator with Dormand-Prince coefficients.
//
// The integrator works on fixed-size Eigen column vectors and any scalar type with the usual
// arithmetic and std::abs/std::pow overloads (double, long double). It is deterministic: the same
// inputs always produce the same sequence of steps.

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <utility>

#include "hgm_mimo/errors.hpp"

namespace hgm_mimo
{
    template <typename Scalar>
    struct IntegratorSettings
    {
        Scalar rel_tol = Scalar(1e-12);
        Scalar abs_tol = Scalar(1e-14);
        std::int64_t max_steps = 2'000'000;
        Scalar min_step = Scalar(1e-14); // absolute lower bound on |h|

        void validate() const
        {
            if (!(rel_tol > Scalar(0)) || !(abs_tol > Scalar(0)))
                throw ValidationError("IntegratorSettings: rel_tol and abs_tol must be positive");
            if (max_steps < 1)
                throw ValidationError("IntegratorSettings: max_steps must be at least 1");
            if (!(min_step >= Scalar(0)))
                throw ValidationError("IntegratorSettings: min_step must be non-negative");
        }
    };

    struct IntegrationStats
    {
        std::int64_t accepted_steps = 0;
        std::int64_t rejected_steps = 0;
        std::int64_t rhs_evaluations = 0;
    };

    template <typename Scalar, int Dim>
    struct IntegrationResult
    {
        Eigen::Matrix<Scalar, Dim, 1> state;
        IntegrationStats stats;
    };

    namespace detail
    {
        template <typename Scalar>
        struct DormandPrinceTableau
        {
            static constexpr Scalar r(long num, long den) { return Scalar(num) / Scalar(den); }

            const Scalar c2 = r(1, 5), c3 = r(3, 10), c4 = r(4, 5), c5 = r(8, 9);

            const Scalar a21 = r(1, 5);
            const Scalar a31 = r(3, 40), a32 = r(9, 40);
            const Scalar a41 = r(44, 45), a42 = r(-56, 15), a43 = r(32, 9);
            const Scalar a51 = r(19372, 6561), a52 = r(-25360, 2187), a53 = r(64448, 6561), a54 = r(-212, 729);
            const Scalar a61 = r(9017, 3168), a62 = r(-355, 33), a63 = r(46732, 5247), a64 = r(49, 176),
                         a65 = r(-5103, 18656);
            // 5th-order weights (also the 7th stage, FSAL)
            const Scalar b1 = r(35, 384), b3 = r(500, 1113), b4 = r(125, 192), b5 = r(-2187, 6784), b6 = r(11, 84);
            // b - b_hat, the embedded error weights
            const Scalar e1 = r(71, 57600), e3 = r(-71, 16695), e4 = r(71, 1920), e5 = r(-17253, 339200),
                         e6 = r(22, 525), e7 = r(-1, 40);
        };

        template <typename Scalar, int Dim>
        Scalar error_norm(const Eigen::Matrix<Scalar, Dim, 1> &err,
                          const Eigen::Matrix<Scalar, Dim, 1> &y_old,
                          const Eigen::Matrix<Scalar, Dim, 1> &y_new,
                          const IntegratorSettings<Scalar> &settings)
        {
            using std::abs;
            using std::max;
            Scalar worst = Scalar(0);
            for (Eigen::Index i = 0; i < err.size(); ++i)
            {
                const Scalar scale = settings.abs_tol + settings.rel_tol * max(abs(y_old[i]), abs(y_new[i]));
                worst = max(worst, abs(err[i]) / scale);
            }
            return worst;
        }
    }

    /// Integrate dy/du = rhs(u, y) from u_start to u_end (either direction) starting at y0.
    ///
    /// Each accepted step satisfies |err_i| <= abs_tol + rel_tol * max(|y_i|, |y_new_i|) for every
    /// component, with the 5th-order solution propagated (local extrapolation).
    /// Throws NumericalError when the step size falls below settings.min_step (or below the
    /// resolution of u) or when settings.max_steps is exceeded.
    template <typename Scalar, int Dim, typename Rhs>
    IntegrationResult<Scalar, Dim> integrate_detailed(Rhs &&rhs, Scalar u_start, Scalar u_end,
                                                      const Eigen::Matrix<Scalar, Dim, 1> &y0,
                                                      const IntegratorSettings<Scalar> &settings)
    {
        using std::abs;
        using std::max;
        using std::min;
        using std::pow;
        using std::sqrt;
        using Vec = Eigen::Matrix<Scalar, Dim, 1>;

        settings.validate();
        if (!y0.allFinite())
            throw DomainError("integrate: initial state must be finite");

        IntegrationResult<Scalar, Dim> out{y0, {}};
        if (u_end == u_start)
            return out;

        const detail::DormandPrinceTableau<Scalar> tb{};
        const Scalar span = u_end - u_start;
        const Scalar dir = span > Scalar(0) ? Scalar(1) : Scalar(-1);
        const Scalar eps = std::numeric_limits<Scalar>::epsilon();

        Vec y = y0;
        Scalar u = u_start;
        Vec k1 = rhs(u, y);
        ++out.stats.rhs_evaluations;

        // Initial step guess (Hairer, Norsett & Wanner, Solving ODEs I, II.4)
        Scalar h;
        {
            Scalar d0 = Scalar(0), d1 = Scalar(0);
            for (Eigen::Index i = 0; i < y.size(); ++i)
            {
                const Scalar sc = settings.abs_tol + settings.rel_tol * abs(y[i]);
                d0 = max(d0, abs(y[i]) / sc);
                d1 = max(d1, abs(k1[i]) / sc);
            }
            Scalar h0 = (d0 < Scalar(1e-5) || d1 < Scalar(1e-5)) ? Scalar(1e-6) : Scalar(0.01) * d0 / d1;
            h0 = min(h0, abs(span));
            const Vec y1 = y + dir * h0 * k1;
            const Vec f1 = rhs(u + dir * h0, y1);
            ++out.stats.rhs_evaluations;
            Scalar d2 = Scalar(0);
            for (Eigen::Index i = 0; i < y.size(); ++i)
            {
                const Scalar sc = settings.abs_tol + settings.rel_tol * abs(y[i]);
                d2 = max(d2, abs(f1[i] - k1[i]) / sc);
            }
            d2 /= h0;
            const Scalar h1 = max(d1, d2) <= Scalar(1e-15) ? max(Scalar(1e-6), h0 * Scalar(1e-3))
                                                            : pow(Scalar(0.01) / max(d1, d2), Scalar(1) / Scalar(5));
            h = min(Scalar(100) * h0, h1);
            h = min(h, abs(span));
        }

        const Scalar safety = Scalar(0.9);
        const Scalar grow_max = Scalar(5);
        const Scalar shrink_min = Scalar(0.2);
        bool last_rejected = false;
        std::int64_t steps = 0;

        while (dir * (u_end - u) > Scalar(0))
        {
            if (steps++ >= settings.max_steps)
            {
                std::ostringstream msg;
                msg << "integrate: exceeded max_steps (" << settings.max_steps << ") at u = " << u;
                throw NumericalError(msg.str());
            }

            bool final_step = false;
            if (h >= abs(u_end - u))
            {
                h = abs(u_end - u);
                final_step = true;
            }
            const Scalar min_resolvable = Scalar(16) * eps * max(abs(u), Scalar(1e-300));
            if (h < settings.min_step || h < min_resolvable)
            {
                std::ostringstream msg;
                msg << "integrate: step size underflow (h = " << h << ") at u = " << u
                    << "; the problem may be stiff";
                throw NumericalError(msg.str());
            }

            const Scalar hs = dir * h;
            const Vec k2 = rhs(u + tb.c2 * hs, Vec(y + hs * (tb.a21 * k1)));
            const Vec k3 = rhs(u + tb.c3 * hs, Vec(y + hs * (tb.a31 * k1 + tb.a32 * k2)));
            const Vec k4 = rhs(u + tb.c4 * hs, Vec(y + hs * (tb.a41 * k1 + tb.a42 * k2 + tb.a43 * k3)));
            const Vec k5 = rhs(u + tb.c5 * hs,
                               Vec(y + hs * (tb.a51 * k1 + tb.a52 * k2 + tb.a53 * k3 + tb.a54 * k4)));
            const Vec k6 = rhs(u + hs,
                               Vec(y + hs * (tb.a61 * k1 + tb.a62 * k2 + tb.a63 * k3 + tb.a64 * k4 + tb.a65 * k5)));
            const Scalar u_new = final_step ? u_end : u + hs;
            const Vec y_new = y + hs * (tb.b1 * k1 + tb.b3 * k3 + tb.b4 * k4 + tb.b5 * k5 + tb.b6 * k6);
            const Vec k7 = rhs(u_new, y_new);
            out.stats.rhs_evaluations += 6;

            const Vec err = hs * (tb.e1 * k1 + tb.e3 * k3 + tb.e4 * k4 + tb.e5 * k5 + tb.e6 * k6 + tb.e7 * k7);
            const Scalar err_norm = detail::error_norm<Scalar, Dim>(err, y, y_new, settings);

            if (err_norm <= Scalar(1) && y_new.allFinite())
            {
                u = u_new;
                y = y_new;
                k1 = k7;
                ++out.stats.accepted_steps;
                Scalar factor = err_norm == Scalar(0) ? grow_max
                                                      : min(grow_max, max(shrink_min, safety * pow(err_norm, Scalar(-0.2))));
                if (last_rejected)
                    factor = min(factor, Scalar(1));
                h *= factor;
                last_rejected = false;
            }
            else
            {
                ++out.stats.rejected_steps;
                const Scalar factor = (y_new.allFinite() && err_norm > Scalar(0))
                                          ? max(shrink_min, safety * pow(err_norm, Scalar(-0.2)))
                                          : shrink_min;
                h *= factor;
                last_rejected = true;
            }
        }

        out.state = y;
        return out;
    }

    /// Convenience wrapper returning only the final state.
    template <typename Scalar, int Dim, typename Rhs>
    Eigen::Matrix<Scalar, Dim, 1> integrate(Rhs &&rhs, Scalar u_start, Scalar u_end,
                                            const Eigen::Matrix<Scalar, Dim, 1> &y0,
                                            const IntegratorSettings<Scalar> &settings = {})
    {
        return integrate_detailed<Scalar, Dim>(std::forward<Rhs>(rhs), u_start, u_end, y0, settings).state;
    }
}
