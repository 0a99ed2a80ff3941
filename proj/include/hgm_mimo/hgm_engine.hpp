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

// Holonomic gradient method for the normalized ZF SNR density p(t, a).
//
// The vector y = (p, dp/dt, d2p/dt2) satisfies two Pfaffian systems,
//
//   dy/dt = P(t, a) y,        dy/da = (1/a) Q(t, a) y,
//
// and on the line a = c u, t = u they combine into the single system
//
//   dy/du = [P(u, c u) + Q(u, c u) / u] y,
//
// which is integrated from a small anchor u0 (where the series is exact to machine precision) to
// the requested SNR. Each output point has its own line (c = a / u_m).

#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/ode.hpp"
#include "hgm_mimo/scenario.hpp"
#include "hgm_mimo/series_model.hpp"

namespace hgm_mimo
{
    template <typename Scalar>
    using CompanionMatrixT = Eigen::Matrix<Scalar, 3, 3>;
    using CompanionMatrix = CompanionMatrixT<double>;

    /// dy/dt = P(t, a) y; row 3 is the third-order t-ODE for p.
    template <typename Scalar>
    CompanionMatrixT<Scalar> companion_p(Scalar t, Scalar a, int N, int NR)
    {
        if (!(t > Scalar(0)))
            throw DomainError("companion_p: requires t > 0");
        const Scalar n = Scalar(N), nr = Scalar(NR), t2 = t * t;
        CompanionMatrixT<Scalar> P = CompanionMatrixT<Scalar>::Zero();
        P(0, 1) = Scalar(1);
        P(1, 2) = Scalar(1);
        P(2, 0) = ((nr - Scalar(2)) * t + (n - Scalar(1)) * (Scalar(2) - nr - a)) / t2;
        P(2, 1) = -(t2 + (Scalar(6) - Scalar(2) * n - nr - a) * t + (n - Scalar(1)) * (n - Scalar(2))) / t2;
        P(2, 2) = -(Scalar(2) * t2 - (Scalar(2) * n - Scalar(4)) * t) / t2;
        return P;
    }

    /// a dy/da = Q(t, a) y.
    template <typename Scalar>
    CompanionMatrixT<Scalar> companion_q(Scalar t, Scalar a, int N, int NR)
    {
        if (!(t > Scalar(0)))
            throw DomainError("companion_q: requires t > 0");
        const Scalar n = Scalar(N), nr = Scalar(NR), n2 = n * n, t2 = t * t;
        CompanionMatrixT<Scalar> Q;
        Q(0, 0) = Scalar(-1);
        Q(0, 1) = n - t - Scalar(2);
        Q(0, 2) = -t;

        Q(1, 0) = Scalar(2) - nr + (Scalar(2) - Scalar(2) * n - nr - a + n * nr + n * a) / t;
        Q(1, 1) = Scalar(4) - Scalar(2) * n - nr - a + t + (Scalar(2) + n2 - Scalar(3) * n) / t;
        Q(1, 2) = Scalar(1) - n + t;

        Q(2, 0) = Scalar(-2) + nr + (Scalar(-4) + Scalar(4) * n + Scalar(2) * nr + a - Scalar(2) * n * nr - n * a) / t +
                  (Scalar(-4) + Scalar(6) * n + Scalar(2) * nr + Scalar(2) * a - Scalar(3) * n * nr - Scalar(3) * n * a +
                   n2 * nr + n2 * a - Scalar(2) * n2) /
                      t2;
        Q(2, 1) = Scalar(3) * n - Scalar(4) + a - t + (Scalar(-6) - Scalar(3) * n2 + Scalar(9) * n) / t +
                  (Scalar(-4) + Scalar(8) * n - Scalar(5) * n2 + n2 * n) / t2;
        Q(2, 2) = Scalar(-1) + Scalar(2) * n - nr - a - t + (Scalar(-2) - n2 + Scalar(3) * n) / t;
        return Q;
    }

    /// P(u, c u) + Q(u, c u) / u.
    template <typename Scalar>
    CompanionMatrixT<Scalar> combined_matrix(Scalar u, Scalar c, int N, int NR)
    {
        if (!(u > Scalar(0)))
            throw DomainError("combined_matrix: requires u > 0");
        const Scalar a = c * u;
        return companion_p<Scalar>(u, a, N, NR) + companion_q<Scalar>(u, a, N, NR) / u;
    }

    template <typename Scalar>
    Eigen::Matrix<Scalar, 3, 1> combined_rhs(Scalar u, Scalar c, const Eigen::Matrix<Scalar, 3, 1> &state, int N,
                                             int NR)
    {
        return combined_matrix<Scalar>(u, c, N, NR) * state;
    }

    template <typename Scalar>
    Eigen::Matrix<Scalar, 3, 1> combined_rhs(Scalar u, Scalar c, const StateVectorT<Scalar> &state, int N, int NR)
    {
        return combined_rhs<Scalar>(u, c, state.vector(), N, NR);
    }

    namespace detail
    {
        // Power-of-two factor bringing the max-norm of y near 1. The systems are linear and
        // homogeneous, so integrating y * s and dividing by s is exact in the scaling and makes
        // abs_tol act relative to the anchor magnitude.
        template <typename Scalar>
        Scalar unit_scale(const Eigen::Matrix<Scalar, 3, 1> &y)
        {
            const Scalar m = y.cwiseAbs().maxCoeff();
            if (!(m > Scalar(0)) || !std::isfinite(static_cast<double>(m)))
                return Scalar(1);
            return std::ldexp(Scalar(1), -std::ilogb(m));
        }

        template <typename Scalar, typename Rhs>
        Eigen::Matrix<Scalar, 3, 1> integrate_scaled(Rhs &&rhs, Scalar from, Scalar to,
                                                     const Eigen::Matrix<Scalar, 3, 1> &y0,
                                                     const IntegratorSettings<Scalar> &settings)
        {
            const Scalar s = unit_scale<Scalar>(y0);
            const Eigen::Matrix<Scalar, 3, 1> y = integrate<Scalar, 3>(rhs, from, to, Eigen::Matrix<Scalar, 3, 1>(y0 * s),
                                                                     settings);
            return y / s;
        }
    }

    /// Default anchor for the line integration.
    inline constexpr double default_u0 = 1e-2;

    /// (p, p', p'') at normalized (t, a) with a > 0, by integrating the combined system along
    /// a = c u from the series anchor at (u0, c u0).
    template <typename Scalar>
    StateVectorT<Scalar> hgm_point(Scalar t, Scalar a, int N, int NR, Scalar u0,
                                   const IntegratorSettings<Scalar> &settings = {},
                                   const TruncationPolicyT<Scalar> &policy = {})
    {
        if (!(a > Scalar(0)))
            throw DomainError("hgm_point: requires a > 0 (use the Rayleigh closed form for a = 0)");
        if (!(t > Scalar(0)) || !(u0 > Scalar(0)) || u0 > t)
            throw DomainError("hgm_point: requires 0 < u0 <= t");
        const Scalar c = a / t;
        const StateVectorT<Scalar> anchor = initial_state<Scalar>(u0, c, N, NR, policy);
        if (u0 == t)
            return anchor;
        const auto rhs = [c, N, NR](Scalar u, const Eigen::Matrix<Scalar, 3, 1> &y) -> Eigen::Matrix<Scalar, 3, 1> {
            return combined_rhs<Scalar>(u, c, y, N, NR);
        };
        const auto y = detail::integrate_scaled<Scalar>(rhs, u0, t, anchor.vector(), settings);
        return StateVectorT<Scalar>::from_vector(y, t, a);
    }

    /// Continue a known state along t at fixed a with dy/dt = P(t, a) y.
    template <typename Scalar>
    StateVectorT<Scalar> continue_along_t(const StateVectorT<Scalar> &start, Scalar t_end, int N, int NR,
                                          const IntegratorSettings<Scalar> &settings = {})
    {
        if (!(start.t > Scalar(0)) || !(t_end > Scalar(0)))
            throw DomainError("continue_along_t: requires t > 0");
        const Scalar a = start.a;
        const auto rhs = [a, N, NR](Scalar t, const Eigen::Matrix<Scalar, 3, 1> &y) -> Eigen::Matrix<Scalar, 3, 1> {
            return companion_p<Scalar>(t, a, N, NR) * y;
        };
        const auto y = detail::integrate_scaled<Scalar>(rhs, start.t, t_end, start.vector(), settings);
        return StateVectorT<Scalar>::from_vector(y, t_end, a);
    }

    /// Continue a known state along a at fixed t with dy/da = Q(t, a) y / a.
    ///
    /// Kept for comparison with the line method: started from a small a0 at moderate-to-large t
    /// the anchor p(t, a0) is tiny and the integration loses accuracy.
    template <typename Scalar>
    StateVectorT<Scalar> continue_along_a(const StateVectorT<Scalar> &start, Scalar a_end, int N, int NR,
                                          const IntegratorSettings<Scalar> &settings = {})
    {
        if (!(start.a > Scalar(0)) || !(a_end > Scalar(0)))
            throw DomainError("continue_along_a: requires a > 0");
        const Scalar t = start.t;
        const auto rhs = [t, N, NR](Scalar a, const Eigen::Matrix<Scalar, 3, 1> &y) -> Eigen::Matrix<Scalar, 3, 1> {
            return companion_q<Scalar>(t, a, N, NR) * y / a;
        };
        const auto y = detail::integrate_scaled<Scalar>(rhs, start.a, a_end, start.vector(), settings);
        return StateVectorT<Scalar>::from_vector(y, t, a_end);
    }

    struct PdfPoint
    {
        double t = 0.0;   // SNR, linear units
        double pdf = 0.0; // p_gamma1(t, a)
    };

    struct PdfGrid
    {
        std::vector<PdfPoint> points;
        DerivedParams params;
        int n_rx = 0;
    };

    /// Anchor abscissa for the line through (u, a): u0, lowered when needed so that the anchor
    /// noncentrality c u0 = a u0 / u stays below min(a / 10, 1), where the series is exact.
    inline double line_anchor(double u, double a, double u0)
    {
        return std::min(u0, u / std::max(10.0, a));
    }

    /// Stream-1 SNR density on a grid of linear SNR values.
    ///
    /// For each t: u = t / Gamma_1, c = a / u, integrate the combined system from the anchor
    /// line_anchor(u, a, u0) to u and emit p(u, a) / Gamma_1. Points are independent and evaluated
    /// concurrently (see worker_count); output order follows t_grid. Requires a > 0, strictly
    /// increasing t > 0 and u0 <= min(t) / (10 Gamma_1). Values in [-1e-10, 0) are clamped to 0.
    PdfGrid pdf_hgm(const DerivedParams &params, int NR, std::span<const double> t_grid, double u0 = default_u0,
                    const IntegratorSettings<double> &settings = {});

    /// Normalized p(u, a) for arbitrary (unordered) u > 0, each from its own line anchor.
    std::vector<double> normalized_pdf_hgm(double a, int N, int NR, std::span<const double> u_values,
                                           double u0 = default_u0, const IntegratorSettings<double> &settings = {});
}
