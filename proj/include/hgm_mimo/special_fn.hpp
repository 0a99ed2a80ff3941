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

// Confluent hypergeometric function 1F1(N; NR; sigma) for integer parameters: truncated power
// series around the origin, and the holonomic gradient method (numerical solution of Kummer's
// equation sigma f'' + (NR - sigma) f' - N f = 0 started from a series-evaluated anchor).

#pragma once

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <sstream>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/ode.hpp"

namespace hgm_mimo
{
    /// Stopping and breakdown-detection rules shared by every truncated infinite series.
    ///
    /// A series is declared converged only when (a) two consecutive terms (or term blocks) are
    /// below rel_tol times the partial sum and the remaining tail provably decays, (b) no partial
    /// quantity exceeded overflow_guard, and (c) the sum of absolute term values is at most
    /// max_cancellation times the absolute value of the sum. Condition (c) detects the loss of
    /// significant digits to cancellation that makes alternating expansions unusable.
    template <typename Scalar>
    struct TruncationPolicyT
    {
        Scalar rel_tol = Scalar(1e-13);
        int n_max = 10'000;
        Scalar overflow_guard = Scalar(1e300);
        // Worst-case rounding error eps * max_cancellation = 1e-3 relative.
        Scalar max_cancellation = Scalar(1e-3) / std::numeric_limits<Scalar>::epsilon();

        void validate() const
        {
            if (!(rel_tol > Scalar(0) && rel_tol <= Scalar(1e-3)))
                throw ValidationError("TruncationPolicy: rel_tol must lie in (0, 1e-3]");
            if (n_max < 50)
                throw ValidationError("TruncationPolicy: n_max must be at least 50");
            if (!(overflow_guard > Scalar(1)))
                throw ValidationError("TruncationPolicy: overflow_guard must exceed 1");
            if (!(max_cancellation >= Scalar(1)))
                throw ValidationError("TruncationPolicy: max_cancellation must be at least 1");
        }
    };
    using TruncationPolicy = TruncationPolicyT<double>;

    template <typename Scalar>
    struct SeriesResultT
    {
        Scalar value = Scalar(0);
        int terms_used = 0;
        bool converged = false;
        Scalar last_term_magnitude = Scalar(0);
        Scalar abs_sum = Scalar(0); // sum of |term|, the cancellation yardstick

        Scalar cancellation_ratio() const
        {
            using std::abs;
            return value == Scalar(0) ? std::numeric_limits<Scalar>::infinity() : abs_sum / abs(value);
        }
    };
    using SeriesResult = SeriesResultT<double>;

    /// Value of 1F1 and its first sigma-derivative.
    template <typename Scalar>
    struct Hyp1F1StateT
    {
        Scalar f = Scalar(0);
        Scalar f1 = Scalar(0);
    };
    using Hyp1F1State = Hyp1F1StateT<double>;

    /// Rising factorial (x)_n = x (x + 1) ... (x + n - 1), (x)_0 = 1.
    template <typename Scalar>
    Scalar pochhammer(Scalar x, int n)
    {
        if (n < 0)
            throw DomainError("pochhammer: n must be non-negative");
        Scalar out = Scalar(1);
        for (int k = 0; k < n; ++k)
            out *= x + Scalar(k);
        return out;
    }

    /// Truncated series sum_n (N)_n / (NR)_n sigma^n / n!.
    ///
    /// Non-convergence (term cap, overflow, cancellation) is reported through the converged flag.
    template <typename Scalar>
    SeriesResultT<Scalar> hyp1f1_series(int N, int NR, Scalar sigma, const TruncationPolicyT<Scalar> &policy)
    {
        using std::abs;
        policy.validate();
        if (N < 0 || NR < 1)
            throw DomainError("hyp1f1_series: requires N >= 0 and NR >= 1");

        SeriesResultT<Scalar> out;
        Scalar term = Scalar(1);
        Scalar sum = Scalar(1);
        Scalar abs_sum = Scalar(1);
        int small_run = 0;
        int n = 0;
        bool overflow = false;
        bool stopped = false;
        for (; n < policy.n_max; ++n)
        {
            // term_{n+1} = term_n * (N + n) / (NR + n) * sigma / (n + 1)
            const Scalar ratio = Scalar(N + n) / Scalar(NR + n) * sigma / Scalar(n + 1);
            term *= ratio;
            sum += term;
            abs_sum += abs(term);
            if (!std::isfinite(static_cast<double>(sum)) || abs(sum) > policy.overflow_guard ||
                abs_sum > policy.overflow_guard)
            {
                overflow = true;
                break;
            }
            small_run = abs(term) <= policy.rel_tol * abs(sum) ? small_run + 1 : 0;
            // the remaining ratios are then bounded by 1/2, so the tail is at most |term|
            const Scalar next_ratio = abs(Scalar(N + n + 1) / Scalar(NR + n + 1) * sigma / Scalar(n + 2));
            if (small_run >= 2 && next_ratio <= Scalar(0.5))
            {
                stopped = true;
                break;
            }
        }
        out.value = sum;
        out.terms_used = n + 2; // includes the leading 1
        out.last_term_magnitude = abs(term);
        out.abs_sum = abs_sum;
        out.converged = stopped && !overflow && abs_sum <= policy.max_cancellation * abs(sum);
        return out;
    }

    template <typename Scalar>
    SeriesResultT<Scalar> hyp1f1_series(int N, int NR, Scalar sigma, Scalar rel_tol)
    {
        TruncationPolicyT<Scalar> policy;
        policy.rel_tol = rel_tol;
        return hyp1f1_series<Scalar>(N, NR, sigma, policy);
    }

    /// d/dsigma 1F1(N; NR; sigma) = N / NR * 1F1(N + 1; NR + 1; sigma), by series.
    template <typename Scalar>
    SeriesResultT<Scalar> hyp1f1_deriv_series(int N, int NR, Scalar sigma, const TruncationPolicyT<Scalar> &policy)
    {
        if (N < 0 || NR < 1)
            throw DomainError("hyp1f1_deriv_series: requires N >= 0 and NR >= 1");
        auto shifted = hyp1f1_series<Scalar>(N + 1, NR + 1, sigma, policy);
        const Scalar scale = Scalar(N) / Scalar(NR);
        shifted.value *= scale;
        shifted.last_term_magnitude *= scale;
        shifted.abs_sum *= scale;
        return shifted;
    }

    template <typename Scalar>
    SeriesResultT<Scalar> hyp1f1_deriv_series(int N, int NR, Scalar sigma, Scalar rel_tol)
    {
        TruncationPolicyT<Scalar> policy;
        policy.rel_tol = rel_tol;
        return hyp1f1_deriv_series<Scalar>(N, NR, sigma, policy);
    }

    /// Companion matrix of Kummer's equation: d/dsigma (f, f') = F(sigma) (f, f').
    template <typename Scalar>
    Eigen::Matrix<Scalar, 2, 2> hyp1f1_companion(int N, int NR, Scalar sigma)
    {
        if (sigma == Scalar(0))
            throw DomainError("hyp1f1_companion: sigma = 0 is a singular point");
        Eigen::Matrix<Scalar, 2, 2> F;
        F << Scalar(0), Scalar(1), Scalar(N) / sigma, Scalar(1) - Scalar(NR) / sigma;
        return F;
    }

    /// 1F1 and its derivative at sigma by the holonomic gradient method: series at sigma0, then
    /// Dormand-Prince integration of the companion system from sigma0 to sigma.
    template <typename Scalar>
    Hyp1F1StateT<Scalar> hyp1f1_hgm(int N, int NR, Scalar sigma, Scalar sigma0,
                                     const IntegratorSettings<Scalar> &settings,
                                     const TruncationPolicyT<Scalar> &policy = {})
    {
        if (sigma0 == Scalar(0))
            throw DomainError("hyp1f1_hgm: sigma0 = 0 is a singular point of the companion system");
        const bool forward = sigma0 > Scalar(0) && sigma >= sigma0;
        const bool backward = sigma0 < Scalar(0) && sigma <= sigma0;
        if (!forward && !backward)
            throw DomainError("hyp1f1_hgm: requires 0 < sigma0 <= sigma or sigma <= sigma0 < 0");

        const auto f0 = hyp1f1_series<Scalar>(N, NR, sigma0, policy);
        const auto f1 = hyp1f1_deriv_series<Scalar>(N, NR, sigma0, policy);
        if (!f0.converged || !f1.converged)
        {
            std::ostringstream msg;
            msg << "hyp1f1_hgm: series anchor did not converge at sigma0 = " << sigma0;
            throw NumericalError(msg.str());
        }

        using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
        const Vec2 y0(f0.value, f1.value);
        const auto rhs = [N, NR](Scalar s, const Vec2 &y) -> Vec2 { return hyp1f1_companion<Scalar>(N, NR, s) * y; };
        const Vec2 y = integrate<Scalar, 2>(rhs, sigma0, sigma, y0, settings);
        return {y[0], y[1]};
    }

    template <typename Scalar>
    Hyp1F1StateT<Scalar> hyp1f1_hgm(int N, int NR, Scalar sigma, Scalar sigma0, Scalar rel_tol)
    {
        IntegratorSettings<Scalar> settings;
        settings.rel_tol = rel_tol;
        TruncationPolicyT<Scalar> policy;
        return hyp1f1_hgm<Scalar>(N, NR, sigma, sigma0, settings, policy);
    }

    /// 1F1(N; NR; sigma): the series when it converges, HGM from sigma0 = +-0.01 otherwise.
    template <typename Scalar>
    Scalar hyp1f1(int N, int NR, Scalar sigma)
    {
        // accept the series only if cancellation costs at most ~1e-12 relative
        TruncationPolicyT<Scalar> policy{};
        policy.max_cancellation = Scalar(1e-12) / std::numeric_limits<Scalar>::epsilon();
        const auto s = hyp1f1_series<Scalar>(N, NR, sigma, policy);
        if (s.converged)
            return s.value;
        const Scalar sigma0 = sigma > Scalar(0) ? Scalar(0.01) : Scalar(-0.01);
        return hyp1f1_hgm<Scalar>(N, NR, sigma, sigma0, IntegratorSettings<Scalar>{}, policy).f;
    }
}
