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

// Series representation of the Stream-1 ZF SNR law under Rician-Rayleigh fading, normalized to
// unit SNR scale (Gamma_1 = 1):
//
//   M(s, a) = (1 - s)^-N 1F1(N; NR; a s / (1 - s))
//   p(t, a) = e^-t t^(N-1) g(t, a),
//   g(t, a) = sum_n A_n(a) sum_r C(n, r) (-1)^(n-r) t^r / (N - 1 + r)!,
//   A_n(a)  = (N)_n / (NR)_n a^n / n!
//
// The inner sums alternate, so the expansion loses digits as a grows. Every evaluation reports
// its own convergence verdict (see TruncationPolicyT) instead of returning unreliable values.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <sstream>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/special_fn.hpp"

namespace hgm_mimo
{
    /// (p, dp/dt, d2p/dt2) at the point (t, a).
    template <typename Scalar>
    struct StateVectorT
    {
        Scalar p = Scalar(0);
        Scalar p1 = Scalar(0);
        Scalar p2 = Scalar(0);
        Scalar t = Scalar(0);
        Scalar a = Scalar(0);

        Eigen::Matrix<Scalar, 3, 1> vector() const { return {p, p1, p2}; }

        static StateVectorT from_vector(const Eigen::Matrix<Scalar, 3, 1> &v, Scalar t, Scalar a)
        {
            return {v[0], v[1], v[2], t, a};
        }
    };
    using StateVector = StateVectorT<double>;

    /// Derivatives of p up to third order with the per-order g-series diagnostics.
    template <typename Scalar>
    struct PdfDerivativesT
    {
        StateVectorT<Scalar> state;
        Scalar p3 = Scalar(0); // only filled when max_order == 3
        int max_order = 2;
        std::array<SeriesResultT<Scalar>, 4> g_series{};

        bool converged() const
        {
            for (int q = 0; q <= max_order; ++q)
                if (!g_series[q].converged)
                    return false;
            return true;
        }
    };
    using PdfDerivatives = PdfDerivativesT<double>;

    namespace detail
    {
        template <typename Scalar>
        Scalar factorial(int n)
        {
            if (n > 150)
                return std::exp(static_cast<Scalar>(std::lgamma(static_cast<double>(n) + 1.0)));
            Scalar out = Scalar(1);
            for (int k = 2; k <= n; ++k)
                out *= Scalar(k);
            return out;
        }

        template <typename Scalar>
        Scalar binomial(int n, int k)
        {
            Scalar out = Scalar(1);
            for (int i = 1; i <= k; ++i)
                out = out * Scalar(n - k + i) / Scalar(i);
            return out;
        }

        // (N - 1)! / (N - 1 - k)!, zero when k > N - 1
        template <typename Scalar>
        Scalar falling(int N, int k)
        {
            if (k > N - 1)
                return Scalar(0);
            Scalar out = Scalar(1);
            for (int i = 0; i < k; ++i)
                out *= Scalar(N - 1 - i);
            return out;
        }
    }

    /// q-th t-derivative of g(t, a):
    ///   g^(q) = sum_{n>=q} A_n(a) sum_{r=q}^{n} C(n, r) (-1)^(n-r) r! / ((N-1+r)! (r-q)!) t^(r-q).
    /// Block n is summed over r with the ratio recurrence
    ///   T(n, r+1) / T(n, r) = -(n - r) t / ((N + r)(r + 1 - q)),
    /// block starts with T(n+1, q) / T(n, q) = -(N + n) a / ((NR + n)(n + 1 - q)).
    template <typename Scalar>
    SeriesResultT<Scalar> g_derivative_series(int q, Scalar t, Scalar a, int N, int NR,
                                              const TruncationPolicyT<Scalar> &policy)
    {
        using std::abs;
        using std::pow;
        policy.validate();
        if (q < 0 || q > 3)
            throw DomainError("g_derivative_series: derivative order must lie in [0, 3]");
        if (N < 1 || NR < N)
            throw DomainError("g_derivative_series: requires NR >= N >= 1");
        if (!(t >= Scalar(0)) || !(a >= Scalar(0)))
            throw DomainError("g_derivative_series: requires t >= 0 and a >= 0");

        // T(q, q) = (N)_q / (NR)_q * a^q / (N - 1 + q)!
        Scalar block_start = pochhammer<Scalar>(Scalar(N), q) / pochhammer<Scalar>(Scalar(NR), q) *
                             pow(a, Scalar(q)) / detail::factorial<Scalar>(N - 1 + q);

        SeriesResultT<Scalar> out;
        Scalar sum = Scalar(0);
        Scalar abs_sum = Scalar(0);
        Scalar last_block = Scalar(0);
        int small_run = 0;
        bool overflow = false;
        bool stopped = false;
        int n = q;
        for (; n < q + policy.n_max; ++n)
        {
            Scalar term = block_start;
            Scalar block = Scalar(0);
            Scalar block_abs = Scalar(0);
            for (int r = q; r <= n; ++r)
            {
                block += term;
                block_abs += abs(term);
                if (r < n)
                    term *= -Scalar(n - r) * t / (Scalar(N + r) * Scalar(r + 1 - q));
            }
            sum += block;
            abs_sum += block_abs;
            last_block = block_abs;
            if (!std::isfinite(static_cast<double>(abs_sum)) || abs_sum > policy.overflow_guard)
            {
                overflow = true;
                break;
            }

            small_run = block_abs <= policy.rel_tol * abs(sum) ? small_run + 1 : 0;
            // B_{n+1} <= rho_n (1 + t + q) B_n with rho_n = A_{n+1} / A_n decreasing in n
            const Scalar rho = Scalar(N + n) * a / (Scalar(NR + n) * Scalar(n + 1));
            if ((small_run >= 2 || block_abs == Scalar(0)) && rho * (Scalar(1) + t + Scalar(q)) <= Scalar(0.5))
            {
                stopped = true;
                break;
            }
            block_start *= -Scalar(N + n) * a / (Scalar(NR + n) * Scalar(n + 1 - q));
        }

        out.value = sum;
        out.terms_used = n - q + 1;
        out.last_term_magnitude = last_block;
        out.abs_sum = abs_sum;
        out.converged = stopped && !overflow &&
                        (sum != Scalar(0) ? abs_sum <= policy.max_cancellation * abs(sum) : abs_sum == Scalar(0));
        return out;
    }

    /// Normalized p.d.f. p(t, a) by the truncated double series.
    template <typename Scalar>
    SeriesResultT<Scalar> pdf_series(Scalar t, Scalar a, int N, int NR, const TruncationPolicyT<Scalar> &policy = {})
    {
        using std::exp;
        using std::pow;
        if (!(t > Scalar(0)))
            throw DomainError("pdf_series: requires t > 0");
        auto g = g_derivative_series<Scalar>(0, t, a, N, NR, policy);
        const Scalar scale = exp(-t) * pow(t, Scalar(N - 1));
        g.value *= scale;
        g.abs_sum *= scale;
        g.last_term_magnitude *= scale;
        return g;
    }

    /// (p, p', p'') (and p''' when max_order == 3) from f = p e^t = t^(N-1) g via Leibniz' rule.
    /// For N = 1, 2 the falling-factorial coefficients vanish beyond k = N - 1, which gives
    /// f = g, f' = g', f'' = g'' (N = 1) and f = t g, f' = g + t g', f'' = 2 g' + t g'' (N = 2).
    template <typename Scalar>
    PdfDerivativesT<Scalar> pdf_derivatives_series(Scalar t, Scalar a, int N, int NR,
                                                   const TruncationPolicyT<Scalar> &policy = {}, int max_order = 2)
    {
        using std::exp;
        using std::pow;
        if (!(t > Scalar(0)))
            throw DomainError("pdf_derivatives_series: requires t > 0");
        if (max_order < 2 || max_order > 3)
            throw DomainError("pdf_derivatives_series: max_order must be 2 or 3");

        PdfDerivativesT<Scalar> out;
        out.max_order = max_order;
        std::array<Scalar, 4> g{};
        for (int q = 0; q <= max_order; ++q)
        {
            out.g_series[q] = g_derivative_series<Scalar>(q, t, a, N, NR, policy);
            g[q] = out.g_series[q].value;
        }

        std::array<Scalar, 4> f{};
        for (int q = 0; q <= max_order; ++q)
        {
            Scalar acc = Scalar(0);
            for (int k = 0; k <= q && k <= N - 1; ++k)
                acc += detail::binomial<Scalar>(q, k) * detail::falling<Scalar>(N, k) * pow(t, Scalar(N - 1 - k)) *
                       g[q - k];
            f[q] = acc;
        }

        // p^(j) = e^-t sum_i C(j, i) (-1)^(j-i) f^(i)
        const Scalar decay = exp(-t);
        std::array<Scalar, 4> p{};
        for (int j = 0; j <= max_order; ++j)
        {
            Scalar acc = Scalar(0);
            for (int i = 0; i <= j; ++i)
                acc += detail::binomial<Scalar>(j, i) * (((j - i) % 2 == 0) ? Scalar(1) : Scalar(-1)) * f[i];
            p[j] = acc * decay;
        }
        out.state = {p[0], p[1], p[2], t, a};
        out.p3 = max_order == 3 ? p[3] : Scalar(0);
        return out;
    }

    /// p(0+, a): 1F1(N; NR; -a) for N = 1, zero otherwise.
    template <typename Scalar>
    Scalar pdf_boundary(Scalar a, int N, int NR)
    {
        if (!(a >= Scalar(0)))
            throw DomainError("pdf_boundary: requires a >= 0");
        if (N < 1 || NR < N)
            throw DomainError("pdf_boundary: requires NR >= N >= 1");
        return N == 1 ? hyp1f1<Scalar>(1, NR, -a) : Scalar(0);
    }

    /// M_gamma1(s, a) = (1 - Gamma_1 s)^-N 1F1(N; NR; a Gamma_1 s / (1 - Gamma_1 s)).
    template <typename Scalar>
    Scalar mgf_closed(Scalar s, Scalar a, int N, int NR, Scalar gamma1)
    {
        using std::pow;
        if (!(gamma1 > Scalar(0)))
            throw DomainError("mgf_closed: gamma1 must be positive");
        const Scalar x = gamma1 * s;
        if (!(x < Scalar(1)))
            throw DomainError("mgf_closed: requires s < 1 / gamma1");
        if (N < 1 || NR < N)
            throw DomainError("mgf_closed: requires NR >= N >= 1");
        const Scalar sigma = a * x / (Scalar(1) - x);
        return pow(Scalar(1) - x, -Scalar(N)) * hyp1f1<Scalar>(N, NR, sigma);
    }

    /// HGM anchor on the line a = c t: series (p, p', p'') at (u0, c u0).
    template <typename Scalar>
    StateVectorT<Scalar> initial_state(Scalar u0, Scalar c, int N, int NR, const TruncationPolicyT<Scalar> &policy = {})
    {
        if (!(u0 > Scalar(0)))
            throw DomainError("initial_state: u0 must be positive");
        if (!(c >= Scalar(0)))
            throw DomainError("initial_state: c must be non-negative");
        const auto d = pdf_derivatives_series<Scalar>(u0, c * u0, N, NR, policy);
        if (!d.converged())
        {
            std::ostringstream msg;
            msg << "initial_state: series did not converge at (t, a) = (" << u0 << ", " << c * u0 << ")";
            throw NumericalError(msg.str());
        }
        return d.state;
    }
}
