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

// Outage probability, ergodic capacity and c.d.f. from the SNR density, plus the Rayleigh-only
// (a = 0) closed forms.
//
// Integrals of HGM densities use the rectangle (midpoint) rule on logarithmically spaced panels
// in the normalized variable u = t / Gamma_1, starting at u0 with the sliver [0, u0] taken from the
// small-u power law p ~ u^(N-1). Panels live on one global grid u0 10^(k / resolution), so curves
// over many thresholds or SNR scales share density evaluations.

#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hgm_mimo/hgm_engine.hpp"
#include "hgm_mimo/scenario.hpp"

namespace hgm_mimo
{
    struct OutageSpec
    {
        double threshold_snr = 1.0; // linear

        void validate() const;
    };

    struct CapacityResult
    {
        double bpcu = 0.0;
        double tail_mass_dropped = 0.0; // upper bound on P(gamma_1 > t_max)
    };

    /// A density in normalized units: p(u) for a batch of u > 0, plus the parameters that fix the
    /// physical scaling and tail behaviour.
    struct PdfSource
    {
        int dof = 1;
        double gamma1 = 1.0;
        double noncentrality = 0.0;
        std::function<std::vector<double>(std::span<const double>)> normalized_pdf;
    };

    inline constexpr int default_resolution = 2000; // panels per decade
    inline constexpr double default_tail_tol = 1e-7;

    /// HGM density for a > 0, the Gamma density for a = 0.
    PdfSource hgm_source(const DerivedParams &params, int NR, double u0 = default_u0,
                         const IntegratorSettings<double> &settings = {});

    PdfSource rayleigh_source(int N, double gamma1);

    /// Wraps a source with a thread-safe cache keyed by the exact argument. Panel nodes are
    /// reproducible doubles, so several integrals over the same source share evaluations.
    PdfSource memoized(PdfSource source);

    /// Running integral of a density grid from 0: the first interval is the trapezoid from the
    /// boundary value p(0+) / Gamma_1, the rest are trapezoids between grid points.
    std::vector<PdfPoint> cdf_from_pdf(const PdfGrid &grid);

    double outage_probability(const PdfSource &source, const OutageSpec &spec, int resolution = default_resolution,
                              double u0 = default_u0);

    /// P(gamma_1 <= t) for several thresholds from one set of density evaluations.
    std::vector<double> cdf_curve(const PdfSource &source, std::span<const double> thresholds,
                                  int resolution = default_resolution, double u0 = default_u0);

    /// Outage at a fixed threshold for several SNR scales Gamma_1 (a Gamma_b sweep).
    std::vector<double> outage_curve(const PdfSource &source, std::span<const double> gamma1_values,
                                     const OutageSpec &spec, int resolution = default_resolution,
                                     double u0 = default_u0);

    /// E[log2(1 + gamma_1)]; t_max doubles from Gamma_1 (N + a) until the Chernoff bound of the
    /// envelope m.g.f. (1 - x)^-N exp(a x / (1 - x)) puts less than tail_tol mass beyond it.
    CapacityResult ergodic_capacity(const PdfSource &source, int resolution = default_resolution,
                                    double tail_tol = default_tail_tol, double u0 = default_u0);

    std::vector<CapacityResult> capacity_curve(const PdfSource &source, std::span<const double> gamma1_values,
                                               int resolution = default_resolution,
                                               double tail_tol = default_tail_tol, double u0 = default_u0);

    /// Upper bound on P(u > U) for the normalized law with parameters (N, a).
    double normalized_tail_bound(double U, int N, double a);

    double rayleigh_pdf(double t, int N, double gamma1);
    double rayleigh_outage(double threshold, int N, double gamma1);
    double rayleigh_capacity(int N, double gamma1);
}
