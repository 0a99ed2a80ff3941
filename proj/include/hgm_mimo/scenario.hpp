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

// System configuration, derived fading parameters and the transmit-correlation matrix.
//
// dB quantities live only in ScenarioConfig; DerivedParams and everything downstream of it is
// in linear units.

#pragma once

#include <Eigen/Core>

#include <complex>
#include <iosfwd>
#include <string>

#include <json.hpp>

namespace hgm_mimo
{
    struct CorrelationSpec
    {
        enum class Kind
        {
            identity,
            file,
            laplacian_ula
        };

        Kind kind = Kind::identity;
        std::string path;                 // Kind::file
        double spacing_wavelengths = 0.5; // Kind::laplacian_ula

        /// "identity", "file:PATH", "laplacian" or "laplacian:SPACING".
        static CorrelationSpec parse(const std::string &text);
        std::string to_string() const;
    };

    struct ScenarioConfig
    {
        int n_rx = 6;
        int n_tx = 2;
        double k_factor_db = 7.0; // -inf selects Rayleigh-only fading (K = 0)
        double azimuth_spread_deg = 51.0;
        double gamma_s_db = 5.0;
        int constellation_size = 4;
        CorrelationSpec correlation{};

        /// Throws ValidationError when an invariant is violated.
        void validate() const;
    };

    struct DerivedParams
    {
        int dof = 0;               // N = NR - NT + 1
        double k_linear = 0.0;     // K as a power ratio
        double gamma1 = 0.0;        // SNR scale Gamma_1 = Gamma_s / [R_TK^-1]_11
        double noncentrality = 0.0; // a = [R_TK^-1]_11 ||h_d1||^2 = K [R_T^-1]_11 NR NT
        double gamma_b_db = 0.0;   // per-bit input SNR
    };

    /// Hermitian positive semi-definite transmit correlation with trace N_T.
    struct CorrelationMatrix
    {
        Eigen::MatrixXcd entries;

        int order() const { return static_cast<int>(entries.rows()); }

        /// Checks Hermitian symmetry, positive semi-definiteness (eigenvalues >= -1e-12 relative
        /// to the largest) and trace == order within 1e-9 relative.
        void validate() const;

        /// [R_T^-1]_11; throws ValidationError when the smallest eigenvalue is <= 1e-12 relative.
        double inverse_11() const;

        static CorrelationMatrix identity(int n);
    };

    double db_to_linear(double db);
    double linear_to_db(double linear);

    /// Laplacian power-azimuth-spectrum correlation of a uniform linear array:
    ///   R_pq = int exp(j 2 pi d (p - q) sin theta) L(theta; AS) dtheta  over [-pi, pi],
    /// with L the Laplacian density of standard deviation AS truncated to [-pi, pi] and
    /// renormalized, then scaled to trace N_T.
    CorrelationMatrix laplacian_ula_correlation(int n_tx, double spacing_wavelengths, double azimuth_spread_deg);

    CorrelationMatrix build_correlation(const CorrelationSpec &spec, int n_tx, double azimuth_spread_deg);

    /// Rows of the Rayleigh part have covariance R_TK = R_T / (K + 1) and the Rician column has
    /// ||h_d1||^2 = K / (K + 1) NR NT, so [R_TK^-1]_11 = (K + 1) [R_T^-1]_11 and
    ///   Gamma_1 = Gamma_s / ((K + 1) [R_T^-1]_11),   a = K [R_T^-1]_11 NR NT.
    DerivedParams derive_params(const ScenarioConfig &cfg, const CorrelationMatrix &rt);

    // Correlation file: one matrix row per line, whitespace-separated entries "re+imj"
    CorrelationMatrix parse_correlation(std::istream &in);
    CorrelationMatrix load_correlation_file(const std::string &path);
    void write_correlation(std::ostream &out, const CorrelationMatrix &rt);
    std::complex<double> parse_complex(const std::string &token);

    // JSON scenario file; keys mirror the ScenarioConfig field names
    void to_json(nlohmann::json &j, const ScenarioConfig &cfg);
    void from_json(const nlohmann::json &j, ScenarioConfig &cfg);
    void to_json(nlohmann::json &j, const DerivedParams &params);
}
