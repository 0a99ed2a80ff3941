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

#include "hgm_mimo/scenario.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <bit>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <vector>

#include "hgm_mimo/errors.hpp"

namespace hgm_mimo
{
    namespace
    {
        constexpr double eigen_rel_tol = 1e-12;
        constexpr double trace_rel_tol = 1e-9;

        double parse_double(const std::string &text, const std::string &what)
        {
            std::size_t used = 0;
            double value = 0.0;
            try
            {
                value = std::stod(text, &used);
            }
            catch (const std::exception &)
            {
                throw ValidationError("cannot parse " + what + " '" + text + "'");
            }
            if (used != text.size())
                throw ValidationError("cannot parse " + what + " '" + text + "'");
            return value;
        }

        double k_db_from_json(const nlohmann::json &v)
        {
            if (v.is_number())
                return v.get<double>();
            if (v.is_string() && v.get<std::string>() == "-inf")
                return -std::numeric_limits<double>::infinity();
            throw ValidationError("k_factor_db must be a number or \"-inf\"");
        }
    }

    CorrelationSpec CorrelationSpec::parse(const std::string &text)
    {
        CorrelationSpec spec;
        if (text == "identity")
            return spec;
        if (text.rfind("file:", 0) == 0)
        {
            spec.kind = Kind::file;
            spec.path = text.substr(5);
            if (spec.path.empty())
                throw ValidationError("correlation spec 'file:' needs a path");
            return spec;
        }
        if (text == "laplacian" || text.rfind("laplacian:", 0) == 0)
        {
            spec.kind = Kind::laplacian_ula;
            if (text.size() > 9)
                spec.spacing_wavelengths = parse_double(text.substr(10), "antenna spacing");
            if (!(spec.spacing_wavelengths > 0.0) || !std::isfinite(spec.spacing_wavelengths))
                throw ValidationError("antenna spacing must be positive and finite");
            return spec;
        }
        throw ValidationError("unknown correlation spec '" + text + "' (identity, file:PATH, laplacian[:SPACING])");
    }

    std::string CorrelationSpec::to_string() const
    {
        switch (kind)
        {
        case Kind::identity:
            return "identity";
        case Kind::file:
            return "file:" + path;
        case Kind::laplacian_ula:
        {
            std::ostringstream out;
            out << "laplacian:" << std::setprecision(17) << spacing_wavelengths;
            return out.str();
        }
        }
        return "identity";
    }

    void ScenarioConfig::validate() const
    {
        if (n_tx < 1 || n_tx > n_rx)
            throw ValidationError("antenna counts must satisfy 1 <= n_tx <= n_rx");
        if (std::isnan(k_factor_db) || k_factor_db == std::numeric_limits<double>::infinity())
            throw ValidationError("k_factor_db must be finite or -inf");
        if (!std::isfinite(gamma_s_db))
            throw ValidationError("gamma_s_db must be finite");
        if (!std::isfinite(azimuth_spread_deg) || azimuth_spread_deg < 0.0)
            throw ValidationError("azimuth_spread_deg must be finite and non-negative");
        if (constellation_size < 2 || !std::has_single_bit(static_cast<unsigned>(constellation_size)))
            throw ValidationError("constellation_size must be a power of 2, at least 2");
        if (correlation.kind == CorrelationSpec::Kind::laplacian_ula)
        {
            if (!(azimuth_spread_deg > 0.0))
                throw ValidationError("the Laplacian correlation model needs azimuth_spread_deg > 0");
            if (!(correlation.spacing_wavelengths > 0.0) || !std::isfinite(correlation.spacing_wavelengths))
                throw ValidationError("antenna spacing must be positive and finite");
        }
        if (correlation.kind == CorrelationSpec::Kind::file && correlation.path.empty())
            throw ValidationError("correlation file path is empty");
    }

    void CorrelationMatrix::validate() const
    {
        const Eigen::Index n = entries.rows();
        if (n < 1 || entries.cols() != n)
            throw ValidationError("correlation matrix must be square and non-empty");
        if (!entries.allFinite())
            throw ValidationError("correlation matrix has non-finite entries");
        const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
        if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > 1e-10 * scale)
            throw ValidationError("correlation matrix is not Hermitian");
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(entries, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd &ev = eig.eigenvalues();
        if (ev.minCoeff() < -eigen_rel_tol * std::max(ev.maxCoeff(), 0.0))
            throw ValidationError("correlation matrix is not positive semi-definite");
        const double trace = entries.trace().real();
        if (std::abs(trace - static_cast<double>(n)) > trace_rel_tol * static_cast<double>(n))
            throw ValidationError("correlation matrix trace must equal its order");
    }

    double CorrelationMatrix::inverse_11() const
    {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(entries, Eigen::EigenvaluesOnly);
        const Eigen::VectorXd &ev = eig.eigenvalues();
        if (!(ev.minCoeff() > eigen_rel_tol * ev.maxCoeff()))
            throw ValidationError("correlation matrix is singular");
        Eigen::VectorXcd e1 = Eigen::VectorXcd::Zero(entries.rows());
        e1[0] = 1.0;
        const Eigen::VectorXcd x = entries.ldlt().solve(e1);
        return x[0].real();
    }

    CorrelationMatrix CorrelationMatrix::identity(int n)
    {
        if (n < 1)
            throw ValidationError("correlation order must be at least 1");
        return {Eigen::MatrixXcd::Identity(n, n)};
    }

    double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

    double linear_to_db(double linear) { return 10.0 * std::log10(linear); }

    CorrelationMatrix laplacian_ula_correlation(int n_tx, double spacing_wavelengths, double azimuth_spread_deg)
    {
        if (n_tx < 1)
            throw ValidationError("n_tx must be at least 1");
        if (!(spacing_wavelengths > 0.0) || !std::isfinite(spacing_wavelengths))
            throw ValidationError("antenna spacing must be positive and finite");
        if (!(azimuth_spread_deg > 0.0) || !std::isfinite(azimuth_spread_deg))
            throw ValidationError("azimuth spread must be positive and finite");

        using boost::math::quadrature::gauss_kronrod;
        constexpr double pi = std::numbers::pi;
        // Laplacian of standard deviation AS has scale AS / sqrt(2)
        const double scale = azimuth_spread_deg * pi / 180.0 / std::numbers::sqrt2;
        const auto laplace = [scale](double theta) { return std::exp(-theta / scale); };
        // The spectrum is even in theta, so the sine part vanishes and R is real Toeplitz.
        const double mass = 2.0 * gauss_kronrod<double, 61>::integrate(laplace, 0.0, pi, 15, 1e-14);

        std::vector<double> lag(static_cast<std::size_t>(n_tx), 0.0);
        for (int m = 0; m < n_tx; ++m)
        {
            const double w = 2.0 * pi * spacing_wavelengths * m;
            const auto integrand = [&](double theta) { return std::cos(w * std::sin(theta)) * laplace(theta); };
            lag[m] = 2.0 * gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi, 15, 1e-14) / mass;
        }

        Eigen::MatrixXcd r(n_tx, n_tx);
        for (int p = 0; p < n_tx; ++p)
            for (int q = 0; q < n_tx; ++q)
                r(p, q) = lag[static_cast<std::size_t>(std::abs(p - q))];
        r *= static_cast<double>(n_tx) / r.trace().real();
        CorrelationMatrix out{r};
        out.validate();
        return out;
    }

    CorrelationMatrix build_correlation(const CorrelationSpec &spec, int n_tx, double azimuth_spread_deg)
    {
        if (n_tx < 1)
            throw ValidationError("n_tx must be at least 1");
        switch (spec.kind)
        {
        case CorrelationSpec::Kind::identity:
            return CorrelationMatrix::identity(n_tx);
        case CorrelationSpec::Kind::laplacian_ula:
            return laplacian_ula_correlation(n_tx, spec.spacing_wavelengths, azimuth_spread_deg);
        case CorrelationSpec::Kind::file:
        {
            CorrelationMatrix r = load_correlation_file(spec.path);
            if (r.order() != n_tx)
                throw ValidationError("correlation file order does not match n_tx");
            return r;
        }
        }
        throw ValidationError("unknown correlation kind");
    }

    DerivedParams derive_params(const ScenarioConfig &cfg, const CorrelationMatrix &rt)
    {
        cfg.validate();
        if (rt.order() != cfg.n_tx)
            throw ValidationError("correlation order does not match n_tx");
        rt.validate();
        const double inv11 = rt.inverse_11();

        DerivedParams out;
        out.dof = cfg.n_rx - cfg.n_tx + 1;
        out.k_linear = db_to_linear(cfg.k_factor_db);
        const double gamma_s = db_to_linear(cfg.gamma_s_db);
        out.gamma1 = gamma_s / ((out.k_linear + 1.0) * inv11);
        out.noncentrality = out.k_linear * inv11 * cfg.n_rx * cfg.n_tx;
        out.gamma_b_db = cfg.gamma_s_db - linear_to_db(std::log2(static_cast<double>(cfg.constellation_size)));
        return out;
    }

    std::complex<double> parse_complex(const std::string &token)
    {
        if (token.empty())
            throw ValidationError("empty complex entry");
        const char last = token.back();
        if (last != 'j' && last != 'i')
            return {parse_double(token, "complex entry"), 0.0};

        const std::string body = token.substr(0, token.size() - 1);
        // split at the last sign that is neither leading nor an exponent sign
        std::size_t split = std::string::npos;
        for (std::size_t k = body.size(); k-- > 1;)
        {
            if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E')
            {
                split = k;
                break;
            }
        }
        const auto imag_of = [&](const std::string &s) {
            if (s.empty() || s == "+")
                return 1.0;
            if (s == "-")
                return -1.0;
            return parse_double(s, "complex entry");
        };
        if (split == std::string::npos)
            return {0.0, imag_of(body)};
        return {parse_double(body.substr(0, split), "complex entry"), imag_of(body.substr(split))};
    }

    CorrelationMatrix parse_correlation(std::istream &in)
    {
        std::vector<std::vector<std::complex<double>>> rows;
        std::string line;
        while (std::getline(in, line))
        {
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos || line[first] == '#')
                continue;
            std::istringstream tokens(line);
            std::vector<std::complex<double>> row;
            std::string tok;
            while (tokens >> tok)
                row.push_back(parse_complex(tok));
            rows.push_back(std::move(row));
        }
        const auto n = static_cast<Eigen::Index>(rows.size());
        if (n == 0)
            throw ValidationError("correlation file is empty");
        CorrelationMatrix out{Eigen::MatrixXcd(n, n)};
        for (Eigen::Index i = 0; i < n; ++i)
        {
            if (static_cast<Eigen::Index>(rows[i].size()) != n)
                throw ValidationError("correlation file must hold a square matrix");
            for (Eigen::Index j = 0; j < n; ++j)
                out.entries(i, j) = rows[i][j];
        }
        out.validate();
        return out;
    }

    CorrelationMatrix load_correlation_file(const std::string &path)
    {
        std::ifstream in(path);
        if (!in)
            throw ValidationError("cannot open correlation file '" + path + "'");
        return parse_correlation(in);
    }

    void write_correlation(std::ostream &out, const CorrelationMatrix &rt)
    {
        const auto old_precision = out.precision(17);
        for (Eigen::Index i = 0; i < rt.entries.rows(); ++i)
        {
            for (Eigen::Index j = 0; j < rt.entries.cols(); ++j)
            {
                const auto z = rt.entries(i, j);
                if (j > 0)
                    out << ' ';
                out << z.real() << (std::signbit(z.imag()) ? '-' : '+') << std::abs(z.imag()) << 'j';
            }
            out << '\n';
        }
        out.precision(old_precision);
    }

    void to_json(nlohmann::json &j, const ScenarioConfig &cfg)
    {
        j = nlohmann::json{{"n_rx", cfg.n_rx},
                           {"n_tx", cfg.n_tx},
                           {"azimuth_spread_deg", cfg.azimuth_spread_deg},
                           {"gamma_s_db", cfg.gamma_s_db},
                           {"constellation_size", cfg.constellation_size},
                           {"correlation", cfg.correlation.to_string()}};
        if (std::isinf(cfg.k_factor_db))
            j["k_factor_db"] = "-inf";
        else
            j["k_factor_db"] = cfg.k_factor_db;
    }

    void from_json(const nlohmann::json &j, ScenarioConfig &cfg)
    {
        if (!j.is_object())
            throw ValidationError("scenario JSON must be an object");
        try
        {
            for (const auto &[key, value] : j.items())
            {
                if (key == "n_rx")
                    cfg.n_rx = value.get<int>();
                else if (key == "n_tx")
                    cfg.n_tx = value.get<int>();
                else if (key == "k_factor_db")
                    cfg.k_factor_db = k_db_from_json(value);
                else if (key == "azimuth_spread_deg")
                    cfg.azimuth_spread_deg = value.get<double>();
                else if (key == "gamma_s_db")
                    cfg.gamma_s_db = value.get<double>();
                else if (key == "constellation_size")
                    cfg.constellation_size = value.get<int>();
                else if (key == "correlation")
                    cfg.correlation = CorrelationSpec::parse(value.get<std::string>());
                else
                    throw ValidationError("unknown scenario key '" + key + "'");
            }
        }
        catch (const nlohmann::json::exception &e)
        {
            throw ValidationError(std::string("scenario JSON: ") + e.what());
        }
    }

    void to_json(nlohmann::json &j, const DerivedParams &params)
    {
        j = nlohmann::json{{"dof", params.dof},
                           {"k_linear", params.k_linear},
                           {"gamma1", params.gamma1},
                           {"noncentrality", params.noncentrality},
                           {"gamma_b_db", params.gamma_b_db}};
    }
}
