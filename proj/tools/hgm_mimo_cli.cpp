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

// hgm-mimo command-line tool: SNR density, c.d.f., outage and capacity of the Stream-1 ZF SNR,
// Monte Carlo simulation, HGM-versus-simulation comparison and a quick self-test.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hgm_mimo/errors.hpp"
#include "hgm_mimo/hgm_engine.hpp"
#include "hgm_mimo/measures.hpp"
#include "hgm_mimo/montecarlo.hpp"
#include "hgm_mimo/scenario.hpp"
#include "hgm_mimo/series_model.hpp"
#include "hgm_mimo/special_fn.hpp"

using nlohmann::json;
using namespace hgm_mimo;

namespace
{
    constexpr int exit_ok = 0;
    constexpr int exit_invalid = 1;
    constexpr int exit_numerical = 2;
    constexpr int exit_threshold = 3;

    // Raised by compare and selftest when a check misses its threshold.
    struct ThresholdFailure : std::runtime_error
    {
        using std::runtime_error::runtime_error;
    };

    struct Manifest
    {
        std::string command;
        ScenarioConfig scenario;

        double t_min = 0.5;
        double t_max = 60.0;
        int points = 30;

        bool sweep = false;
        double gb_min = -15.0;
        double gb_max = 0.0;
        int gb_points = 6;
        double threshold = 1.0;

        int resolution = default_resolution;
        double tail_tol = default_tail_tol;
        std::optional<double> u0;
        double rel_tol = 1e-12;
        double abs_tol = 1e-14;
        std::string method = "hgm";

        std::int64_t samples = 1'000'000;
        int bins = 100;
        std::uint64_t seed = 1;

        std::string output = "-";
        std::string sidecar;

        void validate() const
        {
            scenario.validate();
            if (!(t_min > 0.0) || !(t_max > t_min) || !std::isfinite(t_max))
                throw ValidationError("grid needs 0 < t_min < t_max");
            if (points < 2)
                throw ValidationError("grid needs at least 2 points");
            if (!std::isfinite(gb_min) || !std::isfinite(gb_max) || gb_points < 1 ||
                (gb_points > 1 && !(gb_max > gb_min)))
                throw ValidationError("sweep needs finite gamma_b_db bounds with min < max");
            if (!(threshold > 0.0) || !std::isfinite(threshold))
                throw ValidationError("threshold must be finite and positive");
            if (resolution < 100)
                throw ValidationError("resolution must be at least 100 panels per decade");
            if (!(tail_tol > 0.0) || tail_tol > 1e-6)
                throw ValidationError("tail_tol must lie in (0, 1e-6]");
            if (u0 && !(*u0 > 0.0))
                throw ValidationError("u0 must be positive");
            if (!(rel_tol > 0.0) || !(abs_tol > 0.0))
                throw ValidationError("integrator tolerances must be positive");
            if (method != "hgm" && method != "series")
                throw ValidationError("method must be hgm or series");
            if (samples < 10'000)
                throw ValidationError("samples must be at least 10^4");
            if (bins < 1)
                throw ValidationError("bins must be at least 1");
        }

        IntegratorSettings<double> integrator() const
        {
            IntegratorSettings<double> s;
            s.rel_tol = rel_tol;
            s.abs_tol = abs_tol;
            return s;
        }
    };

    std::string fmt(double x)
    {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", x);
        return buf;
    }

    std::vector<double> linspace(double lo, double hi, int n)
    {
        std::vector<double> out(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            out[static_cast<std::size_t>(i)] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
        return out;
    }

    template <typename T>
    void read_key(const json &obj, const char *key, T &target)
    {
        if (obj.contains(key))
            target = obj.at(key).get<T>();
    }

    void check_keys(const json &obj, const char *section, std::initializer_list<const char *> allowed)
    {
        if (!obj.is_object())
            throw ValidationError(std::string("config section '") + section + "' must be an object");
        for (const auto &item : obj.items())
        {
            bool known = false;
            for (const char *k : allowed)
                known = known || item.key() == k;
            if (!known)
                throw ValidationError(std::string("unknown key '") + item.key() + "' in config section '" +
                                      section + "'");
        }
    }

    void apply_config_file(const std::string &path, Manifest &m)
    {
        std::ifstream in(path);
        if (!in)
            throw ValidationError("cannot open config file '" + path + "'");
        json j;
        try
        {
            in >> j;
            check_keys(j, "root", {"scenario", "grid", "sweep", "integration", "simulation"});
            if (j.contains("scenario"))
                from_json(j.at("scenario"), m.scenario);
            if (j.contains("grid"))
            {
                const json &g = j.at("grid");
                check_keys(g, "grid", {"t_min", "t_max", "points"});
                read_key(g, "t_min", m.t_min);
                read_key(g, "t_max", m.t_max);
                read_key(g, "points", m.points);
            }
            if (j.contains("sweep"))
            {
                const json &s = j.at("sweep");
                check_keys(s, "sweep", {"gamma_b_db_min", "gamma_b_db_max", "points", "threshold"});
                m.sweep = s.contains("gamma_b_db_min") || s.contains("gamma_b_db_max") || s.contains("points");
                read_key(s, "gamma_b_db_min", m.gb_min);
                read_key(s, "gamma_b_db_max", m.gb_max);
                read_key(s, "points", m.gb_points);
                read_key(s, "threshold", m.threshold);
            }
            if (j.contains("integration"))
            {
                const json &s = j.at("integration");
                check_keys(s, "integration", {"resolution", "tail_tol", "u0", "rel_tol", "abs_tol", "method"});
                read_key(s, "resolution", m.resolution);
                read_key(s, "tail_tol", m.tail_tol);
                read_key(s, "rel_tol", m.rel_tol);
                read_key(s, "abs_tol", m.abs_tol);
                read_key(s, "method", m.method);
                if (s.contains("u0"))
                    m.u0 = s.at("u0").get<double>();
            }
            if (j.contains("simulation"))
            {
                const json &s = j.at("simulation");
                check_keys(s, "simulation", {"samples", "bins", "seed"});
                read_key(s, "samples", m.samples);
                read_key(s, "bins", m.bins);
                read_key(s, "seed", m.seed);
            }
        }
        catch (const json::exception &e)
        {
            throw ValidationError(std::string("config file: ") + e.what());
        }
    }

    double parse_k_db(const std::string &text)
    {
        if (text == "-inf")
            return -std::numeric_limits<double>::infinity();
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(text, &used);
        }
        catch (const std::exception &)
        {
            throw ValidationError("cannot parse --k-db '" + text + "'");
        }
        if (used != text.size() || !std::isfinite(v))
            throw ValidationError("--k-db must be a finite number or -inf");
        return v;
    }

    struct Context
    {
        CorrelationMatrix rt;
        DerivedParams params;
    };

    Context resolve(const Manifest &m)
    {
        Context c;
        c.rt = build_correlation(m.scenario.correlation, m.scenario.n_tx, m.scenario.azimuth_spread_deg);
        c.params = derive_params(m.scenario, c.rt);
        return c;
    }

    // Gamma_1 for a per-bit SNR in dB; everything else in the scenario fixed.
    double gamma1_at(const Manifest &m, const Context &c, double gamma_b_db)
    {
        ScenarioConfig cfg = m.scenario;
        cfg.gamma_s_db = gamma_b_db + linear_to_db(std::log2(static_cast<double>(cfg.constellation_size)));
        return derive_params(cfg, c.rt).gamma1;
    }

    std::vector<double> sweep_points(const Manifest &m, const Context &c)
    {
        if (!m.sweep)
            return {c.params.gamma_b_db};
        return linspace(m.gb_min, m.gb_max, m.gb_points);
    }

    double anchor_u0(const Manifest &m, const Context &c)
    {
        if (m.u0)
            return *m.u0;
        return std::min(default_u0, m.t_min / (10.0 * c.params.gamma1));
    }

    PdfSource density_source(const Manifest &m, const Context &c)
    {
        return memoized(hgm_source(c.params, m.scenario.n_rx, m.u0.value_or(default_u0), m.integrator()));
    }

    class Output
    {
    public:
        explicit Output(const std::string &path) : path_(path)
        {
            if (path_ != "-")
            {
                file_.open(path_);
                if (!file_)
                    throw ValidationError("cannot open output file '" + path_ + "'");
            }
        }
        std::ostream &stream() { return path_ == "-" ? std::cout : file_; }

    private:
        std::string path_;
        std::ofstream file_;
    };

    json base_sidecar(const Manifest &m, const Context &c)
    {
        json j;
        j["tool"] = "hgm-mimo";
        j["version"] = HGM_MIMO_VERSION;
        j["command"] = m.command;
        j["scenario"] = m.scenario;
        j["derived"] = c.params;
        j["seed"] = m.seed;
        j["grid"] = {{"t_min", m.t_min}, {"t_max", m.t_max}, {"points", m.points}};
        j["sweep"] = {{"enabled", m.sweep},
                      {"gamma_b_db_min", m.gb_min},
                      {"gamma_b_db_max", m.gb_max},
                      {"points", m.gb_points},
                      {"threshold", m.threshold}};
        j["integration"] = {{"resolution", m.resolution},
                            {"tail_tol", m.tail_tol},
                            {"u0", m.u0 ? json(*m.u0) : json(nullptr)},
                            {"rel_tol", m.rel_tol},
                            {"abs_tol", m.abs_tol},
                            {"method", m.method}};
        j["simulation"] = {{"samples", m.samples}, {"bins", m.bins}};
        return j;
    }

    void write_sidecar(const Manifest &m, const json &j)
    {
        std::string path = m.sidecar;
        if (path.empty())
        {
            if (m.output == "-")
                return;
            path = m.output + ".json";
        }
        std::ofstream out(path);
        if (!out)
            throw ValidationError("cannot open sidecar file '" + path + "'");
        out << j.dump(2) << '\n';
    }

    int run_pdf(const Manifest &m)
    {
        const Context c = resolve(m);
        const std::vector<double> t = linspace(m.t_min, m.t_max, m.points);
        std::vector<double> pdf(t.size());
        json side = base_sidecar(m, c);
        const int N = c.params.dof;
        const double g1 = c.params.gamma1;

        std::string method = m.method;
        if (c.params.noncentrality == 0.0)
        {
            method = "rayleigh";
            for (std::size_t i = 0; i < t.size(); ++i)
                pdf[i] = rayleigh_pdf(t[i], N, g1);
        }
        else if (m.method == "series")
        {
            std::vector<double> bad;
            for (std::size_t i = 0; i < t.size(); ++i)
            {
                const auto r = pdf_series<double>(t[i] / g1, c.params.noncentrality, N, m.scenario.n_rx);
                pdf[i] = r.value / g1;
                if (!r.converged)
                    bad.push_back(t[i]);
            }
            if (!bad.empty())
            {
                std::ostringstream msg;
                msg << "series did not converge at " << bad.size() << " of " << t.size()
                    << " grid points (first at t = " << fmt(bad.front()) << ")";
                throw NumericalError(msg.str());
            }
        }
        else
        {
            const PdfGrid grid = pdf_hgm(c.params, m.scenario.n_rx, t, anchor_u0(m, c), m.integrator());
            for (std::size_t i = 0; i < t.size(); ++i)
                pdf[i] = grid.points[i].pdf;
        }

        Output out(m.output);
        out.stream() << "t,pdf\n";
        for (std::size_t i = 0; i < t.size(); ++i)
            out.stream() << fmt(t[i]) << ',' << fmt(pdf[i]) << '\n';
        side["results"] = {{"method", method}};
        write_sidecar(m, side);
        return exit_ok;
    }

    int run_cdf(const Manifest &m)
    {
        const Context c = resolve(m);
        const std::vector<double> t = linspace(m.t_min, m.t_max, m.points);
        const std::vector<double> cdf = cdf_curve(density_source(m, c), t, m.resolution);
        Output out(m.output);
        out.stream() << "t,cdf\n";
        for (std::size_t i = 0; i < t.size(); ++i)
            out.stream() << fmt(t[i]) << ',' << fmt(cdf[i]) << '\n';
        json side = base_sidecar(m, c);
        side["results"] = {{"method", c.params.noncentrality == 0.0 ? "rayleigh" : "hgm"}};
        write_sidecar(m, side);
        return exit_ok;
    }

    struct SweepRow
    {
        double gamma_b_db;
        double value;
        std::string method;
    };

    void write_sweep(const Manifest &m, const std::vector<SweepRow> &rows)
    {
        Output out(m.output);
        out.stream() << "gamma_b_db,value,method\n";
        for (const auto &r : rows)
            out.stream() << fmt(r.gamma_b_db) << ',' << fmt(r.value) << ',' << r.method << '\n';
    }

    std::vector<SweepRow> outage_rows(const Manifest &m, const Context &c, const std::vector<double> &gb)
    {
        std::vector<double> g1(gb.size());
        for (std::size_t i = 0; i < gb.size(); ++i)
            g1[i] = gamma1_at(m, c, gb[i]);
        std::vector<SweepRow> rows;
        if (c.params.noncentrality == 0.0)
        {
            for (std::size_t i = 0; i < gb.size(); ++i)
                rows.push_back({gb[i], rayleigh_outage(m.threshold, c.params.dof, g1[i]), "rayleigh"});
            return rows;
        }
        const std::vector<double> p =
            outage_curve(density_source(m, c), g1, OutageSpec{m.threshold}, m.resolution, m.u0.value_or(default_u0));
        for (std::size_t i = 0; i < gb.size(); ++i)
            rows.push_back({gb[i], p[i], "hgm"});
        return rows;
    }

    std::vector<SweepRow> capacity_rows(const Manifest &m, const Context &c, const std::vector<double> &gb,
                                        double &tail)
    {
        std::vector<double> g1(gb.size());
        for (std::size_t i = 0; i < gb.size(); ++i)
            g1[i] = gamma1_at(m, c, gb[i]);
        std::vector<SweepRow> rows;
        tail = 0.0;
        if (c.params.noncentrality == 0.0)
        {
            for (std::size_t i = 0; i < gb.size(); ++i)
                rows.push_back({gb[i], rayleigh_capacity(c.params.dof, g1[i]), "rayleigh"});
            return rows;
        }
        const auto cap =
            capacity_curve(density_source(m, c), g1, m.resolution, m.tail_tol, m.u0.value_or(default_u0));
        for (std::size_t i = 0; i < gb.size(); ++i)
        {
            rows.push_back({gb[i], cap[i].bpcu, "hgm"});
            tail = std::max(tail, cap[i].tail_mass_dropped);
        }
        return rows;
    }

    int run_outage(const Manifest &m)
    {
        const Context c = resolve(m);
        const auto rows = outage_rows(m, c, sweep_points(m, c));
        write_sweep(m, rows);
        write_sidecar(m, base_sidecar(m, c));
        return exit_ok;
    }

    int run_capacity(const Manifest &m)
    {
        const Context c = resolve(m);
        double tail = 0.0;
        const auto rows = capacity_rows(m, c, sweep_points(m, c), tail);
        write_sweep(m, rows);
        json side = base_sidecar(m, c);
        side["results"] = {{"tail_mass_dropped", tail}};
        write_sidecar(m, side);
        return exit_ok;
    }

    int run_simulate(const Manifest &m)
    {
        const Context c = resolve(m);
        const SimulationResult sim = simulate(m.scenario, c.rt, m.samples, m.bins, m.seed);
        Output out(m.output);
        out.stream() << "t,pdf\n";
        const auto &h = sim.histogram;
        for (std::size_t i = 0; i < h.counts.size(); ++i)
            out.stream() << fmt(0.5 * (h.bin_edges[i] + h.bin_edges[i + 1])) << ',' << fmt(h.density(i)) << '\n';
        json side = base_sidecar(m, c);
        side["results"] = {{"accepted", h.n_samples},
                           {"rejected", sim.rejected},
                           {"mean_snr", sim.mean_snr},
                           {"capacity_bpcu", sim.capacity_bpcu},
                           {"outage_at_threshold", empirical_outage(sim.sorted_snr, m.threshold)},
                           {"bin_width", h.bin_edges[1] - h.bin_edges[0]}};
        write_sidecar(m, side);
        return exit_ok;
    }

    // Thresholds of the HGM-versus-simulation comparison.
    constexpr double ks_limit = 0.01;
    constexpr double terminal_cdf_limit = 1e-3;
    constexpr double sweep_rel_limit = 0.02;
    constexpr double outage_floor = 1e-3;

    int run_compare(const Manifest &m_in)
    {
        Manifest m = m_in;
        m.sweep = true;
        const Context c = resolve(m);
        const SimulationResult sim = simulate(m.scenario, c.rt, m.samples, m.bins, m.seed);
        const PdfSource source = density_source(m, c);
        const int N = c.params.dof;

        // c.d.f. on a dense grid over (0, t_max] plus the density grid of the pdf command
        constexpr int ks_points = 400;
        std::vector<double> ks_grid(ks_points);
        for (int i = 0; i < ks_points; ++i)
            ks_grid[static_cast<std::size_t>(i)] = m.t_max * (i + 1) / ks_points;
        const std::vector<double> cdf = cdf_curve(source, ks_grid, m.resolution);
        double ks = 0.0;
        for (std::size_t i = 0; i < ks_grid.size(); ++i)
            ks = std::max(ks, std::abs(cdf[i] - empirical_cdf(sim.sorted_snr, ks_grid[i])));
        const double terminal = cdf.back();

        const std::vector<double> t = linspace(m.t_min, m.t_max, m.points);
        double pdf_dev = 0.0;
        {
            std::vector<double> u(t.size());
            for (std::size_t i = 0; i < t.size(); ++i)
                u[i] = t[i] / c.params.gamma1;
            const std::vector<double> p = source.normalized_pdf(u);
            const auto &h = sim.histogram;
            const double width = h.bin_edges[1] - h.bin_edges[0];
            for (std::size_t i = 0; i < t.size(); ++i)
            {
                const auto bin = static_cast<std::size_t>(std::floor(t[i] / width));
                if (bin >= h.counts.size())
                    continue;
                pdf_dev = std::max(pdf_dev, std::abs(p[i] / c.params.gamma1 - h.density(bin)));
            }
        }
        (void)N;

        const std::vector<double> gb = sweep_points(m, c);
        const auto outage = outage_rows(m, c, gb);
        double tail = 0.0;
        const auto capacity = capacity_rows(m, c, gb, tail);
        const double gb_ref = c.params.gamma_b_db;

        std::vector<SweepRow> rows;
        double outage_dev = 0.0, capacity_dev = 0.0;
        json checks = json::array();
        for (std::size_t i = 0; i < gb.size(); ++i)
        {
            // gamma_1 scales linearly with Gamma_s, so one sample set covers the sweep
            const double scale = db_to_linear(gb[i] - gb_ref);
            const double mc_out = empirical_outage(sim.sorted_snr, m.threshold, scale);
            const double mc_cap = empirical_capacity(sim.sorted_snr, scale);
            rows.push_back({gb[i], outage[i].value, outage[i].method + "_outage"});
            rows.push_back({gb[i], mc_out, "montecarlo_outage"});
            rows.push_back({gb[i], capacity[i].value, capacity[i].method + "_capacity"});
            rows.push_back({gb[i], mc_cap, "montecarlo_capacity"});
            if (outage[i].value >= outage_floor)
                outage_dev = std::max(outage_dev, std::abs(mc_out - outage[i].value) / outage[i].value);
            capacity_dev = std::max(capacity_dev, std::abs(mc_cap - capacity[i].value) / capacity[i].value);
        }
        write_sweep(m, rows);

        const bool ok_ks = ks <= ks_limit;
        const bool ok_terminal = std::abs(1.0 - terminal) <= terminal_cdf_limit;
        const bool ok_outage = outage_dev <= sweep_rel_limit;
        const bool ok_capacity = capacity_dev <= sweep_rel_limit;
        json side = base_sidecar(m, c);
        side["results"] = {{"ks_distance", ks},
                           {"terminal_cdf", terminal},
                           {"max_pdf_deviation", pdf_dev},
                           {"max_outage_rel_deviation", outage_dev},
                           {"max_capacity_rel_deviation", capacity_dev},
                           {"capacity_tail_mass_dropped", tail},
                           {"rejected_samples", sim.rejected},
                           {"pass",
                            {{"ks", ok_ks}, {"terminal_cdf", ok_terminal}, {"outage", ok_outage}, {"capacity", ok_capacity}}}};
        write_sidecar(m, side);

        std::cerr << "ks_distance " << fmt(ks) << (ok_ks ? " ok" : " FAIL") << '\n'
                  << "terminal_cdf " << fmt(terminal) << (ok_terminal ? " ok" : " FAIL") << '\n'
                  << "max_pdf_deviation " << fmt(pdf_dev) << '\n'
                  << "max_outage_rel_deviation " << fmt(outage_dev) << (ok_outage ? " ok" : " FAIL") << '\n'
                  << "max_capacity_rel_deviation " << fmt(capacity_dev) << (ok_capacity ? " ok" : " FAIL") << '\n';
        if (!(ok_ks && ok_terminal && ok_outage && ok_capacity))
            throw ThresholdFailure("comparison thresholds not met");
        return exit_ok;
    }

    int run_selftest()
    {
        int failures = 0;
        const auto check = [&](const char *name, bool ok) {
            std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
            failures += ok ? 0 : 1;
        };
        const auto rel = [](double x, double ref) { return std::abs(x - ref) / std::abs(ref); };

        check("pochhammer", pochhammer(3.0, 2) == 12.0 && pochhammer(5.0, 0) == 1.0);
        check("hyp1f1 series exp", rel(hyp1f1_series(1, 1, 1.0, 1e-13).value, std::exp(1.0)) <= 1e-13);
        {
            IntegratorSettings<double> s;
            const auto h = hyp1f1_hgm(5, 6, 5.0, 0.01, s);
            check("hyp1f1 hgm vs series", rel(h.f, hyp1f1_series(5, 6, 5.0, 1e-13).value) <= 1e-8);
        }
        check("gamma density", rel(pdf_series(1.0, 0.0, 5, 6).value, std::exp(-1.0) / 24.0) <= 1e-14);
        {
            const double t = 2.0, a = 0.5;
            const auto d = pdf_derivatives_series(t, a, 5, 6, TruncationPolicy{}, 3);
            const auto P = companion_p(t, a, 5, 6);
            const double resid = d.p3 - P.row(2).dot(d.state.vector());
            check("t-ODE residual", std::abs(resid) <= 1e-8 * std::abs(d.p3) + 1e-14);
        }
        {
            const double a = 3.0, t1 = 2.0, t2 = 6.0;
            const auto s1 = hgm_point(t1, a, 5, 6, default_u0);
            const auto s2 = hgm_point(t2, a, 5, 6, default_u0);
            const auto c2 = continue_along_t(s1, t2, 5, 6);
            check("factorization consistency", rel(c2.p, s2.p) <= 1e-10);
        }
        {
            const double a = 1e-6;
            const auto s = hgm_point(3.0, a, 5, 6, default_u0);
            check("near-Rayleigh density", std::abs(s.p - rayleigh_pdf(3.0, 5, 1.0)) <= 1e-6);
        }
        check("Rayleigh outage", rel(rayleigh_outage(1.0, 1, 1.0), 1.0 - std::exp(-1.0)) <= 1e-12);
        {
            const PdfSource src = rayleigh_source(1, 1.0);
            check("rectangle-rule outage", rel(outage_probability(src, OutageSpec{1.0}), 1.0 - std::exp(-1.0)) <= 1e-6);
        }
        {
            ScenarioConfig cfg;
            cfg.k_factor_db = -std::numeric_limits<double>::infinity();
            const auto rt = CorrelationMatrix::identity(2);
            const auto sim = simulate(cfg, rt, 20'000, 10, 7);
            const auto again = simulate(cfg, rt, 20'000, 10, 7);
            check("simulation determinism", sim.sorted_snr == again.sorted_snr);
        }
        if (failures > 0)
            throw ThresholdFailure(std::to_string(failures) + " self-test check(s) failed");
        return exit_ok;
    }

    void report(const char *code, const std::string &message)
    {
        const json j = {{"error", code}, {"message", message}};
        std::cerr << j.dump() << '\n';
    }

    // CLI11 reads a lone "-inf" as a short-option cluster; glue it to its flag.
    std::vector<std::string> normalize_args(int argc, char **argv)
    {
        std::vector<std::string> args(argv + 1, argv + argc);
        std::vector<std::string> out;
        for (std::size_t i = 0; i < args.size(); ++i)
        {
            if (args[i] == "--k-db" && i + 1 < args.size() && args[i + 1] == "-inf")
            {
                out.push_back("--k-db=-inf");
                ++i;
            }
            else
                out.push_back(args[i]);
        }
        std::reverse(out.begin(), out.end()); // CLI11 consumes the vector from the back
        return out;
    }
}

int main(int argc, char **argv)
{
    CLI::App app{"Stream-1 ZF SNR of Rician-Rayleigh MIMO by the holonomic gradient method"};
    app.set_version_flag("--version", HGM_MIMO_VERSION);
    app.require_subcommand(1, 1);

    Manifest flags;
    std::string config_path, k_db_text, correlation_text;
    double threshold_db = 0.0;
    std::uint64_t seed = 1;

    const auto add_scenario = [&](CLI::App *sub) {
        sub->add_option("--config", config_path, "JSON manifest; flags override its values")->check(CLI::ExistingFile);
        sub->add_option("--nr", flags.scenario.n_rx, "receive antennas N_R");
        sub->add_option("--nt", flags.scenario.n_tx, "transmit antennas N_T");
        sub->add_option("--k-db", k_db_text, "Rician K-factor in dB (-inf for Rayleigh-only fading)");
        sub->add_option("--as-deg", flags.scenario.azimuth_spread_deg, "azimuth spread in degrees");
        sub->add_option("--gs-db", flags.scenario.gamma_s_db, "per-symbol input SNR Gamma_s in dB");
        sub->add_option("--m", flags.scenario.constellation_size, "constellation size M");
        sub->add_option("--correlation", correlation_text, "identity | file:PATH | laplacian[:SPACING]");
        sub->add_option("-o,--output", flags.output, "CSV output path ('-' for stdout)");
        sub->add_option("--sidecar", flags.sidecar, "JSON sidecar path (default: OUTPUT.json)");
    };
    const auto add_grid = [&](CLI::App *sub) {
        sub->add_option("--t-min", flags.t_min, "smallest SNR of the grid (linear)");
        sub->add_option("--t-max", flags.t_max, "largest SNR of the grid (linear)");
        sub->add_option("--points", flags.points, "number of grid points");
    };
    const auto add_integration = [&](CLI::App *sub) {
        sub->add_option("--u0", flags.u0, "HGM anchor in normalized SNR units");
        sub->add_option("--rel-tol", flags.rel_tol, "integrator relative tolerance");
        sub->add_option("--abs-tol", flags.abs_tol, "integrator absolute tolerance");
    };
    const auto add_quadrature = [&](CLI::App *sub) {
        sub->add_option("--resolution", flags.resolution, "rectangle-rule panels per decade");
        sub->add_option("--tail-tol", flags.tail_tol, "capacity tail mass tolerance");
    };
    const auto add_sweep = [&](CLI::App *sub) {
        sub->add_option("--gb-min", flags.gb_min, "smallest per-bit SNR Gamma_b in dB");
        sub->add_option("--gb-max", flags.gb_max, "largest per-bit SNR Gamma_b in dB");
        sub->add_option("--gb-points", flags.gb_points, "number of Gamma_b values");
        sub->add_option("--threshold", flags.threshold, "outage threshold SNR (linear)");
        sub->add_option("--threshold-db", threshold_db, "outage threshold SNR in dB");
    };
    const auto add_simulation = [&](CLI::App *sub) {
        sub->add_option("--samples", flags.samples, "Monte Carlo channel draws");
        sub->add_option("--bins", flags.bins, "histogram bins");
        sub->add_option("--seed", seed, "master RNG seed");
    };

    CLI::App *pdf = app.add_subcommand("pdf", "SNR density on a linear grid");
    add_scenario(pdf);
    add_grid(pdf);
    add_integration(pdf);
    pdf->add_option("--method", flags.method, "hgm | series");
    CLI::App *cdf = app.add_subcommand("cdf", "SNR c.d.f. on a linear grid");
    add_scenario(cdf);
    add_grid(cdf);
    add_integration(cdf);
    add_quadrature(cdf);
    CLI::App *outage = app.add_subcommand("outage", "outage probability (optionally over a Gamma_b sweep)");
    add_scenario(outage);
    add_integration(outage);
    add_quadrature(outage);
    add_sweep(outage);
    CLI::App *capacity = app.add_subcommand("capacity", "ergodic capacity (optionally over a Gamma_b sweep)");
    add_scenario(capacity);
    add_integration(capacity);
    add_quadrature(capacity);
    add_sweep(capacity);
    CLI::App *sim = app.add_subcommand("simulate", "Monte Carlo histogram of the SNR");
    add_scenario(sim);
    add_simulation(sim);
    sim->add_option("--threshold", flags.threshold, "outage threshold SNR (linear)");
    CLI::App *compare = app.add_subcommand("compare", "HGM versus Monte Carlo with pass/fail thresholds");
    add_scenario(compare);
    add_grid(compare);
    add_integration(compare);
    add_quadrature(compare);
    add_sweep(compare);
    add_simulation(compare);
    app.add_subcommand("selftest", "quick invariant checks");

    try
    {
        std::vector<std::string> args = normalize_args(argc, argv);
        app.parse(args);
    }
    catch (const CLI::CallForHelp &e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion &e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError &e)
    {
        report("invalid_arguments", e.what());
        return exit_invalid;
    }

    try
    {
        CLI::App *sub = app.get_subcommands().front();
        Manifest m;
        m.command = sub->get_name();
        if (m.command == "selftest")
            return run_selftest();

        if (!config_path.empty())
            apply_config_file(config_path, m);
        const auto given = [sub](const char *name) {
            const CLI::Option *opt = sub->get_option_no_throw(name);
            return opt != nullptr && opt->count() > 0;
        };
        if (given("--nr"))
            m.scenario.n_rx = flags.scenario.n_rx;
        if (given("--nt"))
            m.scenario.n_tx = flags.scenario.n_tx;
        if (given("--k-db"))
            m.scenario.k_factor_db = parse_k_db(k_db_text);
        if (given("--as-deg"))
            m.scenario.azimuth_spread_deg = flags.scenario.azimuth_spread_deg;
        if (given("--gs-db"))
            m.scenario.gamma_s_db = flags.scenario.gamma_s_db;
        if (given("--m"))
            m.scenario.constellation_size = flags.scenario.constellation_size;
        if (given("--correlation"))
            m.scenario.correlation = CorrelationSpec::parse(correlation_text);
        if (given("--output"))
            m.output = flags.output;
        if (given("--sidecar"))
            m.sidecar = flags.sidecar;
        if (given("--t-min"))
            m.t_min = flags.t_min;
        if (given("--t-max"))
            m.t_max = flags.t_max;
        if (given("--points"))
            m.points = flags.points;
        if (given("--u0"))
            m.u0 = flags.u0;
        if (given("--rel-tol"))
            m.rel_tol = flags.rel_tol;
        if (given("--abs-tol"))
            m.abs_tol = flags.abs_tol;
        if (given("--method"))
            m.method = flags.method;
        if (given("--resolution"))
            m.resolution = flags.resolution;
        if (given("--tail-tol"))
            m.tail_tol = flags.tail_tol;
        if (given("--gb-min") || given("--gb-max") || given("--gb-points"))
            m.sweep = true;
        if (given("--gb-min"))
            m.gb_min = flags.gb_min;
        if (given("--gb-max"))
            m.gb_max = flags.gb_max;
        if (given("--gb-points"))
            m.gb_points = flags.gb_points;
        if (given("--threshold") && given("--threshold-db"))
            throw ValidationError("give either --threshold or --threshold-db");
        if (given("--threshold"))
            m.threshold = flags.threshold;
        if (given("--threshold-db"))
            m.threshold = db_to_linear(threshold_db);
        if (given("--samples"))
            m.samples = flags.samples;
        if (given("--bins"))
            m.bins = flags.bins;
        if (given("--seed"))
            m.seed = seed;
        m.validate();

        if (m.command == "pdf")
            return run_pdf(m);
        if (m.command == "cdf")
            return run_cdf(m);
        if (m.command == "outage")
            return run_outage(m);
        if (m.command == "capacity")
            return run_capacity(m);
        if (m.command == "simulate")
            return run_simulate(m);
        return run_compare(m);
    }
    catch (const ValidationError &e)
    {
        report("invalid_config", e.what());
        return exit_invalid;
    }
    catch (const DomainError &e)
    {
        report("invalid_config", e.what());
        return exit_invalid;
    }
    catch (const NumericalError &e)
    {
        report("numerical_failure", e.what());
        return exit_numerical;
    }
    catch (const ThresholdFailure &e)
    {
        report("threshold_failed", e.what());
        return exit_threshold;
    }
    catch (const std::exception &e)
    {
        report("numerical_failure", e.what());
        return exit_numerical;
    }
}
