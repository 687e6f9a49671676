#pragma once

// Command-line front end. Frequencies are given as ratios to omega, which is 1 internally.
//
// Exit codes: 0 success, 1 other failure, 2 configuration error, 3 numeric overflow,
// 4 Fock truncation or leakage.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qphase/gauss.hpp"
#include "qphase/metrology.hpp"

namespace qphase::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kOverflow = 3, kTruncation = 4 };

enum class Format { csv, json };

/// Options shared by every command.
struct RunConfig
{
    std::size_t photons = 1;
    double gamma_over_omega = 0.0;
    double chi_over_omega = 0.0;
    double epsilon = 1.0;
    Format format = Format::csv;
    std::string output_path; ///< empty = standard output
    std::optional<double> omega_hz;

    ResonatorParams resonator() const
    {
        ResonatorParams r;
        r.gamma = gamma_over_omega;
        r.chi = chi_over_omega;
        r.validate();
        return r;
    }
};

struct FactorArgs
{
    std::uint64_t n_target = 0;
    std::uint64_t k_terms = 4;
    std::string mode = "analytic";
    std::size_t threads = 0;
};

struct PhaseArgs
{
    double phi_min = 0.0;
    double phi_max = 2.0 * kPi;
    std::size_t points = 64;
    double tolerance = 1e-6;
    double pulse_phase = 0.0;
    std::optional<std::size_t> dim;
    bool exact = false;
    std::optional<std::size_t> shots;
    std::uint64_t seed = 0;
};

struct VisibilityArgs
{
    std::vector<std::size_t> photons{1, 2, 3};
    std::vector<double> chi{0.0};
    std::vector<double> gamma{6.92e-6};
};

struct MetrologyArgs
{
    std::size_t shots = 1;
    std::optional<double> length;
    double tau = 1.0;
    bool chi = false;
    bool numeric = false;
};

namespace detail {

/// Writes to the configured file, or to `out` when no path was given.
inline int emit(const RunConfig& cfg, std::ostream& out, std::ostream& err, const std::string& text)
{
    if (cfg.output_path.empty()) {
        out << text;
        return kOk;
    }
    std::ofstream f(cfg.output_path, std::ios::binary);
    if (!f) {
        err << "error: cannot open " << cfg.output_path << " for writing\n";
        return kConfig;
    }
    f << text;
    return f ? kOk : kFailure;
}

inline std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline double two_pi_hz(const RunConfig& cfg) { return cfg.omega_hz ? 2.0 * kPi * *cfg.omega_hz : 1.0; }

} // namespace detail

inline int cmd_factor(const RunConfig& cfg, const FactorArgs& args, std::ostream& out, std::ostream& err)
{
    GaussConfig g;
    g.n_target = args.n_target;
    g.k_terms = args.k_terms;
    g.photons = cfg.photons;
    g.res = cfg.resonator();
    g.epsilon = cfg.epsilon;
    g.mode = args.mode == "simulated" ? GaussMode::simulated : GaussMode::analytic;
    g.threads = args.threads;
    const GaussReport report = classify_factors(g);

    err << "candidates:";
    for (auto c : report.candidates())
        err << ' ' << c;
    err << '\n';
    return detail::emit(cfg, out, err,
                        cfg.format == Format::json ? detail::dump(gauss_json(g, report)) : gauss_csv(report));
}

inline int cmd_phase(const RunConfig& cfg, const PhaseArgs& args, std::ostream& out, std::ostream& err)
{
    if (args.points == 0)
        throw InvalidArgument("phase sweep needs at least one point");
    if (!(args.phi_max >= args.phi_min) || args.phi_min < 0.0)
        throw InvalidArgument("phase range must satisfy 0 <= phi-min <= phi-max");
    if (!(args.tolerance >= 0.0))
        throw InvalidArgument("tolerance must be nonnegative");

    SystemParams p;
    p.res = cfg.resonator();
    p.res.dim = args.dim ? *args.dim
                         : (p.res.gamma > 0.0 ? 2 * cfg.photons + 1 : recommended_dim(cfg.photons, cfg.epsilon));
    p.epsilon = cfg.epsilon;
    p.validate();
    const CnotChannel ch = cfg.epsilon == 1.0 ? ideal_cnot() : imperfect_cnot(cfg.epsilon);
    RunOptions opts;
    opts.mode = args.exact ? RunOptions::Mode::exact : RunOptions::Mode::instant;
    opts.shots = args.shots;

    const double rate = effective_frequency(p.res, cfg.photons) * static_cast<double>(cfg.photons);
    const double time_unit = detail::two_pi_hz(cfg);
    std::ostringstream csv;
    csv << "tau,pe_simulated,pe_predicted,abs_err\n";
    double worst = 0.0;
    for (std::size_t i = 0; i < args.points; ++i) {
        const double phi = args.points == 1 ? args.phi_min
                                            : args.phi_min + (args.phi_max - args.phi_min) * static_cast<double>(i) /
                                                                 static_cast<double>(args.points - 1);
        const double tau = phi / rate;
        opts.seed = args.seed + i;
        const auto rec = run_protocol(phase_measurement_schedule(cfg.photons, tau, p, ch, args.pulse_phase), p, opts);
        const double sim = rec.sampled ? rec.sampled->frequency : rec.p_excited;
        const double pred = predicted_pe_with_pulse(cfg.photons, phi, p.res.gamma * tau, cfg.epsilon, args.pulse_phase);
        const double e = std::abs(sim - pred);
        worst = std::max(worst, e);
        csv << format_g12(tau / time_unit) << ',' << format_g12(sim) << ',' << format_g12(pred) << ','
            << format_g12(e) << '\n';
    }
    const int rc = detail::emit(cfg, out, err, csv.str());
    if (rc != kOk)
        return rc;
    err << "max abs_err: " << format_g12(worst) << '\n';
    if (worst > args.tolerance) {
        err << "error: max abs_err exceeds tolerance " << format_g12(args.tolerance) << '\n';
        return kFailure;
    }
    return kOk;
}

inline int cmd_visibility(const RunConfig& cfg, const VisibilityArgs& args, std::ostream& out, std::ostream& err)
{
    if (args.photons.empty() || args.chi.empty() || args.gamma.empty())
        throw InvalidArgument("visibility sweep lists must not be empty");
    if (!(cfg.epsilon > 0.0 && cfg.epsilon <= 1.0))
        throw InvalidArgument("epsilon must lie in (0, 1]");
    std::ostringstream csv;
    csv << "N,chi,gamma,epsilon,V_closed,V_numeric\n";
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (std::size_t n : args.photons) {
        if (n < 1)
            throw InvalidArgument("photon number must be at least 1");
        for (double chi : args.chi)
            for (double gamma : args.gamma) {
                ResonatorParams r;
                r.chi = chi;
                r.gamma = gamma;
                r.validate();
                const auto closed = visibility_multi(n, r, cfg.epsilon);
                const double numeric = visibility_numeric(n, r, cfg.epsilon);
                csv << n << ',' << format_g12(chi) << ',' << format_g12(gamma) << ',' << format_g12(cfg.epsilon)
                    << ',' << format_g12(closed.value) << ',' << format_g12(numeric) << '\n';
                rows.push_back({{"N", n},
                                {"chi", chi},
                                {"gamma", gamma},
                                {"epsilon", cfg.epsilon},
                                {"branch", branch_name(closed.branch)},
                                {"tau_peak", closed.tau_peak},
                                {"V_closed", closed.value},
                                {"V_numeric", numeric}});
            }
    }
    return detail::emit(cfg, out, err, cfg.format == Format::json ? detail::dump(rows) : csv.str());
}

inline int cmd_metrology(const RunConfig& cfg, const MetrologyArgs& args, std::ostream& out, std::ostream& err)
{
    MetrologyConfig m;
    m.shots = args.shots;
    m.photons = cfg.photons;
    m.res = cfg.resonator();
    m.epsilon = cfg.epsilon;
    m.length = args.length;
    m.tau = args.tau;
    if (args.chi)
        static_cast<void>(min_uncertainty_chi(m)); // validates N >= 2 and Gamma > 0
    const MetrologyResult r = min_uncertainty_omega(m);
    auto j = metrology_json(m, r);
    if (!args.chi)
        j.erase("delta_chi");
    if (args.numeric) {
        j["numeric_delta_omega"] = numeric_uncertainty_omega(m);
        if (args.chi)
            j["numeric_delta_chi"] = numeric_uncertainty_chi(m);
    }
    if (cfg.omega_hz) {
        const double w = detail::two_pi_hz(cfg);
        nlohmann::ordered_json si{{"omega_hz", *cfg.omega_hz},
                                  {"delta_omega_rad_per_s", r.delta_omega * w},
                                  {"tau_opt_s", r.tau_opt / w}};
        if (args.chi && r.delta_chi)
            si["delta_chi_rad_per_s"] = *r.delta_chi * w;
        j["si"] = si;
    }
    if (r.epsilon_flag)
        err << "note: epsilon < 1 with N > 1, the eps^(1-N) factor makes the uncertainty grow\n";
    return detail::emit(cfg, out, err, detail::dump(j));
}

/// Quick internal consistency checks; one line per check.
inline int cmd_selftest(std::ostream& out)
{
    int failures = 0;
    auto report = [&](const char* name, bool ok) {
        out << (ok ? "PASS " : "FAIL ") << name << '\n';
        failures += ok ? 0 : 1;
    };

    GaussConfig g;
    g.n_target = 1001;
    g.k_terms = 4;
    report("factor 1001", classify_factors(g).candidates() == std::vector<std::uint64_t>{7, 11, 13});

    for (std::size_t n : {1u, 3u, 4u}) {
        SystemParams p;
        p.epsilon = 0.99;
        p.res.dim = recommended_dim(n, p.epsilon);
        const double phi = 0.7;
        const double tau = phi / (effective_frequency(p.res, n) * static_cast<double>(n));
        const double pe =
            run_protocol(phase_measurement_schedule(n, tau, p, imperfect_cnot(p.epsilon)), p).p_excited;
        const std::string name = "phase N=" + std::to_string(n);
        report(name.c_str(), std::abs(pe - predicted_pe(n, phi, 0.0, p.epsilon)) < 1e-6);
    }

    const auto ch = imperfect_cnot(0.95);
    report("CNOT channel CPTP", ch.completeness_defect() < 1e-10 && min_eigenvalue(ch.choi()) > -1e-9);

    ResonatorParams r;
    r.gamma = 1e-3;
    report("visibility N=3", std::abs(visibility_multi(3, r, 1.0).value - visibility_numeric(3, r, 1.0)) < 1e-6);

    return failures == 0 ? kOk : kFailure;
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Resonator phase measurement and Gauss-sum factoring"};
    app.name("qphase");
    app.require_subcommand(1);

    RunConfig cfg;
    std::string format = "csv";
    // `sweep` = false leaves photon number and rates to the caller (list-valued in visibility)
    auto common = [&](CLI::App* sub, bool sweep = true, bool with_format = true) {
        if (sweep) {
            sub->add_option("--photons", cfg.photons, "photon number N")->check(CLI::PositiveNumber);
            sub->add_option("--gamma-over-omega,--gamma", cfg.gamma_over_omega, "damping rate / omega")
                ->check(CLI::NonNegativeNumber);
            sub->add_option("--chi-over-omega", cfg.chi_over_omega, "Kerr strength / omega")
                ->check(CLI::NonNegativeNumber);
        }
        sub->add_option("--epsilon", cfg.epsilon, "CNOT quality")->check(CLI::Range(0.0, 1.0));
        if (with_format)
            sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
        sub->add_option("--output,-o", cfg.output_path, "output file (default: standard output)");
        sub->add_option("--omega-hz", cfg.omega_hz, "omega / 2 pi in Hz, rescales printed units")
            ->check(CLI::PositiveNumber);
    };

    FactorArgs fa;
    auto* factor = app.add_subcommand("factor", "scan trial factors with a truncated Gauss sum");
    common(factor);
    factor->add_option("--n", fa.n_target, "number to factor")->required();
    factor->add_option("--k", fa.k_terms, "truncation K (K + 1 terms)");
    factor->add_option("--mode", fa.mode, "analytic or simulated")->check(CLI::IsMember({"analytic", "simulated"}));
    factor->add_option("--threads", fa.threads, "worker threads (0 = all cores)");

    PhaseArgs pa;
    auto* phase = app.add_subcommand("phase", "sweep the free-evolution phase, simulated vs predicted P_e");
    common(phase);
    phase->add_option("--phi-min", pa.phi_min, "first phase w~ N tau");
    phase->add_option("--phi-max", pa.phi_max, "last phase w~ N tau");
    phase->add_option("--points", pa.points, "number of sweep points");
    phase->add_option("--tolerance", pa.tolerance, "largest accepted abs_err");
    phase->add_option("--pulse-phase", pa.pulse_phase, "phase of the final pi/2 pulse");
    phase->add_option("--dim", pa.dim, "Fock truncation")->check(CLI::Range(2, 1 << 12));
    phase->add_flag("--exact", pa.exact, "keep the resonator rotating during gates");
    auto* shots = phase->add_option("--shots", pa.shots, "sample this many measurements per point");
    shots->check(CLI::PositiveNumber);
    phase->add_option("--seed", pa.seed, "sampling seed")->needs(shots);

    VisibilityArgs va;
    auto* vis = app.add_subcommand("visibility", "closed-form and brute-force visibilities");
    common(vis, false);
    vis->add_option("--photons", va.photons, "photon numbers")->check(CLI::PositiveNumber);
    vis->add_option("--chi-over-omega", va.chi, "Kerr strengths / omega")->check(CLI::NonNegativeNumber);
    vis->add_option("--gamma-over-omega,--gamma", va.gamma, "damping rates / omega")->check(CLI::NonNegativeNumber);

    MetrologyArgs ma;
    auto* met = app.add_subcommand("metrology", "frequency, length and Kerr uncertainties (JSON)");
    common(met, true, false);
    met->add_option("--shots,-M", ma.shots, "number of measurements M")->check(CLI::PositiveNumber);
    met->add_option("--length", ma.length, "resonator length")->check(CLI::PositiveNumber);
    met->add_option("--tau", ma.tau, "interrogation time when gamma = 0")->check(CLI::PositiveNumber);
    met->add_flag("--chi", ma.chi, "also report the Kerr-strength uncertainty");
    met->add_flag("--numeric", ma.numeric, "add finite-difference values from simulated curves");

    auto* self = app.add_subcommand("selftest", "run internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kConfig;
    }
    cfg.format = format == "json" ? Format::json : Format::csv;

    try {
        if (factor->parsed())
            return cmd_factor(cfg, fa, out, err);
        if (phase->parsed())
            return cmd_phase(cfg, pa, out, err);
        if (vis->parsed())
            return cmd_visibility(cfg, va, out, err);
        if (met->parsed())
            return cmd_metrology(cfg, ma, out, err);
        if (self->parsed())
            return cmd_selftest(out);
    } catch (const NumericOverflow& e) {
        err << "error: " << e.what() << '\n';
        return kOverflow;
    } catch (const TruncationError& e) {
        err << "error: " << e.what() << '\n';
        return kTruncation;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const OutOfRange& e) {
        err << "error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

} // namespace qphase::cli
