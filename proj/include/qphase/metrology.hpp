#pragma once

// Frequency, length and Kerr-strength uncertainties from phase-measurement statistics.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "qphase/protocols.hpp"

namespace qphase {

struct MetrologyConfig
{
    std::size_t shots = 1; ///< M
    std::size_t photons = 1;
    ResonatorParams res;
    double epsilon = 1.0;
    std::optional<double> length; ///< resonator length L
    double tau = 1.0;             ///< interrogation time used when Gamma = 0

    void validate() const
    {
        if (shots < 1)
            throw InvalidArgument("number of measurements must be at least 1");
        if (photons < 1)
            throw InvalidArgument("photon number must be at least 1");
        if (!(epsilon > 0.0 && epsilon <= 1.0))
            throw InvalidArgument("epsilon must lie in (0, 1]");
        if (!(tau > 0.0))
            throw InvalidArgument("interrogation time must be positive");
        if (length && !(*length > 0.0))
            throw InvalidArgument("resonator length must be positive");
        res.validate();
    }
};

struct MetrologyResult
{
    double delta_omega = 0.0;
    double tau_opt = 0.0;
    double tau_grid = 0.0; ///< nearest time on the maximum-slope phase grid
    std::optional<double> delta_length;
    std::optional<double> delta_chi;
    /// epsilon < 1 makes eps^(1-N) exceed one, so the multi-photon uncertainty grows with imperfection.
    bool epsilon_flag = false;
    std::string phase_condition;
};

/// df/dx from differences at steps h and h/2 combined by Richardson extrapolation.
/// `forward` switches to the one-sided second-order stencil, for curves that end at x.
inline double richardson_derivative(const std::function<double(double)>& f, double x, double h, bool forward = false)
{
    if (!(h > 0.0))
        throw InvalidArgument("finite-difference step must be positive");
    auto diff = [&](double s) {
        if (forward)
            return (-3.0 * f(x) + 4.0 * f(x + s) - f(x + 2.0 * s)) / (2.0 * s);
        return (f(x + s) - f(x - s)) / (2.0 * s);
    };
    return (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
}

/// |d omega| = sqrt(P (1 - P)) / (sqrt(M) |dP/d omega|), with the slope from finite differences.
inline double uncertainty_omega(const std::function<double(double)>& pe_curve, double omega, const MetrologyConfig& cfg,
                                double relative_step = 1e-6)
{
    cfg.validate();
    const double slope = richardson_derivative(pe_curve, omega, relative_step * std::abs(omega));
    if (std::abs(slope) < 1e-14)
        throw DivergentUncertainty("dP/d omega vanishes; the measurement carries no frequency information here");
    const double p = std::clamp(pe_curve(omega), 0.0, 1.0);
    return std::sqrt(p * (1.0 - p)) / (std::sqrt(static_cast<double>(cfg.shots)) * std::abs(slope));
}

/// eps^(1-N) exp(N G tau) / (sqrt(M) N tau): the uncertainty at a maximum-slope point.
inline double closed_form_uncertainty_omega(const MetrologyConfig& cfg, double tau)
{
    cfg.validate();
    const double n = static_cast<double>(cfg.photons);
    return std::pow(cfg.epsilon, 1.0 - n) * std::exp(n * cfg.res.gamma * tau) /
           (std::sqrt(static_cast<double>(cfg.shots)) * n * tau);
}

/// Interrogation time nearest `target` where P_e = 1/2 and the slope is extremal.
///
/// With a phase-0 readout the branch argument is w~ N tau + N pi/2, so the grid is
/// w~ N tau = j pi - N pi/2; for N = 1 these are the odd multiples of pi/2.
inline double slope_grid_time(const ResonatorParams& res, std::size_t photons, double target)
{
    const double n = static_cast<double>(photons);
    const double rate = effective_frequency(res, photons) * n;
    const double offset = photons % 2 == 1 ? 0.5 * kPi : 0.0;
    double j = std::round((rate * target - offset) / kPi);
    if (offset + j * kPi <= 0.0)
        j = 1.0;
    return (offset + j * kPi) / rate;
}

inline double optimal_tau(const MetrologyConfig& cfg)
{
    return cfg.res.gamma > 0.0 ? 1.0 / (static_cast<double>(cfg.photons) * cfg.res.gamma) : cfg.tau;
}

/// |dL| = L |d omega| / omega.
inline double length_uncertainty(const MetrologyConfig& cfg, double delta_omega)
{
    if (!cfg.length)
        throw InvalidArgument("resonator length not set");
    if (!(delta_omega >= 0.0))
        throw InvalidArgument("frequency uncertainty must be nonnegative");
    return *cfg.length * delta_omega / cfg.res.omega;
}

/// e eps^(1-N) G / (sqrt(M) N).
inline double min_uncertainty_chi(const MetrologyConfig& cfg)
{
    cfg.validate();
    if (cfg.photons < 2)
        throw InvalidArgument("the Kerr shift is unobservable below two photons");
    if (!(cfg.res.gamma > 0.0))
        throw InvalidArgument("the Kerr uncertainty estimate needs a nonzero damping rate");
    const double n = static_cast<double>(cfg.photons);
    return std::exp(1.0) * std::pow(cfg.epsilon, 1.0 - n) * cfg.res.gamma / (std::sqrt(static_cast<double>(cfg.shots)) * n);
}

inline MetrologyResult min_uncertainty_omega(const MetrologyConfig& cfg)
{
    cfg.validate();
    MetrologyResult r;
    r.tau_opt = optimal_tau(cfg);
    r.tau_grid = slope_grid_time(cfg.res, cfg.photons, r.tau_opt);
    r.delta_omega = closed_form_uncertainty_omega(cfg, r.tau_opt);
    if (cfg.length)
        r.delta_length = length_uncertainty(cfg, r.delta_omega);
    if (cfg.photons >= 2 && cfg.res.gamma > 0.0)
        r.delta_chi = min_uncertainty_chi(cfg);
    r.epsilon_flag = cfg.photons > 1 && cfg.epsilon < 1.0;
    r.phase_condition = cfg.photons % 2 == 1 ? "w~ N tau = (2j + 1) pi/2" : "w~ N tau = j pi";
    return r;
}

// ---------------------------------------------------------------------------
// Simulated probability curves.

inline SystemParams metrology_system(const MetrologyConfig& cfg)
{
    SystemParams p;
    p.res = cfg.res;
    p.res.dim = cfg.res.gamma > 0.0 ? 2 * cfg.photons + 1 : recommended_dim(cfg.photons, cfg.epsilon);
    p.epsilon = cfg.epsilon;
    return p;
}

inline double simulated_pe(const MetrologyConfig& cfg, double tau)
{
    const SystemParams p = metrology_system(cfg);
    const CnotChannel ch = cfg.epsilon == 1.0 ? ideal_cnot() : imperfect_cnot(cfg.epsilon);
    return run_protocol(phase_measurement_schedule(cfg.photons, tau, p, ch), p).p_excited;
}

/// P_e as a function of the resonator frequency at fixed interrogation time.
inline std::function<double(double)> simulated_pe_vs_omega(MetrologyConfig cfg, double tau)
{
    return [cfg, tau](double omega) mutable {
        cfg.res.omega = omega;
        return simulated_pe(cfg, tau);
    };
}

/// P_e as a function of the Kerr strength at fixed interrogation time.
inline std::function<double(double)> simulated_pe_vs_chi(MetrologyConfig cfg, double tau)
{
    return [cfg, tau](double chi) mutable {
        cfg.res.chi = chi;
        return simulated_pe(cfg, tau);
    };
}

/// Error propagation on the simulated curve at the grid point nearest the optimal time.
inline double numeric_uncertainty_omega(const MetrologyConfig& cfg)
{
    const double tau = slope_grid_time(cfg.res, cfg.photons, optimal_tau(cfg));
    return uncertainty_omega(simulated_pe_vs_omega(cfg, tau), cfg.res.omega, cfg);
}

/// Same for chi. The step is taken relative to omega, and differences turn one-sided near chi = 0.
inline double numeric_uncertainty_chi(const MetrologyConfig& cfg)
{
    cfg.validate();
    if (cfg.photons < 2)
        throw InvalidArgument("the Kerr shift is unobservable below two photons");
    const double tau = slope_grid_time(cfg.res, cfg.photons, optimal_tau(cfg));
    const auto curve = simulated_pe_vs_chi(cfg, tau);
    const double h = 1e-6 * cfg.res.omega;
    const double slope = richardson_derivative(curve, cfg.res.chi, h, cfg.res.chi < h);
    if (std::abs(slope) < 1e-14)
        throw DivergentUncertainty("dP/d chi vanishes");
    const double p = std::clamp(curve(cfg.res.chi), 0.0, 1.0);
    return std::sqrt(p * (1.0 - p)) / (std::sqrt(static_cast<double>(cfg.shots)) * std::abs(slope));
}

inline nlohmann::ordered_json metrology_json(const MetrologyConfig& cfg, const MetrologyResult& r)
{
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
    return {{"shots", cfg.shots},
            {"photons", cfg.photons},
            {"epsilon", cfg.epsilon},
            {"gamma_over_omega", cfg.res.gamma / cfg.res.omega},
            {"chi_over_omega", cfg.res.chi / cfg.res.omega},
            {"delta_omega", r.delta_omega},
            {"tau_opt", r.tau_opt},
            {"tau_grid", r.tau_grid},
            {"phase_condition", r.phase_condition},
            {"delta_length", opt(r.delta_length)},
            {"delta_chi", opt(r.delta_chi)},
            {"epsilon_flag", r.epsilon_flag}};
}

} // namespace qphase
