#pragma once

// Truncated Gauss sums for factoring, from closed forms or from full protocol runs.

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <future>
#include <string>
#include <thread>
#include <vector>

#include "qphase/protocols.hpp"

namespace qphase {

enum class GaussMode { analytic, simulated };

inline const char* mode_name(GaussMode m) { return m == GaussMode::analytic ? "analytic" : "simulated"; }

struct GaussConfig
{
    std::uint64_t n_target = 1001; ///< number to factor
    std::uint64_t k_terms = 4;     ///< K; the sum has K + 1 terms
    std::size_t photons = 1;
    ResonatorParams res;
    double epsilon = 1.0;
    GaussMode mode = GaussMode::analytic;
    std::size_t threads = 0; ///< 0 = hardware concurrency

    static constexpr std::size_t max_simulated_photons = 8;
    static constexpr std::uint64_t max_simulated_k = 6;

    void validate() const
    {
        if (n_target < 4)
            throw InvalidArgument("number to factor must be at least 4");
        if (photons < 1)
            throw InvalidArgument("photon number must be at least 1");
        if (!(epsilon > 0.0 && epsilon <= 1.0))
            throw InvalidArgument("epsilon must lie in (0, 1]");
        res.validate();
        std::uint64_t sq = 0;
        if (__builtin_mul_overflow(k_terms, k_terms, &sq))
            throw NumericOverflow("K^2 does not fit in 64 bits for K = " + std::to_string(k_terms));
        if (mode == GaussMode::simulated) {
            if (photons > max_simulated_photons)
                throw InvalidArgument("simulated mode supports at most 8 photons");
            if (k_terms > max_simulated_k)
                throw InvalidArgument("simulated mode supports at most K = 6");
        }
    }
};

struct GaussRow
{
    std::uint64_t trial = 0;
    double value = 0.0; ///< |R|
    bool is_factor = false;
};

struct GaussReport
{
    std::vector<GaussRow> rows; ///< sorted by trial
    double threshold = 0.0;
    std::uint64_t scan_first = 2;
    std::uint64_t scan_last = 0;

    std::vector<std::uint64_t> candidates() const
    {
        std::vector<std::uint64_t> out;
        for (const auto& r : rows)
            if (r.is_factor)
                out.push_back(r.trial);
        return out;
    }
};

inline const double kFactorThreshold = 1.0 / std::sqrt(2.0);

/// floor(sqrt(n)), exact for all 64-bit n.
inline std::uint64_t isqrt(std::uint64_t n)
{
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (static_cast<unsigned __int128>(r) * r > n)
        --r;
    while (static_cast<unsigned __int128>(r + 1) * (r + 1) <= n)
        ++r;
    return r;
}

/// k^2 N mod n, with k^2 checked for overflow.
inline std::uint64_t phase_residue(std::uint64_t k, std::uint64_t n_target, std::uint64_t trial)
{
    if (trial == 0)
        throw InvalidArgument("trial factor must be positive");
    std::uint64_t k2 = 0;
    if (__builtin_mul_overflow(k, k, &k2))
        throw NumericOverflow("k^2 overflows 64 bits for k = " + std::to_string(k));
    const unsigned __int128 prod = static_cast<unsigned __int128>(k2 % trial) * (n_target % trial);
    return static_cast<std::uint64_t>(prod % trial);
}

/// Complete Gauss sum (1/n) sum_{k<n} exp(-2 pi i k^2 N / n).
inline cplx gauss_sum(std::uint64_t n_target, std::uint64_t trial)
{
    if (trial < 2)
        throw InvalidArgument("trial factor must be at least 2");
    cplx s = 0.0;
    for (std::uint64_t k = 0; k < trial; ++k) {
        const double arg = 2.0 * kPi * static_cast<double>(phase_residue(k, n_target, trial)) / static_cast<double>(trial);
        s += std::exp(-kI * arg);
    }
    return s / static_cast<double>(trial);
}

/// Free-evolution times 2 pi k^2 N / (n w~ N_photons), k = 0..K.
inline std::vector<double> wait_times(const GaussConfig& cfg, std::uint64_t trial)
{
    cfg.validate();
    if (trial < 2)
        throw InvalidArgument("trial factor must be at least 2");
    const double wt = effective_frequency(cfg.res, cfg.photons);
    const double ratio = static_cast<double>(cfg.n_target) / static_cast<double>(trial);
    std::vector<double> out;
    out.reserve(cfg.k_terms + 1);
    for (std::uint64_t k = 0; k <= cfg.k_terms; ++k) {
        const double k2 = static_cast<double>(k) * static_cast<double>(k);
        out.push_back(2.0 * kPi * k2 * ratio / (wt * static_cast<double>(cfg.photons)));
    }
    return out;
}

/// One closed-form term eps^(N-1) exp(-2 pi k^2 G N / (w~ n)) cos(2 pi k^2 N / n).
inline double analytic_term(const GaussConfig& cfg, std::uint64_t trial, std::uint64_t k)
{
    const double wt = effective_frequency(cfg.res, cfg.photons);
    const double k2 = static_cast<double>(k) * static_cast<double>(k);
    const double ratio = static_cast<double>(cfg.n_target) / static_cast<double>(trial);
    const double damping = std::exp(-2.0 * kPi * k2 * cfg.res.gamma * ratio / wt);
    const double phase = 2.0 * kPi * static_cast<double>(phase_residue(k, cfg.n_target, trial)) /
                         static_cast<double>(trial);
    return std::pow(cfg.epsilon, static_cast<double>(cfg.photons - 1)) * damping * std::cos(phase);
}

/// System used for simulated terms: default qubits, Fock space sized for the run.
inline SystemParams simulation_params(const GaussConfig& cfg)
{
    SystemParams p;
    p.res = cfg.res;
    // damping feeds lower Fock states that the disentangling swaps can push upward
    p.res.dim = cfg.res.gamma > 0.0 ? 2 * cfg.photons + 1 : recommended_dim(cfg.photons, cfg.epsilon);
    p.epsilon = cfg.epsilon;
    return p;
}

/// Extra free evolution used for even N, a quarter period of the N-photon phase.
///
/// With a phase-0 readout pulse even N measures sin(phi); waiting pi/(2 w~ N) longer turns that
/// into cos(phi). A phase-pi/2 pulse would also do it, but that quadrature picks up qubit-1
/// coherence left behind by photon-loss branches, which the closed form does not contain.
inline double readout_delay(const ResonatorParams& res, std::size_t photons)
{
    if (photons % 2 == 1)
        return 0.0;
    return kPi / (2.0 * effective_frequency(res, photons) * static_cast<double>(photons));
}

/// Coherence factor for term k recovered from a full protocol simulation.
inline double simulated_term(const GaussConfig& cfg, std::uint64_t trial, std::uint64_t k)
{
    cfg.validate();
    if (trial < 2)
        throw InvalidArgument("trial factor must be at least 2");
    if (k > cfg.k_terms)
        throw OutOfRange("term index exceeds K");
    const SystemParams p = simulation_params(cfg);
    const double delay = readout_delay(cfg.res, cfg.photons);
    const double tau = wait_times(cfg, trial)[k] + delay;
    const CnotChannel ch = cfg.epsilon == 1.0 ? ideal_cnot() : imperfect_cnot(cfg.epsilon);
    const double pe = run_protocol(phase_measurement_schedule(cfg.photons, tau, p, ch), p).p_excited;
    const double sign = cfg.photons % 4 <= 1 ? -1.0 : 1.0;
    // undo the damping accrued during the delay
    const double n = static_cast<double>(cfg.photons);
    return sign * (2.0 * pe - 1.0) * std::exp(cfg.res.gamma * n * delay);
}

/// R = (1 / (K + 1)) sum_k term_k.
inline double truncated_real_sum(const GaussConfig& cfg, std::uint64_t trial)
{
    cfg.validate();
    if (trial < 2)
        throw InvalidArgument("trial factor must be at least 2");
    double s = 0.0;
    for (std::uint64_t k = 0; k <= cfg.k_terms; ++k)
        s += cfg.mode == GaussMode::analytic ? analytic_term(cfg, trial, k) : simulated_term(cfg, trial, k);
    return s / static_cast<double>(cfg.k_terms + 1);
}

/// Scan trial factors 2..floor(sqrt N) and mark those with |R| >= 1/sqrt 2.
inline GaussReport classify_factors(const GaussConfig& cfg)
{
    cfg.validate();
    GaussReport report;
    report.threshold = kFactorThreshold;
    report.scan_last = isqrt(cfg.n_target);
    const std::uint64_t first = report.scan_first, last = report.scan_last;
    const std::uint64_t count = last >= first ? last - first + 1 : 0;
    report.rows.resize(count);

    std::size_t workers = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<std::size_t>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(count, 1)));
    auto work = [&](std::size_t w) {
        for (std::uint64_t i = w; i < count; i += workers) {
            const std::uint64_t trial = first + i;
            const double v = std::abs(truncated_real_sum(cfg, trial));
            report.rows[i] = GaussRow{trial, v, v >= kFactorThreshold};
        }
    };
    if (workers <= 1) {
        work(0);
    } else {
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, work, w));
        for (auto& j : jobs)
            j.get();
    }
    return report;
}

/// Largest N whose k_max term at the smallest trial n = 2 still has damping exponent <= 1,
/// i.e. floor(w~ / (pi k_max^2 G)).
inline std::uint64_t estimate_max_factorizable(const ResonatorParams& res, std::size_t photons, std::uint64_t k_max)
{
    res.validate();
    if (k_max < 1)
        throw InvalidArgument("k_max must be at least 1");
    if (res.gamma == 0.0)
        throw Unbounded("without damping there is no size limit");
    const double k2 = static_cast<double>(k_max) * static_cast<double>(k_max);
    const double bound = effective_frequency(res, photons) / (kPi * k2 * res.gamma);
    if (!(bound < 1.8e19))
        throw NumericOverflow("estimate exceeds 64-bit range");
    return static_cast<std::uint64_t>(std::floor(bound));
}

// ---------------------------------------------------------------------------
// Output.

inline std::string format_g12(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

inline std::string gauss_csv(const GaussReport& report)
{
    std::string out = "trial,value,is_factor\n";
    for (const auto& r : report.rows)
        out += std::to_string(r.trial) + "," + format_g12(r.value) + "," + (r.is_factor ? "1" : "0") + "\n";
    return out;
}

inline nlohmann::ordered_json gauss_json(const GaussConfig& cfg, const GaussReport& report)
{
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& r : report.rows)
        rows.push_back({{"trial", r.trial}, {"value", r.value}, {"is_factor", r.is_factor}});
    return {{"n_target", cfg.n_target},
            {"k_terms", cfg.k_terms},
            {"photons", cfg.photons},
            {"epsilon", cfg.epsilon},
            {"gamma_over_omega", cfg.res.gamma / cfg.res.omega},
            {"chi_over_omega", cfg.res.chi / cfg.res.omega},
            {"mode", mode_name(cfg.mode)},
            {"threshold", report.threshold},
            {"scan_range", {report.scan_first, report.scan_last}},
            {"candidates", report.candidates()},
            {"rows", rows}};
}

} // namespace qphase
