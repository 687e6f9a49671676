#pragma once

// Phase-measurement protocols as pulse schedules: build, serialize, run, and the
// closed-form excitation probabilities and visibilities they are checked against.

#include <boost/math/tools/minima.hpp>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include "qphase/dynamics.hpp"
#include "qphase/gates.hpp"
#include "qphase/hilbert.hpp"

namespace qphase {

struct SystemParams
{
    ResonatorParams res;
    std::array<QubitParams, 2> qubits{};
    CouplerParams coupler;
    double epsilon = 1.0;

    /// Qubit j = 1 or 2.
    const QubitParams& qubit(std::size_t j) const
    {
        if (j != 1 && j != 2)
            throw OutOfRange("qubit index must be 1 or 2");
        return qubits[j - 1];
    }

    void validate() const
    {
        res.validate();
        qubits[0].validate();
        qubits[1].validate();
        coupler.validate();
        if (!(epsilon > 0.0 && epsilon <= 1.0))
            throw InvalidArgument("epsilon must lie in (0, 1]");
    }
};

/// Smallest Fock dimension that keeps the top level empty for an N-photon run.
/// Each leaky CNOT may feed one extra excitation into the resonator.
inline std::size_t recommended_dim(std::size_t photons, double epsilon)
{
    if (photons < 1)
        throw InvalidArgument("photon number must be at least 1");
    return epsilon < 1.0 ? 2 * photons + 1 : photons + 2;
}

namespace step {

struct QubitDrive
{
    std::size_t qubit = 1;
    double duration = 0.0;
    double phase = 0.0;
};

struct JcInteraction
{
    std::size_t qubit = 1;
    double duration = 0.0;
};

struct FreeEvolve
{
    double duration = 0.0;
    bool dissipative = true;
    bool kerr = true;
};

struct Cnot
{
    CnotChannel channel = CnotChannel::ideal();
};

struct MeasureQubit1
{
};

} // namespace step

using PulseStep = std::variant<step::QubitDrive, step::JcInteraction, step::FreeEvolve, step::Cnot, step::MeasureQubit1>;

struct PulseSchedule
{
    std::string label;
    std::vector<PulseStep> steps;
    std::vector<std::string> warnings;

    void validate() const
    {
        for (std::size_t i = 0; i < steps.size(); ++i) {
            std::visit(
                [&](const auto& s) {
                    using T = std::decay_t<decltype(s)>;
                    if constexpr (std::is_same_v<T, step::QubitDrive> || std::is_same_v<T, step::JcInteraction>) {
                        if (s.qubit != 1 && s.qubit != 2)
                            throw InvalidArgument("step " + std::to_string(i) + ": qubit must be 1 or 2");
                    }
                    if constexpr (!std::is_same_v<T, step::Cnot> && !std::is_same_v<T, step::MeasureQubit1>) {
                        if (!(s.duration >= 0.0))
                            throw InvalidArgument("step " + std::to_string(i) + ": negative duration");
                    }
                    if constexpr (std::is_same_v<T, step::MeasureQubit1>) {
                        if (i + 1 != steps.size())
                            throw InvalidArgument("measurement must be the last step");
                    }
                },
                steps[i]);
        }
    }

    std::size_t count_cnots() const
    {
        std::size_t n = 0;
        for (const auto& s : steps)
            n += std::holds_alternative<step::Cnot>(s) ? 1 : 0;
        return n;
    }
};

// ---------------------------------------------------------------------------
// Text form: one step per line, "kind target duration key=value...".

namespace detail {

/// Shortest text that reads back to the same double.
inline std::string fmt_double(double x)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace detail

inline std::string serialize(const PulseSchedule& schedule)
{
    std::ostringstream out;
    out << "# " << schedule.label << '\n';
    for (const auto& s : schedule.steps) {
        std::visit(
            [&](const auto& st) {
                using T = std::decay_t<decltype(st)>;
                if constexpr (std::is_same_v<T, step::QubitDrive>)
                    out << "drive " << st.qubit << ' ' << detail::fmt_double(st.duration)
                        << " phase=" << detail::fmt_double(st.phase);
                else if constexpr (std::is_same_v<T, step::JcInteraction>)
                    out << "jc " << st.qubit << ' ' << detail::fmt_double(st.duration);
                else if constexpr (std::is_same_v<T, step::FreeEvolve>)
                    out << "free - " << detail::fmt_double(st.duration) << " dissipative=" << st.dissipative
                        << " kerr=" << st.kerr;
                else if constexpr (std::is_same_v<T, step::Cnot>) {
                    out << "cnot - 0 epsilon=" << detail::fmt_double(st.channel.epsilon());
                    if (!st.channel.residuals().isZero(0.0))
                        out << " residuals=custom";
                } else
                    out << "measure 1 0";
            },
            s);
        out << '\n';
    }
    return out.str();
}

inline PulseSchedule parse_schedule(const std::string& text)
{
    PulseSchedule schedule;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& why) {
        throw InvalidArgument("schedule line " + std::to_string(lineno) + ": " + why);
    };
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        if (line[0] == '#') {
            if (schedule.label.empty())
                schedule.label = line.size() > 2 ? line.substr(2) : "";
            continue;
        }
        std::istringstream ls(line);
        std::string kind, target, dur;
        if (!(ls >> kind >> target >> dur))
            fail("expected 'kind target duration'");
        double duration = 0.0;
        try {
            duration = std::stod(dur);
        } catch (const std::exception&) {
            fail("bad duration '" + dur + "'");
        }
        std::vector<std::pair<std::string, std::string>> kv;
        for (std::string tok; ls >> tok;) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                fail("expected key=value, got '" + tok + "'");
            kv.emplace_back(tok.substr(0, eq), tok.substr(eq + 1));
        }
        auto value = [&](const std::string& key) -> std::optional<std::string> {
            for (const auto& [k, v] : kv)
                if (k == key)
                    return v;
            return std::nullopt;
        };
        auto check_keys = [&](std::initializer_list<const char*> allowed) {
            for (const auto& [k, v] : kv) {
                bool ok = false;
                for (const char* a : allowed)
                    ok = ok || k == a;
                if (!ok)
                    fail("unknown key '" + k + "' for " + kind);
            }
        };
        auto qubit_index = [&]() -> std::size_t {
            if (target == "1")
                return 1;
            if (target == "2")
                return 2;
            fail("qubit target must be 1 or 2");
            return 0;
        };

        if (kind == "drive") {
            check_keys({"phase"});
            schedule.steps.emplace_back(
                step::QubitDrive{qubit_index(), duration, value("phase") ? std::stod(*value("phase")) : 0.0});
        } else if (kind == "jc") {
            check_keys({});
            schedule.steps.emplace_back(step::JcInteraction{qubit_index(), duration});
        } else if (kind == "free") {
            check_keys({"dissipative", "kerr"});
            schedule.steps.emplace_back(
                step::FreeEvolve{duration, value("dissipative").value_or("1") != "0", value("kerr").value_or("1") != "0"});
        } else if (kind == "cnot") {
            check_keys({"epsilon", "residuals"});
            if (value("residuals"))
                fail("CNOT residual matrices cannot be read back from text");
            const double eps = value("epsilon") ? std::stod(*value("epsilon")) : 1.0;
            schedule.steps.emplace_back(step::Cnot{eps == 1.0 ? ideal_cnot() : imperfect_cnot(eps)});
        } else if (kind == "measure") {
            check_keys({});
            schedule.steps.emplace_back(step::MeasureQubit1{});
        } else {
            fail("unknown step kind '" + kind + "'");
        }
    }
    schedule.validate();
    return schedule;
}

// ---------------------------------------------------------------------------
// Schedule builders.

/// JC swap time pi / (2 g sqrt n) moving one excitation between |g,n> and |e,n-1>.
inline double swap_time(const QubitParams& q, std::size_t n)
{
    if (n < 1)
        throw InvalidArgument("swap_time needs n >= 1");
    return kPi / (2.0 * q.g * std::sqrt(static_cast<double>(n)));
}

inline double half_pi_pulse(const QubitParams& q)
{
    if (!(q.rabi > 0.0))
        throw InvalidArgument("pi/2 pulse needs a positive drive amplitude");
    return kPi / (2.0 * q.rabi);
}

inline PulseSchedule single_photon_schedule(double tau, const SystemParams& params, double pulse_phase = 0.0)
{
    params.validate();
    if (!(tau >= 0.0))
        throw InvalidArgument("tau must be nonnegative");
    const auto& q = params.qubit(1);
    const double tp = half_pi_pulse(q);
    const double tj = swap_time(q, 1);
    PulseSchedule s;
    s.label = "single-photon tau=" + detail::fmt_double(tau);
    s.steps = {step::QubitDrive{1, tp, 0.0}, step::JcInteraction{1, tj}, step::FreeEvolve{tau, true, true},
               step::JcInteraction{1, tj},   step::QubitDrive{1, tp, pulse_phase}, step::MeasureQubit1{}};
    if (tau < 10.0 * std::max(tp, tj))
        s.warnings.push_back("tau is not much longer than the gate times; gate-time phases are not negligible");
    return s;
}

/// Alternating drive / JC steps that take |g,0> to |g>(|0> + |N>)/sqrt 2.
///
/// The schedule is found backwards from the target. In the gauge c~(e,n) = -i c(e,n)
/// both the resonant drive (phase 0) and the JC exchange act as real rotations, so
/// every step angle has a closed form.
inline PulseSchedule law_eberly_schedule(std::size_t photons, const SystemParams& params)
{
    params.validate();
    if (photons < 1)
        throw InvalidArgument("photon number must be at least 1");
    const QubitParams& q = params.qubit(1);
    if (!(q.rabi > 0.0))
        throw InvalidArgument("state preparation needs a positive drive amplitude");
    const std::size_t dim = photons + 2;
    const Layout l{2, dim};
    auto at = [&](std::size_t qb, std::size_t n) { return static_cast<Eigen::Index>(l.index(std::vector{qb, n})); };

    Vector target = Vector::Zero(static_cast<Eigen::Index>(l.size()));
    target(at(kGround, 0)) = 1.0 / std::sqrt(2.0);
    target(at(kGround, photons)) = 1.0 / std::sqrt(2.0);

    auto to_range = [](double theta) {
        if (theta < 0.0)
            theta += kPi;
        return theta >= kPi ? theta - kPi : theta;
    };

    QubitParams drive = q;
    drive.drive_phase = 0.0;
    const Operator i_fock(identity(dim), Layout{dim});
    std::vector<PulseStep> backward;
    Vector v = target;
    for (std::size_t n = photons; n >= 1; --n) {
        // undo the JC exchange at level n: empty |g,n>
        const double cg = std::real(v(at(kGround, n)));
        const double ce = std::real(-kI * v(at(kExcited, n - 1)));
        const double t_jc = to_range(std::atan2(cg, ce)) / (q.g * std::sqrt(static_cast<double>(n)));
        v = u_jc(q, t_jc, dim).adjoint().matrix() * v;
        backward.emplace_back(step::JcInteraction{1, t_jc});

        // undo the drive: empty |e,n-1>
        const double dg = std::real(v(at(kGround, n - 1)));
        const double de = std::real(-kI * v(at(kExcited, n - 1)));
        const double t_dr = 2.0 * to_range(std::atan2(de, dg)) / q.rabi;
        v = tensor({u_drive(drive, t_dr), i_fock}).adjoint().matrix() * v;
        backward.emplace_back(step::QubitDrive{1, t_dr, 0.0});
    }

    PulseSchedule s;
    s.label = "law-eberly N=" + std::to_string(photons);
    s.steps.assign(backward.rbegin(), backward.rend());

    // forward check from |g,0>
    Vector f = Vector::Zero(static_cast<Eigen::Index>(l.size()));
    f(at(kGround, 0)) = 1.0;
    for (const auto& st : s.steps) {
        if (const auto* d = std::get_if<step::QubitDrive>(&st))
            f = tensor({u_drive(drive, d->duration), i_fock}).matrix() * f;
        else
            f = u_jc(q, std::get<step::JcInteraction>(st).duration, dim).matrix() * f;
    }
    const double fid = std::norm(target.dot(f));
    if (!(fid > 1.0 - 1e-8))
        throw ConvergenceError("state preparation for N=" + std::to_string(photons) +
                               " reached fidelity " + std::to_string(fid));
    return s;
}

/// JC swaps and CNOTs that move the N-photon phase onto qubit 1 and empty the resonator.
inline PulseSchedule disentangle_schedule(std::size_t photons, const SystemParams& params, const CnotChannel& channel)
{
    params.validate();
    if (photons < 2)
        throw InvalidArgument("disentanglement needs N >= 2");
    const QubitParams& q1 = params.qubit(1);
    PulseSchedule s;
    s.label = "disentangle N=" + std::to_string(photons);
    if (params.qubit(2).g != q1.g)
        s.warnings.push_back("g1 != g2; swap times use g1");
    s.steps.emplace_back(step::JcInteraction{1, swap_time(q1, photons)});
    s.steps.emplace_back(step::JcInteraction{2, swap_time(q1, photons - 1)});
    s.steps.emplace_back(step::Cnot{channel});
    for (std::size_t n = photons - 2; n >= 1; --n) {
        s.steps.emplace_back(step::JcInteraction{2, swap_time(q1, n)});
        s.steps.emplace_back(step::Cnot{channel});
    }
    return s;
}

/// Full run: prepare (|0> + |N>)/sqrt 2, wait tau, disentangle, pi/2 pulse on qubit 1, measure.
/// For N = 1 this is exactly the single-photon schedule.
inline PulseSchedule phase_measurement_schedule(std::size_t photons, double tau, const SystemParams& params,
                                                const CnotChannel& channel, double pulse_phase = 0.0)
{
    if (photons == 1)
        return single_photon_schedule(tau, params, pulse_phase);
    if (!(tau >= 0.0))
        throw InvalidArgument("tau must be nonnegative");
    PulseSchedule s = law_eberly_schedule(photons, params);
    s.label = "phase N=" + std::to_string(photons) + " tau=" + detail::fmt_double(tau);
    s.steps.emplace_back(step::FreeEvolve{tau, true, true});
    const PulseSchedule d = disentangle_schedule(photons, params, channel);
    s.steps.insert(s.steps.end(), d.steps.begin(), d.steps.end());
    s.warnings.insert(s.warnings.end(), d.warnings.begin(), d.warnings.end());
    s.steps.emplace_back(step::QubitDrive{1, half_pi_pulse(params.qubit(1)), pulse_phase});
    s.steps.emplace_back(step::MeasureQubit1{});
    return s;
}

// ---------------------------------------------------------------------------
// Runner.

struct RunOptions
{
    enum class Mode {
        instant, ///< gates are instantaneous for the resonator
        exact  ///< the resonator keeps rotating during drive and CNOT steps
    };
    Mode mode = Mode::instant;
    double leakage_threshold = 1e-10;
    std::optional<std::size_t> shots; ///< binomial sampling of the final measurement
    std::uint64_t seed = 0;
};

struct SampledMeasurement
{
    std::size_t shots = 0;
    std::size_t excited = 0;
    double frequency = 0.0;
};

struct MeasurementRecord
{
    double p_excited = 0.0;
    QuantumState final_state;
    double residual_entanglement = 0.0; ///< 1 - F(qubit 2 ⊗ resonator, |g,0>)
    double leakage = 0.0;               ///< largest top-Fock population seen
    std::optional<SampledMeasurement> sampled;
};

/// <g|rho|e> of the reduced qubit-1 state.
inline cplx qubit1_coherence(const QuantumState& state)
{
    return partial_trace(state, {0}).density_matrix()(kGround, kExcited);
}

inline MeasurementRecord run_protocol(const PulseSchedule& schedule, const SystemParams& params,
                                      const RunOptions& opts = {})
{
    params.validate();
    schedule.validate();
    const std::size_t dim = params.res.dim;
    const Layout layout = Layout::qubits_and_fock(2, FockSpace(dim));
    QuantumState state = basis_state(layout, {kGround, kGround, 0});
    double leakage = 0.0;

    auto check_leak = [&](const char* where) {
        const double top = population(state, 2, dim - 1);
        leakage = std::max(leakage, top);
        if (top > opts.leakage_threshold)
            throw TruncationError(std::string("top Fock level population ") + std::to_string(top) + " after " +
                                  where + " exceeds threshold; increase dim beyond " + std::to_string(dim));
    };
    auto idle_resonator = [&](double t) {
        if (opts.mode == RunOptions::Mode::exact && t > 0.0)
            state = free_evolve(state, t, params.res, false, true);
    };

    for (const auto& st : schedule.steps) {
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, step::QubitDrive>) {
                    QubitParams q = params.qubit(s.qubit);
                    q.drive_phase = s.phase;
                    state = state.evolved(embed(u_drive(q, s.duration).matrix(), layout, {s.qubit - 1}));
                    idle_resonator(s.duration);
                    check_leak("drive");
                } else if constexpr (std::is_same_v<T, step::JcInteraction>) {
                    const auto u = u_jc(params.qubit(s.qubit), s.duration, dim);
                    state = state.evolved(embed(u.matrix(), layout, {s.qubit - 1, 2}));
                    check_leak("JC interaction");
                } else if constexpr (std::is_same_v<T, step::FreeEvolve>) {
                    state = free_evolve(state, s.duration, params.res, s.dissipative, s.kerr);
                    check_leak("free evolution");
                } else if constexpr (std::is_same_v<T, step::Cnot>) {
                    state = apply_channel(s.channel, state);
                    idle_resonator(params.coupler.t_c);
                    check_leak("CNOT");
                }
            },
            st);
    }

    MeasurementRecord rec{.p_excited = std::clamp(population(state, 0, kExcited), 0.0, 1.0),
                          .final_state = state,
                          .residual_entanglement = 0.0,
                          .leakage = leakage,
                          .sampled = std::nullopt};
    const auto rest = partial_trace(state, {1, 2});
    const auto vacuum = basis_state(Layout{2, dim}, {kGround, 0});
    rec.residual_entanglement = std::max(0.0, 1.0 - fidelity(rest, vacuum));
    if (opts.shots) {
        if (*opts.shots == 0)
            throw InvalidArgument("shot count must be positive");
        std::mt19937_64 gen(opts.seed);
        std::binomial_distribution<std::size_t> dist(*opts.shots, rec.p_excited);
        const std::size_t k = dist(gen);
        rec.sampled = SampledMeasurement{*opts.shots, k, static_cast<double>(k) / static_cast<double>(*opts.shots)};
    }
    return rec;
}

// ---------------------------------------------------------------------------
// Closed-form predictions.

/// Surviving coherence factor eps^(N-1) e^(-N gamma tau).
inline double coherence_coefficient(std::size_t photons, double gamma_tau, double epsilon)
{
    if (photons < 1)
        throw InvalidArgument("photon number must be at least 1");
    return std::pow(epsilon, static_cast<double>(photons - 1)) * std::exp(-static_cast<double>(photons) * gamma_tau);
}

/// Excited-state probability of qubit 1 for phase phi = omega~ N tau, measurement pulse phase 0.
inline double predicted_pe(std::size_t photons, double phi, double gamma_tau, double epsilon)
{
    const double c = coherence_coefficient(photons, gamma_tau, epsilon);
    switch (photons % 4) {
    case 0:
        return 0.5 * (1.0 - c * std::sin(phi));
    case 1:
        return 0.5 * (1.0 - c * std::cos(phi));
    case 2:
        return 0.5 * (1.0 + c * std::sin(phi));
    default:
        return 0.5 * (1.0 + c * std::cos(phi));
    }
}

/// Same, for a measurement pulse of phase `pulse_phase`. The qubit-1 coherence
/// after disentanglement is <g|rho|e> = (c/2) i^N e^{i phi}.
inline double predicted_pe_with_pulse(std::size_t photons, double phi, double gamma_tau, double epsilon,
                                      double pulse_phase)
{
    const double c = coherence_coefficient(photons, gamma_tau, epsilon);
    return 0.5 * (1.0 - c * std::sin(phi + 0.5 * kPi * static_cast<double>(photons % 4) - pulse_phase));
}

struct VisibilityResult
{
    enum class Branch { single, odd, even };
    double value = 0.0;
    double tau_peak = 0.0; ///< wait time of the first nonzero stationary point of the coherence factor
    Branch branch = Branch::single;
};

inline const char* branch_name(VisibilityResult::Branch b)
{
    switch (b) {
    case VisibilityResult::Branch::single:
        return "single";
    case VisibilityResult::Branch::odd:
        return "odd";
    default:
        return "even";
    }
}

inline VisibilityResult visibility_single(const ResonatorParams& res)
{
    res.validate();
    const double r = res.gamma / res.omega;
    const double tau_m = std::acos(-1.0 / std::sqrt(1.0 + r * r)) / res.omega;
    const double amp = res.omega / std::hypot(res.gamma, res.omega);
    return {0.5 * (1.0 + amp * std::exp(-res.gamma * tau_m)), tau_m, VisibilityResult::Branch::single};
}

/// Odd N: exact swing of the damped cosine at omega~. Even N: the leading-order
/// form (eps^(N-1)/2)[e^{-pi G/(2 w~)} + e^{-3 pi G/(2 w~)}].
inline VisibilityResult visibility_multi(std::size_t photons, const ResonatorParams& res, double epsilon)
{
    res.validate();
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw InvalidArgument("epsilon must lie in (0, 1]");
    const double wt = effective_frequency(res, photons);
    const double scale = std::pow(epsilon, static_cast<double>(photons - 1));
    const double n = static_cast<double>(photons);
    const double g = res.gamma;
    if (photons % 2 == 1) {
        const double s1 = std::acos(-1.0 / std::sqrt(1.0 + (g / wt) * (g / wt))) / wt;
        const double amp = wt / std::hypot(wt, g);
        return {0.5 * scale * (1.0 + amp * std::exp(-g * s1)), s1 / n,
                photons == 1 ? VisibilityResult::Branch::single : VisibilityResult::Branch::odd};
    }
    const double s_peak = (g > 0.0 ? std::atan(wt / g) : 0.5 * kPi) / wt;
    const double v = 0.5 * scale * (std::exp(-0.5 * kPi * g / wt) + std::exp(-1.5 * kPi * g / wt));
    return {v, s_peak / n, VisibilityResult::Branch::even};
}

/// Brute-force visibility: half the span of eps^(N-1) e^{-G N tau} trig(w~ N tau)
/// over tau in [0, 4 pi / w~], by dense sampling plus Brent refinement.
inline double visibility_numeric(std::size_t photons, const ResonatorParams& res, double epsilon)
{
    res.validate();
    const double wt = effective_frequency(res, photons);
    const double n = static_cast<double>(photons);
    const double scale = std::pow(epsilon, n - 1.0);
    const bool odd = photons % 2 == 1;
    auto f = [&](double tau) {
        const double s = n * tau;
        return scale * std::exp(-res.gamma * s) * (odd ? std::cos(wt * s) : std::sin(wt * s));
    };
    const double hi = 4.0 * kPi / wt;
    const std::size_t samples = 4000 * photons;
    const double h = hi / static_cast<double>(samples);
    std::size_t imax = 0, imin = 0;
    double fmax = f(0.0), fmin = fmax;
    for (std::size_t i = 1; i <= samples; ++i) {
        const double v = f(h * static_cast<double>(i));
        if (v > fmax) {
            fmax = v;
            imax = i;
        }
        if (v < fmin) {
            fmin = v;
            imin = i;
        }
    }
    const int bits = std::numeric_limits<double>::digits;
    auto refine = [&](std::size_t i, double sign) {
        const double a = h * static_cast<double>(i > 0 ? i - 1 : 0);
        const double b = std::min(hi, h * static_cast<double>(i + 1));
        const auto r = boost::math::tools::brent_find_minima([&](double t) { return -sign * f(t); }, a, b, bits);
        return sign * -r.second;
    };
    fmax = std::max(fmax, refine(imax, 1.0));
    fmin = std::min(fmin, refine(imin, -1.0));
    return 0.5 * (fmax - fmin);
}

} // namespace qphase
