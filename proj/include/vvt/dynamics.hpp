#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "vvt/errors.hpp"
#include "vvt/params.hpp"
#include "vvt/waveform.hpp"

namespace vvt {

// ============================================================================
// Contact state
// ============================================================================

/// SlippingUp: the part moves up relative to the surface (v_P > v_S).
enum class ContactMode { Sticking, SlippingUp, SlippingDown };

[[nodiscard]] constexpr std::string_view to_string(ContactMode mode) {
    switch (mode) {
        case ContactMode::Sticking: return "Sticking";
        case ContactMode::SlippingUp: return "SlippingUp";
        case ContactMode::SlippingDown: return "SlippingDown";
    }
    return "Sticking";
}

[[nodiscard]] inline ContactMode parse_contact_mode(std::string_view text) {
    if (text == "Sticking") return ContactMode::Sticking;
    if (text == "SlippingUp") return ContactMode::SlippingUp;
    if (text == "SlippingDown") return ContactMode::SlippingDown;
    throw ValidationError("unknown contact mode '" + std::string(text) + "'");
}

struct SystemState {
    double t = 0.0;
    double z_S = 0.0;
    double v_S = 0.0;
    double z_P = 0.0;
    double v_P = 0.0;
    ContactMode mode = ContactMode::Sticking;

    [[nodiscard]] bool finite() const {
        return std::isfinite(t) && std::isfinite(z_S) && std::isfinite(v_S) && std::isfinite(z_P) &&
               std::isfinite(v_P);
    }
};

struct SimulationOptions {
    /// Output samples per drive period; the output step is T / steps_per_period.
    int steps_per_period = 2000;
    /// Event localization tolerance as a fraction of the output step.
    double event_tolerance_fraction = 1e-6;
    /// Relative velocities within this band count as equal (m/s).
    double stick_velocity_tolerance = 1e-9;
    /// Slack on the static friction cone test (N).
    double stick_force_tolerance = 1e-9;
    /// |v_P| above this aborts the run as diverged. Unset: 100 (a_max + g) T.
    std::optional<double> velocity_bound;
    /// Safety valve against Zeno-like event cascades within one step.
    int max_events_per_step = 10000;
};

/// Time series of surface and part states at the output instants.
struct Trajectory {
    std::vector<SystemState> states;
    /// Surface acceleration in effect just after each sample.
    std::vector<double> surface_accel;
    TransportConfig config;
    FrictionPair friction;
    std::string waveform_id;
    /// Drive period, or 0 for non-periodic (trace-driven) runs.
    double period = 0.0;
    std::size_t samples_per_period = 0;
    std::size_t events = 0;
    bool diverged = false;
    std::string diagnostic;

    [[nodiscard]] std::size_t size() const { return states.size(); }
    [[nodiscard]] bool empty() const { return states.empty(); }
    [[nodiscard]] double start_time() const { return states.front().t; }
    [[nodiscard]] double end_time() const { return states.back().t; }
};

// ============================================================================
// Surface drives
// ============================================================================

/// A prescribed surface motion with piecewise-constant acceleration.
template <class D>
concept SurfaceDrive = requires(const D& d, double t) {
    { d.piece_at(t) } -> std::convertible_to<DrivePiece>;
    { d.velocity(t) } -> std::convertible_to<double>;
    { d.position(t) } -> std::convertible_to<double>;
};

static_assert(SurfaceDrive<Waveform>);

/// Uniformly sampled surface velocity.
struct SurfaceVelocityTrace {
    double t0 = 0.0;
    double dt = 0.0;
    std::vector<double> velocity;

    void validate() const {
        if (velocity.size() < 2) throw ValidationError("surface velocity trace needs at least 2 samples");
        if (!std::isfinite(t0) || !std::isfinite(dt) || !(dt > 0.0))
            throw ValidationError("surface velocity trace needs a finite, positive sample spacing");
        for (std::size_t i = 0; i < velocity.size(); ++i)
            if (!std::isfinite(velocity[i]))
                throw ValidationError("surface velocity sample " + std::to_string(i) + " is not finite");
    }

    /// Builds a trace from explicit sample times, rejecting non-uniform spacing.
    static SurfaceVelocityTrace from_samples(std::span<const double> times,
                                             std::span<const double> velocity) {
        if (times.size() != velocity.size())
            throw ValidationError("surface velocity trace: time and velocity lengths differ");
        if (times.size() < 2) throw ValidationError("surface velocity trace needs at least 2 samples");
        for (double t : times)
            if (!std::isfinite(t)) throw ValidationError("surface velocity trace has non-finite times");
        const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
        if (!(dt > 0.0)) throw ValidationError("surface velocity trace times must increase");
        for (std::size_t i = 1; i < times.size(); ++i) {
            if (std::abs((times[i] - times[i - 1]) - dt) > 1e-6 * dt)
                throw ValidationError("surface velocity trace is not uniformly sampled (step " +
                                      std::to_string(i) + ")");
        }
        SurfaceVelocityTrace trace{times.front(), dt, {velocity.begin(), velocity.end()}};
        trace.validate();
        return trace;
    }
};

/// Surface drive built from a velocity trace by linear interpolation, so the
/// acceleration is constant between samples. Outside the trace the surface
/// keeps its end-point velocity.
class TraceDrive {
  public:
    TraceDrive(const SurfaceVelocityTrace& trace, double z0) : trace_(trace) {
        trace_.validate();
        positions_.resize(trace_.velocity.size());
        positions_[0] = z0;
        for (std::size_t i = 1; i < positions_.size(); ++i)
            positions_[i] = positions_[i - 1] + 0.5 * (trace_.velocity[i - 1] + trace_.velocity[i]) * trace_.dt;
    }

    [[nodiscard]] DrivePiece piece_at(double t) const {
        const double inf = std::numeric_limits<double>::infinity();
        const std::size_t n = trace_.velocity.size();
        const double eps = 1e-12 * trace_.dt;
        if (t < trace_.t0 - eps) return {0.0, -inf, trace_.t0};
        const std::size_t k = index_at(t);
        if (k + 1 >= n) return {0.0, time_of(n - 1), inf};
        return {(trace_.velocity[k + 1] - trace_.velocity[k]) / trace_.dt, time_of(k), time_of(k + 1)};
    }

    [[nodiscard]] double velocity(double t) const {
        const std::size_t n = trace_.velocity.size();
        if (t <= trace_.t0) return trace_.velocity.front();
        const std::size_t k = index_at(t);
        if (k + 1 >= n) return trace_.velocity.back();
        const double u = t - time_of(k);
        return trace_.velocity[k] + (trace_.velocity[k + 1] - trace_.velocity[k]) / trace_.dt * u;
    }

    [[nodiscard]] double position(double t) const {
        const std::size_t n = trace_.velocity.size();
        if (t <= trace_.t0) return positions_.front() + trace_.velocity.front() * (t - trace_.t0);
        const std::size_t k = index_at(t);
        const double u = t - time_of(k);
        if (k + 1 >= n) return positions_.back() + trace_.velocity.back() * u;
        const double a = (trace_.velocity[k + 1] - trace_.velocity[k]) / trace_.dt;
        return positions_[k] + trace_.velocity[k] * u + 0.5 * a * u * u;
    }

    [[nodiscard]] const SurfaceVelocityTrace& trace() const { return trace_; }

  private:
    [[nodiscard]] double time_of(std::size_t k) const { return trace_.t0 + static_cast<double>(k) * trace_.dt; }

    // Sample interval starting at or just before t; boundaries within
    // round-off resolve to the later interval.
    [[nodiscard]] std::size_t index_at(double t) const {
        const std::size_t n = trace_.velocity.size();
        const double x = (t - trace_.t0) / trace_.dt;
        double k = std::floor(x);
        if (k + 1.0 - x <= 1e-9) k += 1.0;
        if (k < 0.0) k = 0.0;
        return std::min(static_cast<std::size_t>(k), n - 1);
    }

    SurfaceVelocityTrace trace_;
    std::vector<double> positions_;
};

static_assert(SurfaceDrive<TraceDrive>);

// ============================================================================
// Contact law
// ============================================================================

/// Friction force on the part (N, positive up).
///
/// Sticking: the force needed to keep the part on the surface, if inside the
/// static cone; otherwise the slip-onset force mu_k F_n sgn(a_S + g).
/// Slipping: mu_k F_n opposing the relative motion.
[[nodiscard]] inline double friction_force(const SystemState& state, double surface_accel,
                                           const FrictionPair& fric, const TransportConfig& cfg,
                                           const SimulationOptions& opts = {}) {
    const double m = cfg.effective_mass();
    const double kinetic = fric.mu_k * cfg.normal_force;
    switch (state.mode) {
        case ContactMode::Sticking: {
            const double required = m * (surface_accel + cfg.gravity);
            if (std::abs(required) <= fric.mu_s * cfg.normal_force + opts.stick_force_tolerance)
                return required;
            return required > 0.0 ? kinetic : -kinetic;
        }
        case ContactMode::SlippingUp: return -kinetic;
        case ContactMode::SlippingDown: return kinetic;
    }
    return 0.0;
}

/// Contact mode taken when the relative velocity is zero and the surface
/// accelerates at `surface_accel`.
[[nodiscard]] inline ContactMode resolve_contact(double surface_accel, const FrictionPair& fric,
                                                 const TransportConfig& cfg,
                                                 const SimulationOptions& opts = {}) {
    const double required = cfg.effective_mass() * (surface_accel + cfg.gravity);
    if (std::abs(required) <= fric.mu_s * cfg.normal_force + opts.stick_force_tolerance)
        return ContactMode::Sticking;
    // Surface pulling up harder than friction allows leaves the part behind.
    return required > 0.0 ? ContactMode::SlippingDown : ContactMode::SlippingUp;
}

[[nodiscard]] inline double part_acceleration(ContactMode mode, double surface_accel,
                                              const FrictionPair& fric, const TransportConfig& cfg) {
    const double friction_accel = fric.mu_k * cfg.normal_force / cfg.effective_mass();
    switch (mode) {
        case ContactMode::Sticking: return surface_accel;
        case ContactMode::SlippingUp: return -friction_accel - cfg.gravity;
        case ContactMode::SlippingDown: return friction_accel - cfg.gravity;
    }
    return 0.0;
}

// ============================================================================
// Integrator
// ============================================================================

namespace detail {

template <SurfaceDrive Drive>
class HybridIntegrator {
  public:
    HybridIntegrator(const Drive& drive, const FrictionPair& fric, const TransportConfig& cfg,
                     const SimulationOptions& opts, double event_tolerance)
        : drive_(drive), fric_(fric), cfg_(cfg), opts_(opts), event_tol_(event_tolerance) {}

    /// Re-evaluates the contact mode at state.t from the relative velocity and
    /// the acceleration about to act.
    void classify(SystemState& s) const {
        const double a_S = drive_.piece_at(s.t).acceleration;
        const double rel = s.v_P - s.v_S;
        const double vtol = opts_.stick_velocity_tolerance;
        if (s.mode == ContactMode::Sticking || std::abs(rel) <= vtol) {
            s.mode = resolve_contact(a_S, fric_, cfg_, opts_);
            if (s.mode == ContactMode::Sticking) s.v_P = s.v_S;
            return;
        }
        // A slipping label must agree with the sign of the relative velocity.
        s.mode = rel > 0.0 ? ContactMode::SlippingUp : ContactMode::SlippingDown;
    }

    /// Integrates to t_target. Returns the number of slip-to-stick crossings.
    std::size_t advance(SystemState& s, double t_target) const {
        std::size_t crossings = 0;
        int guard = 0;
        while (t_target - s.t > 1e-15 * std::max(1.0, std::abs(t_target))) {
            if (++guard > opts_.max_events_per_step)
                throw RuntimeFailure("integrator exceeded the event budget near t = " + std::to_string(s.t));
            classify(s);
            const DrivePiece piece = drive_.piece_at(s.t);
            const double a_S = piece.acceleration;
            const bool at_breakpoint = piece.end <= t_target;
            const double t_end = at_breakpoint ? piece.end : t_target;
            const double h = t_end - s.t;
            if (!(h > 0.0)) {
                s.t = t_end;
                continue;
            }

            if (s.mode == ContactMode::Sticking) {
                s.z_P += s.v_P * h + 0.5 * a_S * h * h;
                move_surface(s, t_end);
                s.v_P = s.v_S;
                continue;
            }

            const double a_P = part_acceleration(s.mode, a_S, fric_, cfg_);
            const double dir = s.mode == ContactMode::SlippingUp ? 1.0 : -1.0;
            const double v_P0 = s.v_P;
            const double t0 = s.t;
            // Signed gap, positive while the current slip continues.
            auto gap = [&](double tau) { return dir * ((v_P0 + a_P * tau) - drive_.velocity(t0 + tau)); };

            const double slope = a_P - a_S;
            if (dir * slope < 0.0 && gap(h) <= 0.0) {
                double lo = 0.0;
                double hi = h;
                while (hi - lo > event_tol_) {
                    const double mid = 0.5 * (lo + hi);
                    if (gap(mid) > 0.0)
                        lo = mid;
                    else
                        hi = mid;
                }
                double tau = hi;
                double t_hit = t0 + tau;
                // Indistinguishable from the breakpoint: land on it so the
                // contact is resolved with the following segment.
                if (std::abs((piece.end - t0) - tau) <= event_tol_) {
                    tau = std::min(piece.end - t0, h);
                    t_hit = at_breakpoint ? piece.end : t0 + tau;
                }
                s.z_P += v_P0 * tau + 0.5 * a_P * tau * tau;
                move_surface(s, t_hit);
                s.v_P = s.v_S;
                ++crossings;
                continue;
            }
            s.z_P += v_P0 * h + 0.5 * a_P * h * h;
            s.v_P = v_P0 + a_P * h;
            move_surface(s, t_end);
        }
        s.t = t_target;
        s.z_S = drive_.position(t_target);
        s.v_S = drive_.velocity(t_target);
        return crossings;
    }

  private:
    void move_surface(SystemState& s, double t) const {
        s.t = t;
        s.z_S = drive_.position(t);
        s.v_S = drive_.velocity(t);
    }

    const Drive& drive_;
    const FrictionPair& fric_;
    const TransportConfig& cfg_;
    const SimulationOptions& opts_;
    double event_tol_;
};

inline double default_velocity_bound(const TransportConfig& cfg, double time_scale) {
    return 100.0 * (cfg.a_max + cfg.gravity) * time_scale;
}

template <SurfaceDrive Drive>
Trajectory run(const Drive& drive, const FrictionPair& fric, const TransportConfig& cfg,
               SystemState state, double dt, std::size_t n_steps, double velocity_bound,
               const SimulationOptions& opts) {
    HybridIntegrator<Drive> integrator(drive, fric, cfg, opts, dt * opts.event_tolerance_fraction);
    Trajectory traj;
    traj.config = cfg;
    traj.friction = fric;
    traj.states.reserve(n_steps + 1);
    traj.surface_accel.reserve(n_steps + 1);

    const double t0 = state.t;
    state.z_S = drive.position(t0);
    state.v_S = drive.velocity(t0);
    integrator.classify(state);
    traj.states.push_back(state);
    traj.surface_accel.push_back(drive.piece_at(t0).acceleration);

    for (std::size_t k = 1; k <= n_steps; ++k) {
        traj.events += integrator.advance(state, t0 + static_cast<double>(k) * dt);
        integrator.classify(state);
        traj.states.push_back(state);
        traj.surface_accel.push_back(drive.piece_at(state.t).acceleration);
        if (!state.finite()) throw RuntimeFailure("part state became non-finite at t = " + std::to_string(state.t));
        if (std::abs(state.v_P) > velocity_bound) {
            traj.diverged = true;
            std::ostringstream os;
            os << "part velocity " << state.v_P << " m/s exceeded bound " << velocity_bound
               << " m/s at t = " << state.t
               << " s; the normal force is likely too small to arrest slipping (need F_n > m g / mu_k)";
            traj.diagnostic = os.str();
            break;
        }
    }
    return traj;
}

inline void validate_initial(const SystemState& initial) {
    if (!initial.finite()) throw ValidationError("initial state contains non-finite values");
}

}  // namespace detail

/// Advances `state` by dt against any surface drive.
template <SurfaceDrive Drive>
[[nodiscard]] SystemState step(const SystemState& state, const Drive& drive, const FrictionPair& fric,
                               const TransportConfig& cfg, double dt, const SimulationOptions& opts = {}) {
    if (!state.finite()) throw ValidationError("step: state contains non-finite values");
    if (!std::isfinite(dt) || !(dt > 0.0)) throw ValidationError("step: dt must be finite and > 0");
    detail::HybridIntegrator<Drive> integrator(drive, fric, cfg, opts, dt * opts.event_tolerance_fraction);
    SystemState next = state;
    next.z_S = drive.position(state.t);
    next.v_S = drive.velocity(state.t);
    if (next.mode == ContactMode::Sticking) next.v_P = next.v_S;
    integrator.advance(next, state.t + dt);
    integrator.classify(next);
    return next;
}

/// Part stuck to the surface at time t0 with the given part position.
[[nodiscard]] inline SystemState sticking_start(const Waveform& waveform, double t0 = 0.0, double z_P = 0.0) {
    return {t0, waveform.position(t0), waveform.velocity(t0), z_P, waveform.velocity(t0), ContactMode::Sticking};
}

/// Part at rest relative to the ground at time t0.
[[nodiscard]] inline SystemState rest_start(const Waveform& waveform, double t0 = 0.0, double z_P = 0.0) {
    const double v_S = waveform.velocity(t0);
    ContactMode mode = ContactMode::Sticking;
    if (v_S < 0.0) mode = ContactMode::SlippingUp;
    if (v_S > 0.0) mode = ContactMode::SlippingDown;
    return {t0, waveform.position(t0), v_S, z_P, 0.0, mode};
}

/// Integrates n_periods of the periodic drive. The surface follows the
/// waveform exactly; the initial surface fields are overwritten from it.
/// A part velocity beyond the configured bound stops the run and sets
/// `diverged` with a diagnostic.
[[nodiscard]] inline Trajectory simulate(const Waveform& waveform, const FrictionPair& fric,
                                         const TransportConfig& cfg, int n_periods,
                                         const SystemState& initial, const SimulationOptions& opts = {}) {
    fric.validate();
    cfg.validate();
    waveform.check_against(cfg);
    if (n_periods < 1) throw ValidationError("simulate: n_periods must be >= 1");
    if (opts.steps_per_period < 1) throw ValidationError("simulate: steps_per_period must be >= 1");
    detail::validate_initial(initial);

    const double dt = cfg.period / opts.steps_per_period;
    const std::size_t n_steps = static_cast<std::size_t>(n_periods) * static_cast<std::size_t>(opts.steps_per_period);
    const double bound = opts.velocity_bound.value_or(detail::default_velocity_bound(cfg, cfg.period));
    Trajectory traj = detail::run(waveform, fric, cfg, initial, dt, n_steps, bound, opts);
    traj.waveform_id = waveform.id();
    traj.period = cfg.period;
    traj.samples_per_period = static_cast<std::size_t>(opts.steps_per_period);
    return traj;
}

/// Integrates the part against a measured surface velocity, with one output
/// sample per trace sample. The surface starts at initial.z_S.
[[nodiscard]] inline Trajectory simulate_from_surface_trace(const SurfaceVelocityTrace& surface,
                                                            const FrictionPair& fric,
                                                            const TransportConfig& cfg,
                                                            const SystemState& initial,
                                                            const SimulationOptions& opts = {}) {
    fric.validate();
    cfg.validate();
    surface.validate();
    detail::validate_initial(initial);
    const TraceDrive drive(surface, initial.z_S);
    SystemState start = initial;
    start.t = surface.t0;
    const std::size_t n_steps = surface.velocity.size() - 1;
    const double span = surface.dt * static_cast<double>(n_steps);
    double vmax = 0.0;
    for (double v : surface.velocity) vmax = std::max(vmax, std::abs(v));
    const double bound =
        opts.velocity_bound.value_or(1e3 * (vmax + cfg.gravity * span) + detail::default_velocity_bound(cfg, span));
    Trajectory traj = detail::run(drive, fric, cfg, start, surface.dt, n_steps, bound, opts);
    traj.waveform_id = "trace";
    return traj;
}

// ============================================================================
// Trajectory metrics
// ============================================================================

/// Linear interpolation of a sampled quantity at time t.
template <class Field>
[[nodiscard]] double interpolate(const Trajectory& traj, double t, Field field) {
    const auto& s = traj.states;
    if (s.empty()) throw ValidationError("empty trajectory");
    if (t <= s.front().t) return field(s.front());
    if (t >= s.back().t) return field(s.back());
    auto it = std::upper_bound(s.begin(), s.end(), t, [](double v, const SystemState& st) { return v < st.t; });
    const SystemState& b = *it;
    const SystemState& a = *(it - 1);
    const double w = (t - a.t) / (b.t - a.t);
    return field(a) + w * (field(b) - field(a));
}

[[nodiscard]] inline double part_position_at(const Trajectory& traj, double t) {
    return interpolate(traj, t, [](const SystemState& s) { return s.z_P; });
}

/// Integral of (v_P - v_S) over [t_begin, t_end] by the trapezoidal rule on
/// the output samples.
[[nodiscard]] inline double net_slip(const Trajectory& traj, double t_begin, double t_end) {
    if (traj.empty()) throw ValidationError("net_slip: empty trajectory");
    if (!(t_end > t_begin)) throw ValidationError("net_slip: window is empty");
    const double tol = 1e-9 * std::max(1.0, std::abs(traj.end_time()));
    if (t_begin < traj.start_time() - tol || t_end > traj.end_time() + tol)
        throw ValidationError("net_slip: window lies outside the trajectory span");
    auto rel = [](const SystemState& s) { return s.v_P - s.v_S; };
    double total = 0.0;
    double prev_t = t_begin;
    double prev_r = interpolate(traj, t_begin, rel);
    for (const auto& s : traj.states) {
        if (s.t <= t_begin) continue;
        if (s.t >= t_end) break;
        total += 0.5 * (prev_r + rel(s)) * (s.t - prev_t);
        prev_t = s.t;
        prev_r = rel(s);
    }
    total += 0.5 * (prev_r + interpolate(traj, t_end, rel)) * (t_end - prev_t);
    return total;
}

struct SteadyStateOptions {
    int min_warmup_periods = 10;
    int consecutive_periods = 3;
    double relative_agreement = 1e-3;
    /// Final periods averaged for the reported velocity.
    int average_periods = 3;
};

struct SteadyStateReport {
    bool converged = false;
    double velocity = 0.0;
    /// First period index (after warmup) from which the per-period
    /// displacement had settled, or -1.
    int settled_from = -1;
    std::vector<double> period_displacements;
    std::string diagnostic;
};

/// Per-period part displacement analysis of a periodic run.
[[nodiscard]] inline SteadyStateReport steady_state(const Trajectory& traj, const SteadyStateOptions& opts = {}) {
    if (traj.empty() || !(traj.period > 0.0))
        throw ValidationError("steady_state: trajectory is empty or not periodic");
    const double T = traj.period;
    const double span = traj.end_time() - traj.start_time();
    const int periods = static_cast<int>(std::floor(span / T + 1e-9));
    if (periods < opts.min_warmup_periods + opts.consecutive_periods) {
        std::ostringstream os;
        os << "steady_state: trajectory spans " << periods << " periods, need at least "
           << opts.min_warmup_periods + opts.consecutive_periods;
        throw ValidationError(os.str());
    }

    SteadyStateReport report;
    const double t0 = traj.start_time();
    double prev = part_position_at(traj, t0);
    for (int k = 1; k <= periods; ++k) {
        const double z = part_position_at(traj, t0 + k * T);
        report.period_displacements.push_back(z - prev);
        prev = z;
    }
    const auto& d = report.period_displacements;
    const double length_scale = (traj.config.a_max + traj.config.gravity) * T * T;
    auto agree = [&](int first) {
        double lo = d[first], hi = d[first], mag = 0.0;
        for (int i = first; i < first + opts.consecutive_periods; ++i) {
            lo = std::min(lo, d[i]);
            hi = std::max(hi, d[i]);
            mag = std::max(mag, std::abs(d[i]));
        }
        return hi - lo <= opts.relative_agreement * mag + 1e-12 * length_scale;
    };

    const int last_window = periods - opts.consecutive_periods;
    for (int p = opts.min_warmup_periods; p <= last_window; ++p) {
        if (agree(p)) {
            report.settled_from = p;
            break;
        }
    }
    if (traj.diverged) {
        report.diagnostic = "trajectory diverged: " + traj.diagnostic;
        return report;
    }
    if (report.settled_from < 0 || !agree(last_window)) {
        report.diagnostic = "per-period part displacement did not settle within the run";
        return report;
    }
    const int k = std::min(opts.average_periods, periods - report.settled_from);
    double sum = 0.0;
    for (int i = periods - k; i < periods; ++i) sum += d[i];
    report.velocity = sum / (k * T);
    report.converged = true;
    return report;
}

/// Average steady-state part velocity; throws NonConvergenceError if the
/// run never settled.
[[nodiscard]] inline double steady_state_velocity(const Trajectory& traj, const SteadyStateOptions& opts = {}) {
    SteadyStateReport report = steady_state(traj, opts);
    if (!report.converged) throw NonConvergenceError(report.diagnostic);
    return report.velocity;
}

/// Fraction of simulated time spent in each mode, indexed by ContactMode.
[[nodiscard]] inline std::array<double, 3> mode_time_fractions(const Trajectory& traj) {
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (traj.size() < 2) return out;
    for (std::size_t i = 0; i + 1 < traj.size(); ++i)
        out[static_cast<std::size_t>(traj.states[i].mode)] += traj.states[i + 1].t - traj.states[i].t;
    const double span = traj.end_time() - traj.start_time();
    for (double& f : out) f /= span;
    return out;
}

}  // namespace vvt
