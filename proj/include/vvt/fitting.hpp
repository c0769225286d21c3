#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "vvt/detail/particle_swarm.hpp"
#include "vvt/detail/text.hpp"
#include "vvt/dynamics.hpp"
#include "vvt/errors.hpp"
#include "vvt/params.hpp"

namespace vvt {

// ============================================================================
// Differentiation
// ============================================================================

/// Velocity from uniformly sampled positions: central differences inside,
/// one-sided at the two ends. A width w > 1 first applies a centered moving
/// average whose window shrinks symmetrically near the ends, which leaves
/// linear series untouched.
[[nodiscard]] inline std::vector<double> finite_difference_velocity(std::span<const double> positions, double rate,
                                                                    int smoothing_width = 1) {
    const std::size_t n = positions.size();
    if (n < 3) throw ValidationError("finite_difference_velocity: need at least 3 samples");
    if (!std::isfinite(rate) || !(rate > 0.0)) throw ValidationError("finite_difference_velocity: rate must be > 0");
    if (smoothing_width < 1) throw ValidationError("finite_difference_velocity: smoothing width must be >= 1");

    std::vector<double> z(positions.begin(), positions.end());
    if (smoothing_width > 1) {
        const std::size_t half = static_cast<std::size_t>(smoothing_width / 2);
        std::vector<double> smoothed(n);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t h = std::min({half, i, n - 1 - i});
            double sum = 0.0;
            for (std::size_t j = i - h; j <= i + h; ++j) sum += positions[j];
            smoothed[i] = sum / static_cast<double>(2 * h + 1);
        }
        z = std::move(smoothed);
    }

    std::vector<double> v(n);
    v[0] = (z[1] - z[0]) * rate;
    for (std::size_t i = 1; i + 1 < n; ++i) v[i] = (z[i + 1] - z[i - 1]) * 0.5 * rate;
    v[n - 1] = (z[n - 1] - z[n - 2]) * rate;
    return v;
}

// ============================================================================
// Experiment traces
// ============================================================================

struct TrialMetadata {
    std::optional<double> drive_frequency;        // Hz
    std::optional<double> amplitude;              // V peak-to-peak
    std::optional<double> offset;                 // V
    std::optional<double> measured_normal_force;  // N
};

/// Tracked motion of one transport experiment, positions in meters.
struct ExperimentTrace {
    std::string name;
    double sample_rate = 0.0;
    std::vector<double> z_surface;
    std::vector<double> z_part;
    std::optional<std::vector<double>> z_plate;
    TrialMetadata metadata;

    [[nodiscard]] std::size_t size() const { return z_part.size(); }
    [[nodiscard]] double duration() const { return static_cast<double>(size()) / sample_rate; }

    /// Largest excursion of the part from its first sample.
    [[nodiscard]] double max_part_excursion() const {
        double out = 0.0;
        for (double z : z_part) out = std::max(out, std::abs(z - z_part.front()));
        return out;
    }
    [[nodiscard]] double part_range() const {
        auto [lo, hi] = std::minmax_element(z_part.begin(), z_part.end());
        return *hi - *lo;
    }

    void validate() const {
        const std::string who = name.empty() ? std::string("trace") : "trace '" + name + "'";
        if (!std::isfinite(sample_rate) || !(sample_rate > 0.0)) throw ValidationError(who + ": sample rate must be > 0");
        if (z_surface.size() != z_part.size())
            throw ValidationError(who + ": column 'z_part' has " + std::to_string(z_part.size()) +
                                  " samples but 'z_surface' has " + std::to_string(z_surface.size()));
        if (z_plate && z_plate->size() != z_part.size())
            throw ValidationError(who + ": column 'z_plate' has " + std::to_string(z_plate->size()) +
                                  " samples, expected " + std::to_string(z_part.size()));
        if (z_part.size() < 10) throw ValidationError(who + ": need at least 10 samples");
        auto finite = [&](const std::vector<double>& s, const char* col) {
            for (std::size_t i = 0; i < s.size(); ++i)
                if (!std::isfinite(s[i]))
                    throw ValidationError(who + ": column '" + col + "' sample " + std::to_string(i) + " is not finite");
        };
        finite(z_surface, "z_surface");
        finite(z_part, "z_part");
        if (z_plate) finite(*z_plate, "z_plate");
    }
};

/// Parameters held fixed during a fit.
struct FixedParameters {
    double mu_s = 0.72;
    double part_mass = 0.009;
    double gravity = kStandardGravity;
    bool dual_surface = false;
};

struct TrialOptions {
    /// Moving-average width applied before differentiating positions.
    int smoothing_width = 5;
    /// Initial part/surface velocity mismatch still treated as sticking
    /// (m/s). One-sided differences at 960 Hz differ by a dt / 2 even for a
    /// sticking part, so this is deliberately loose.
    double initial_stick_tolerance = 0.05;
    SimulationOptions sim;
};

/// Largest |dv/dt| between consecutive samples, floored at 1 m/s^2. Only
/// used to scale the divergence bound of trace-driven runs.
[[nodiscard]] inline double peak_trace_acceleration(const SurfaceVelocityTrace& trace) {
    double peak = 1.0;
    for (std::size_t i = 1; i < trace.velocity.size(); ++i)
        peak = std::max(peak, std::abs(trace.velocity[i] - trace.velocity[i - 1]) / trace.dt);
    return peak;
}

/// One trace prepared for repeated simulation: surface velocity and initial
/// part state are computed once.
class TrialModel {
  public:
    TrialModel(const ExperimentTrace& trace, const FixedParameters& fixed, const TrialOptions& opts = {})
        : trace_(&trace), fixed_(fixed), opts_(opts) {
        trace.validate();
        const double dt = 1.0 / trace.sample_rate;
        surface_.t0 = 0.0;
        surface_.dt = dt;
        surface_.velocity = finite_difference_velocity(trace.z_surface, trace.sample_rate, opts.smoothing_width);
        const std::vector<double> v_part = finite_difference_velocity(trace.z_part, trace.sample_rate, opts.smoothing_width);

        initial_.t = 0.0;
        initial_.z_S = trace.z_surface.front();
        initial_.v_S = surface_.velocity.front();
        initial_.z_P = trace.z_part.front();
        const double rel = v_part.front() - initial_.v_S;
        if (std::abs(rel) <= opts.initial_stick_tolerance) {
            initial_.v_P = initial_.v_S;
            initial_.mode = ContactMode::Sticking;
        } else {
            initial_.v_P = v_part.front();
            initial_.mode = rel > 0.0 ? ContactMode::SlippingUp : ContactMode::SlippingDown;
        }
        const double amplitude = trace.part_range() > 0.0 ? trace.part_range() : 1e-3;
        penalty_ = 1e3 * static_cast<double>(trace.size()) * amplitude;
    }

    [[nodiscard]] TransportConfig config(double normal_force) const {
        TransportConfig cfg;
        cfg.part_mass = fixed_.part_mass;
        cfg.normal_force = normal_force;
        cfg.gravity = fixed_.gravity;
        cfg.dual_surface = fixed_.dual_surface;
        cfg.period = trace_->duration();
        cfg.a_max = peak_trace_acceleration(surface_);
        return cfg;
    }

    [[nodiscard]] Trajectory simulate(double mu_k, double normal_force) const {
        const FrictionPair fric{fixed_.mu_s, mu_k};
        return simulate_from_surface_trace(surface_, fric, config(normal_force), initial_, opts_.sim);
    }

    /// Mean |z_P,sim - z_P,meas|; diverging or failing runs cost `penalty()`.
    [[nodiscard]] double error(double mu_k, double normal_force) const {
        const FrictionPair fric{fixed_.mu_s, mu_k};
        fric.validate();
        if (!std::isfinite(normal_force) || !(normal_force > 0.0))
            throw ValidationError("trial_error: normal force must be finite and > 0");
        Trajectory traj;
        try {
            traj = simulate(mu_k, normal_force);
        } catch (const RuntimeFailure&) {
            return penalty_;
        }
        if (traj.diverged || traj.size() != trace_->size()) return penalty_;
        double sum = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i) sum += std::abs(traj.states[i].z_P - trace_->z_part[i]);
        const double mean = sum / static_cast<double>(traj.size());
        return std::isfinite(mean) ? mean : penalty_;
    }

    [[nodiscard]] double penalty() const { return penalty_; }
    [[nodiscard]] const SystemState& initial_state() const { return initial_; }
    [[nodiscard]] const SurfaceVelocityTrace& surface_velocity() const { return surface_; }
    [[nodiscard]] const ExperimentTrace& trace() const { return *trace_; }

  private:
    const ExperimentTrace* trace_;
    FixedParameters fixed_;
    TrialOptions opts_;
    SurfaceVelocityTrace surface_;
    SystemState initial_;
    double penalty_ = 0.0;
};

/// Mean absolute part-position error of the model against one trace.
[[nodiscard]] inline double trial_error(const ExperimentTrace& trace, double mu_k, double normal_force,
                                        const FixedParameters& fixed, const TrialOptions& opts = {}) {
    return TrialModel(trace, fixed, opts).error(mu_k, normal_force);
}

/// Builds a trace whose part motion is produced by this model: the surface
/// positions are sampled from `waveform`, and the part is simulated against
/// the surface velocity the fitting pipeline will reconstruct from them.
[[nodiscard]] inline ExperimentTrace synthesize_trace(const Waveform& waveform, double mu_k, double normal_force,
                                                      const FixedParameters& fixed, double sample_rate,
                                                      std::size_t samples, const TrialOptions& opts = {},
                                                      double z_part0 = 0.0) {
    ExperimentTrace trace;
    trace.sample_rate = sample_rate;
    trace.z_surface.resize(samples);
    for (std::size_t i = 0; i < samples; ++i)
        trace.z_surface[i] = waveform.position(static_cast<double>(i) / sample_rate);
    if (samples < 10) throw ValidationError("synthesize_trace: need at least 10 samples");
    SurfaceVelocityTrace surface{0.0, 1.0 / sample_rate,
                                 finite_difference_velocity(trace.z_surface, sample_rate, opts.smoothing_width)};
    TransportConfig cfg;
    cfg.part_mass = fixed.part_mass;
    cfg.normal_force = normal_force;
    cfg.gravity = fixed.gravity;
    cfg.dual_surface = fixed.dual_surface;
    cfg.period = waveform.period();
    cfg.a_max = peak_trace_acceleration(surface);
    // The part starts stuck to the surface.
    const SystemState start{0.0, trace.z_surface.front(), surface.velocity.front(), z_part0,
                            surface.velocity.front(), ContactMode::Sticking};
    const Trajectory traj = simulate_from_surface_trace(surface, {fixed.mu_s, mu_k}, cfg, start, opts.sim);
    if (traj.diverged) throw RuntimeFailure("synthesize_trace: simulation diverged: " + traj.diagnostic);
    trace.z_part.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) trace.z_part[i] = traj.states[i].z_P;
    trace.metadata.drive_frequency = 1.0 / waveform.period();
    trace.metadata.measured_normal_force = normal_force;
    return trace;
}

/// Adds zero-mean Gaussian noise to the part positions with standard
/// deviation `fraction` times their peak-to-peak range.
inline void add_part_position_noise(ExperimentTrace& trace, double fraction, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, fraction * trace.part_range());
    for (double& z : trace.z_part) z += noise(rng);
}

// ============================================================================
// Fitting
// ============================================================================

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

struct FitBounds {
    Interval mu_k{0.1, 1.0};
    /// One normal-force interval per trace (N).
    std::vector<Interval> normal_force;
};

struct FitOptions {
    detail::SwarmOptions swarm;
    /// Local refinement of each swarm result; disable with polish = false.
    bool polish = true;
    detail::SimplexOptions simplex;
    TrialOptions trial;
    /// Independent swarm runs with seeds derived from the fit seed; the best
    /// is reported and the spread of their mu_k values is a diagnostic.
    int restarts = 8;
    /// Relative cost change across the mu_k bounds below which mu_k is
    /// reported as unidentifiable.
    double flat_cost_tolerance = 1e-6;
};

struct FitDiagnostics {
    int iterations = 0;
    std::size_t evaluations = 0;
    bool stalled = false;
    std::vector<double> best_cost_history;
    std::vector<double> restart_mu_k;
    std::vector<double> restart_cost;
    double mu_k_spread = 0.0;
    bool flat_mu_k = false;
    double mu_k_profile_change = 0.0;
};

struct FitResult {
    double mu_k_fit = 0.0;
    std::vector<double> normal_force_fit;
    std::vector<double> trial_error;
    std::vector<double> normalized_error;
    double total_cost = 0.0;
    FitDiagnostics diagnostics;

    [[nodiscard]] double mean_error() const {
        double s = 0.0;
        for (double e : trial_error) s += e;
        return trial_error.empty() ? 0.0 : s / static_cast<double>(trial_error.size());
    }
    [[nodiscard]] double mean_normalized_error() const {
        double s = 0.0;
        for (double e : normalized_error) s += e;
        return normalized_error.empty() ? 0.0 : s / static_cast<double>(normalized_error.size());
    }
};

/// Sum of trial errors for a shared mu_k and per-trial normal forces.
[[nodiscard]] inline double total_cost(std::span<const TrialModel> models, double mu_k,
                                       std::span<const double> normal_forces) {
    if (models.size() != normal_forces.size()) throw ValidationError("total_cost: one normal force per trial required");
    double sum = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) sum += models[i].error(mu_k, normal_forces[i]);
    return sum;
}

/// Fits a shared mu_k and one normal force per trace by minimizing the sum
/// of per-trial mean part-position errors with a particle swarm.
[[nodiscard]] inline FitResult fit(const std::vector<ExperimentTrace>& traces, const FitBounds& bounds,
                                   const FixedParameters& fixed, std::uint64_t seed, const FitOptions& opts = {}) {
    if (traces.empty()) throw ValidationError("fit: at least one trace is required");
    if (bounds.normal_force.size() != traces.size())
        throw ValidationError("fit: need one normal-force interval per trace (got " +
                              std::to_string(bounds.normal_force.size()) + " for " + std::to_string(traces.size()) +
                              " traces)");
    if (!(bounds.mu_k.lo > 0.0) || !(bounds.mu_k.hi >= bounds.mu_k.lo))
        throw ValidationError("fit: mu_k bounds must satisfy 0 < lo <= hi");
    if (bounds.mu_k.hi > fixed.mu_s)
        throw ValidationError("fit: mu_k upper bound exceeds the fixed mu_s (kinetic friction cannot exceed static)");
    for (std::size_t i = 0; i < bounds.normal_force.size(); ++i) {
        const Interval& b = bounds.normal_force[i];
        if (!(b.lo > 0.0) || !(b.hi >= b.lo) || !std::isfinite(b.hi))
            throw ValidationError("fit: normal-force bounds for trace " + std::to_string(i) + " must satisfy 0 < lo <= hi");
    }
    if (opts.restarts < 1) throw ValidationError("fit: restarts must be >= 1");

    std::vector<TrialModel> models;
    models.reserve(traces.size());
    for (const auto& t : traces) models.emplace_back(t, fixed, opts.trial);

    std::vector<double> lower{bounds.mu_k.lo}, upper{bounds.mu_k.hi};
    for (const auto& b : bounds.normal_force) {
        lower.push_back(b.lo);
        upper.push_back(b.hi);
    }
    auto cost = [&](const std::vector<double>& x) {
        return total_cost(models, x[0], std::span<const double>(x).subspan(1));
    };

    FitResult result;
    detail::SwarmResult best;
    for (int r = 0; r < opts.restarts; ++r) {
        const std::uint64_t run_seed = seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(r);
        detail::SwarmResult run = detail::particle_swarm(cost, lower, upper, run_seed, opts.swarm);
        if (opts.polish) {
            detail::SwarmResult local = detail::simplex_refine(cost, lower, upper, run.best, run.best_cost, opts.simplex);
            run.evaluations += local.evaluations;
            run.best = std::move(local.best);
            run.best_cost = local.best_cost;
            run.history.push_back(run.best_cost);
        }
        result.diagnostics.restart_mu_k.push_back(run.best[0]);
        result.diagnostics.restart_cost.push_back(run.best_cost);
        result.diagnostics.evaluations += run.evaluations;
        if (r == 0 || run.best_cost < best.best_cost) best = std::move(run);
    }
    if (!std::isfinite(best.best_cost)) throw RuntimeFailure("fit: optimizer ended with a non-finite cost");

    result.mu_k_fit = best.best[0];
    result.normal_force_fit.assign(best.best.begin() + 1, best.best.end());
    result.total_cost = best.best_cost;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const double e = models[i].error(result.mu_k_fit, result.normal_force_fit[i]);
        result.trial_error.push_back(e);
        const double scale = traces[i].max_part_excursion();
        result.normalized_error.push_back(scale > 0.0 ? e / scale : 0.0);
    }

    auto& diag = result.diagnostics;
    diag.iterations = best.iterations;
    diag.stalled = best.stalled;
    diag.best_cost_history = best.history;
    auto [lo, hi] = std::minmax_element(diag.restart_mu_k.begin(), diag.restart_mu_k.end());
    diag.mu_k_spread = *hi - *lo;
    // Cost profile along mu_k with the normal forces held at the optimum.
    double change = 0.0;
    for (double mu : {bounds.mu_k.lo, bounds.mu_k.hi}) {
        const double c = total_cost(models, mu, result.normal_force_fit);
        change = std::max(change, std::abs(c - result.total_cost));
    }
    diag.mu_k_profile_change = change / std::max(result.total_cost, std::numeric_limits<double>::min());
    diag.flat_mu_k = change <= opts.flat_cost_tolerance * result.total_cost + 1e-15;
    return result;
}

// ============================================================================
// Trace files
// ============================================================================

struct TraceFormat {
    char delimiter = ',';
    /// Overrides the file's units field when set ("m" or "mm").
    std::optional<std::string> units;
    /// Accepted relative deviation of each time step from the mean step.
    double uniformity_tolerance = 1e-3;
};

namespace detail {

inline double unit_scale(const std::string& units, const std::string& origin) {
    if (units == "m") return 1.0;
    if (units == "mm") return 1e-3;
    throw ValidationError(origin + ": unknown units '" + units + "' (expected m or mm)");
}

}  // namespace detail

/// Parses a trace from delimited text.
///
/// Lines starting with '#' carry `key: value` metadata (units, sample_rate,
/// drive_frequency, amplitude, offset, measured_normal_force). The first other
/// line is the header naming columns z_surface, z_part and optionally t and
/// z_plate. Without a t column the sample_rate field is required.
[[nodiscard]] inline ExperimentTrace parse_trace(std::istream& in, const std::string& origin,
                                                 const TraceFormat& format = {}) {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::map<std::string, std::vector<double>> columns;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view text = detail::trim(line);
        if (text.empty()) continue;
        if (text.front() == '#') {
            const std::string_view body = detail::trim(text.substr(1));
            const auto colon = body.find(':');
            if (colon != std::string_view::npos)
                meta[std::string(detail::trim(body.substr(0, colon)))] = std::string(detail::trim(body.substr(colon + 1)));
            continue;
        }
        const auto fields = detail::split(text, format.delimiter);
        if (header.empty()) {
            for (auto f : fields) {
                std::string name(f);
                if (name.empty()) throw ValidationError(origin + ": empty column name in header");
                if (columns.count(name)) throw ValidationError(origin + ": duplicate column '" + name + "'");
                columns[name];
                header.push_back(name);
            }
            if (!columns.count("z_surface") || !columns.count("z_part"))
                throw ValidationError(origin + ": missing header with columns z_surface and z_part");
            continue;
        }
        if (fields.size() < header.size())
            throw ValidationError(origin + ": line " + std::to_string(line_no) + ": missing value for column '" +
                                  header[fields.size()] + "'");
        if (fields.size() > header.size())
            throw ValidationError(origin + ": line " + std::to_string(line_no) + ": more values than header columns");
        for (std::size_t c = 0; c < header.size(); ++c) {
            const auto value = detail::parse_double(fields[c]);
            if (!value || !std::isfinite(*value))
                throw ValidationError(origin + ": line " + std::to_string(line_no) + ": column '" + header[c] +
                                      "' has non-numeric or non-finite value '" + std::string(fields[c]) + "'");
            columns[header[c]].push_back(*value);
        }
    }
    if (header.empty()) throw ValidationError(origin + ": missing header row");

    const std::string units = format.units.value_or(meta.count("units") ? meta["units"] : std::string("m"));
    const double scale = detail::unit_scale(units, origin);

    ExperimentTrace trace;
    trace.name = origin;
    auto meta_number = [&](const char* key) -> std::optional<double> {
        auto it = meta.find(key);
        if (it == meta.end()) return std::nullopt;
        const auto v = detail::parse_double(it->second);
        if (!v || !std::isfinite(*v)) throw ValidationError(origin + ": metadata '" + key + "' is not a number");
        return v;
    };
    if (columns.count("t")) {
        const auto& t = columns["t"];
        if (t.size() < 2) throw ValidationError(origin + ": need at least 2 samples");
        const double dt = (t.back() - t.front()) / static_cast<double>(t.size() - 1);
        if (!(dt > 0.0)) throw ValidationError(origin + ": column 't' must increase");
        for (std::size_t i = 1; i < t.size(); ++i)
            if (std::abs((t[i] - t[i - 1]) - dt) > format.uniformity_tolerance * dt)
                throw ValidationError(origin + ": column 't' is not uniformly spaced near row " + std::to_string(i));
        trace.sample_rate = 1.0 / dt;
        if (auto rate = meta_number("sample_rate"); rate && std::abs(*rate - trace.sample_rate) > 1e-3 * *rate)
            throw ValidationError(origin + ": sample_rate metadata disagrees with column 't'");
    } else if (auto rate = meta_number("sample_rate")) {
        trace.sample_rate = *rate;
    } else {
        throw ValidationError(origin + ": no 't' column and no sample_rate metadata");
    }
    auto scaled = [&](const std::string& name) {
        std::vector<double> s = columns[name];
        for (double& z : s) z *= scale;
        return s;
    };
    trace.z_surface = scaled("z_surface");
    trace.z_part = scaled("z_part");
    if (columns.count("z_plate")) trace.z_plate = scaled("z_plate");
    trace.metadata.drive_frequency = meta_number("drive_frequency");
    trace.metadata.amplitude = meta_number("amplitude");
    trace.metadata.offset = meta_number("offset");
    trace.metadata.measured_normal_force = meta_number("measured_normal_force");
    trace.validate();
    return trace;
}

[[nodiscard]] inline ExperimentTrace load_trace(const std::string& path, const TraceFormat& format = {}) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open trace file '" + path + "'");
    return parse_trace(in, path, format);
}

/// Writes a trace in the format read by parse_trace, positions in meters.
inline void write_trace(std::ostream& out, const ExperimentTrace& trace) {
    out << "# units: m\n";
    out << "# sample_rate: " << detail::format_double(trace.sample_rate) << '\n';
    const auto& md = trace.metadata;
    if (md.drive_frequency) out << "# drive_frequency: " << detail::format_double(*md.drive_frequency) << '\n';
    if (md.amplitude) out << "# amplitude: " << detail::format_double(*md.amplitude) << '\n';
    if (md.offset) out << "# offset: " << detail::format_double(*md.offset) << '\n';
    if (md.measured_normal_force)
        out << "# measured_normal_force: " << detail::format_double(*md.measured_normal_force) << '\n';
    out << "t,z_surface,z_part" << (trace.z_plate ? ",z_plate" : "") << '\n';
    for (std::size_t i = 0; i < trace.size(); ++i) {
        out << detail::format_double(static_cast<double>(i) / trace.sample_rate) << ','
            << detail::format_double(trace.z_surface[i]) << ',' << detail::format_double(trace.z_part[i]);
        if (trace.z_plate) out << ',' << detail::format_double((*trace.z_plate)[i]);
        out << '\n';
    }
}

}  // namespace vvt
