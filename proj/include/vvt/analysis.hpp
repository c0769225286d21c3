#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "vvt/dynamics.hpp"
#include "vvt/errors.hpp"
#include "vvt/params.hpp"
#include "vvt/waveform.hpp"

namespace vvt {

/// Operating point in normalized form: f_n = F_n/(m g), alpha = a_max/g.
struct NondimensionalPoint {
    double f_n = 0.0;
    double alpha = 0.0;
    double mu_s = 0.7;
    double mu_k = 0.6;

    [[nodiscard]] FrictionPair friction() const { return {mu_s, mu_k}; }

    void validate() const {
        if (!std::isfinite(f_n) || !(f_n > 0.0)) throw ValidationError("f_n must be finite and > 0");
        if (!std::isfinite(alpha) || !(alpha > 0.0)) throw ValidationError("alpha must be finite and > 0");
        friction().validate();
    }
};

/// f_n,max = (alpha - 1)/mu_k: above it kinetic friction drags the part
/// down at least as hard as the surface can accelerate, so the surface
/// can never slip below it.
[[nodiscard]] inline double f_n_max(double alpha, double mu_k) {
    if (!std::isfinite(alpha) || !(alpha > 1.0)) {
        std::ostringstream os;
        os << "f_n_max: alpha must exceed 1 (got " << alpha << "); the surface cannot out-accelerate gravity";
        throw ValidationError(os.str());
    }
    if (!(mu_k > 0.0)) throw ValidationError("f_n_max: mu_k must be > 0");
    return (alpha - 1.0) / mu_k;
}

/// Normalized optimal average velocity v_ave / (g T).
///
///   (mu_s f_n - 1)^2 (alpha^2 - (mu_k f_n + 1)^2) / (4 alpha (mu_s + mu_k)^2 f_n^2)
///
/// Returns 0 outside the band 1/mu_s < f_n < (alpha - 1)/mu_k.
[[nodiscard]] inline double v_ave_closed_form(const NondimensionalPoint& p) {
    p.validate();
    const double ms = p.mu_s, mk = p.mu_k, f = p.f_n, a = p.alpha;
    const double u = ms * f - 1.0;
    const double w = a * a - (mk * f + 1.0) * (mk * f + 1.0);
    if (!(u > 0.0) || !(w > 0.0)) return 0.0;
    return u * u * w / (4.0 * a * (ms + mk) * (ms + mk) * f * f);
}

/// Sign-carrying factor of d(v_ave)/d(f_n) on the feasible band.
///
/// d/df [u^2 w / f^2] = (2u / f^3) * h(f) with
///   h(f) = alpha^2 - (mu_k f + 1)^2 - mu_k f (mu_s f - 1)(mu_k f + 1),
/// a cubic in f; u > 0 on the band, so the maximizer is the root of h.
[[nodiscard]] inline double v_ave_derivative_factor(double f_n, double alpha, const FrictionPair& fric) {
    const double q = fric.mu_k * f_n + 1.0;
    return alpha * alpha - q * q - fric.mu_k * f_n * (fric.mu_s * f_n - 1.0) * q;
}

/// Analytic d(v_ave/(gT))/d(f_n); meaningful inside the feasible band.
[[nodiscard]] inline double v_ave_derivative(double f_n, double alpha, const FrictionPair& fric) {
    const double u = fric.mu_s * f_n - 1.0;
    const double s = fric.mu_s + fric.mu_k;
    return 2.0 * u * v_ave_derivative_factor(f_n, alpha, fric) / (4.0 * alpha * s * s * f_n * f_n * f_n);
}

struct OptimalNormalForce {
    double f_n = 0.0;
    double v_norm = 0.0;
};

/// Interior maximizer of the closed-form average velocity over
/// (1/mu_s, f_n,max), by bracketed root finding on the derivative.
[[nodiscard]] inline OptimalNormalForce optimal_f_n(double alpha, const FrictionPair& fric) {
    fric.validate();
    const double lo = 1.0 / fric.mu_s;
    const double hi = f_n_max(alpha, fric.mu_k);
    // h(lo) <= 0 is the same empty-band condition, alpha <= 1 + mu_k/mu_s, free of rounding in hi.
    if (!(hi > lo) || !(v_ave_derivative_factor(lo, alpha, fric) > 0.0)) {
        std::ostringstream os;
        os << "optimal_f_n: feasible band (1/mu_s, f_n,max) = (" << lo << ", " << hi << ") is empty";
        throw ValidationError(os.str());
    }
    auto h = [&](double f) { return v_ave_derivative_factor(f, alpha, fric); };
    // h(lo) = alpha^2 - (mu_k/mu_s + 1)^2 > 0 and h(hi) < 0 whenever the band is nonempty.
    const double h_lo = h(lo);
    const double h_hi = h(hi);
    if (!(h_hi < 0.0))
        throw RuntimeFailure("optimal_f_n: derivative does not change sign across the feasible band");

    boost::math::tools::eps_tolerance<double> tol(std::numeric_limits<double>::digits - 3);
    std::uintmax_t max_iter = 200;
    auto [a, b] = boost::math::tools::toms748_solve(h, lo, hi, h_lo, h_hi, tol, max_iter);
    const double f_star = 0.5 * (a + b);
    NondimensionalPoint p{f_star, alpha, fric.mu_s, fric.mu_k};
    return {f_star, v_ave_closed_form(p)};
}

/// Named transport bound and whether the point satisfies it.
struct BoundCheck {
    std::string name;
    std::string condition;
    double value = 0.0;
    double limit = 0.0;
    bool satisfied = false;
};

struct FeasibilityReport {
    NondimensionalPoint point;
    std::vector<BoundCheck> bounds;

    [[nodiscard]] bool feasible() const {
        return std::all_of(bounds.begin(), bounds.end(), [](const BoundCheck& b) { return b.satisfied; });
    }
    [[nodiscard]] std::vector<std::string> violated() const {
        std::vector<std::string> out;
        for (const auto& b : bounds)
            if (!b.satisfied) out.push_back(b.name);
        return out;
    }
    [[nodiscard]] const BoundCheck& bound(const std::string& name) const {
        for (const auto& b : bounds)
            if (b.name == name) return b;
        throw ValidationError("no bound named '" + name + "'");
    }
};

/// Evaluates every necessary condition for upward transport:
///  - static_hold:         f_n > 1/mu_s           (part held with the surface at rest)
///  - kinetic_support:     f_n > 1/mu_k           (slipping cannot fall indefinitely)
///  - slip_down_accel:     alpha > mu_s f_n + 1   (surface can break static friction downward)
///  - min_accel:           alpha > 2
///  - max_normal_force:    f_n < (alpha - 1)/mu_k
[[nodiscard]] inline FeasibilityReport feasibility_report(const NondimensionalPoint& p) {
    p.validate();
    FeasibilityReport r;
    r.point = p;
    const double f = p.f_n, a = p.alpha;
    r.bounds.push_back({"static_hold", "f_n > 1/mu_s", f, 1.0 / p.mu_s, f > 1.0 / p.mu_s});
    r.bounds.push_back({"kinetic_support", "f_n > 1/mu_k", f, 1.0 / p.mu_k, f > 1.0 / p.mu_k});
    r.bounds.push_back({"slip_down_accel", "alpha > mu_s f_n + 1", a, p.mu_s * f + 1.0, a > p.mu_s * f + 1.0});
    r.bounds.push_back({"min_accel", "alpha > 2", a, 2.0, a > 2.0});
    r.bounds.push_back({"max_normal_force", "f_n < (alpha - 1)/mu_k", f, (a - 1.0) / p.mu_k, f < (a - 1.0) / p.mu_k});
    return r;
}

struct EquivalentCoefficients {
    double mu_s_tilde = 0.0;
    double mu_k_tilde = 0.0;

    /// Pair for a zero-gravity run with normal force m g.
    [[nodiscard]] FrictionPair friction() const { return {mu_s_tilde, mu_k_tilde, true}; }
};

/// Coefficients under which upward vertical transport (sticking and
/// slipping up only) obeys the horizontal equations with unit normal load.
[[nodiscard]] inline EquivalentCoefficients equivalent_horizontal_coefficients(const FrictionPair& fric, double f_n) {
    if (!std::isfinite(f_n) || !(f_n > 0.0)) throw ValidationError("f_n must be finite and > 0");
    return {fric.mu_s * f_n - 1.0, fric.mu_k * f_n + 1.0};
}

// ============================================================================
// Sweeps
// ============================================================================

struct SweepRow {
    double alpha = 0.0;
    double f_n = 0.0;
    double v_norm = 0.0;
    /// Inside the closed-form band (1/mu_s, f_n,max).
    bool feasible = false;
};

struct SweepOptimum {
    double alpha = 0.0;
    bool band_empty = true;
    double f_n_star = 0.0;
    double v_star = 0.0;
    /// Best point on the supplied grid.
    double grid_f_n = 0.0;
    double grid_v = 0.0;
};

struct SimulationCheck {
    double alpha = 0.0;
    double f_n = 0.0;
    double v_closed_form = 0.0;
    double v_simulated = 0.0;
    double relative_error = 0.0;
    bool converged = false;
};

struct SweepResult {
    FrictionPair friction;
    std::vector<SweepRow> rows;
    std::vector<SweepOptimum> optima;
    std::vector<SimulationCheck> checks;
};

[[nodiscard]] inline bool in_band(double f_n, double alpha, const FrictionPair& fric) {
    return f_n > 1.0 / fric.mu_s && alpha > fric.mu_k * f_n + 1.0;
}

struct SweepVerification {
    /// Number of random grid points cross-checked by simulation.
    int points = 0;
    std::uint64_t seed = 1;
    /// Physical scale used for the simulated runs.
    double period = 0.05;
    double mass = 0.009;
    double gravity = kStandardGravity;
    int periods = 15;
    SimulationOptions sim;
};

/// Steady-state simulation of the optimal waveform at one point, normalized
/// by g T.
[[nodiscard]] inline SimulationCheck simulate_point(double alpha, double f_n, const FrictionPair& fric,
                                                    const SweepVerification& setup) {
    const TransportConfig cfg =
        TransportConfig::from_nondimensional(f_n, alpha, setup.mass, setup.period, setup.gravity);
    const Waveform w = optimal_waveform(fric, cfg);
    const Trajectory traj = simulate(w, fric, cfg, setup.periods, sticking_start(w), setup.sim);
    const SteadyStateReport ss = steady_state(traj);
    SimulationCheck c;
    c.alpha = alpha;
    c.f_n = f_n;
    c.v_closed_form = v_ave_closed_form({f_n, alpha, fric.mu_s, fric.mu_k});
    c.v_simulated = ss.velocity / (setup.gravity * setup.period);
    c.converged = ss.converged;
    const double denom = std::max(std::abs(c.v_closed_form), 1e-12);
    c.relative_error = std::abs(c.v_simulated - c.v_closed_form) / denom;
    return c;
}

/// Tabulates the closed form over alphas x f_n_grid and records the
/// per-alpha optimum. With verify.points > 0, that many grid points that
/// pass the full feasibility report are drawn at random and re-evaluated by
/// simulation.
[[nodiscard]] inline SweepResult sweep(const FrictionPair& fric, const std::vector<double>& alphas,
                                       const std::vector<double>& f_n_grid, const SweepVerification& verify = {}) {
    fric.validate();
    if (alphas.empty() || f_n_grid.empty()) throw ValidationError("sweep: grids must be nonempty");
    auto check_grid = [](const std::vector<double>& g, const char* name) {
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i]) || !(g[i] > 0.0))
                throw ValidationError(std::string("sweep: ") + name + " values must be finite and > 0");
            if (i > 0 && !(g[i] > g[i - 1]))
                throw ValidationError(std::string("sweep: ") + name + " grid must be strictly increasing");
        }
    };
    check_grid(alphas, "alpha");
    check_grid(f_n_grid, "f_n");

    SweepResult result;
    result.friction = fric;
    result.rows.reserve(alphas.size() * f_n_grid.size());
    for (double a : alphas) {
        SweepOptimum opt;
        opt.alpha = a;
        for (double f : f_n_grid) {
            SweepRow row{a, f, v_ave_closed_form({f, a, fric.mu_s, fric.mu_k}), in_band(f, a, fric)};
            if (row.v_norm > opt.grid_v) {
                opt.grid_v = row.v_norm;
                opt.grid_f_n = f;
            }
            result.rows.push_back(row);
        }
        if (a > 1.0 && f_n_max(a, fric.mu_k) > 1.0 / fric.mu_s) {
            const OptimalNormalForce best = optimal_f_n(a, fric);
            opt.band_empty = false;
            opt.f_n_star = best.f_n;
            opt.v_star = best.v_norm;
        }
        result.optima.push_back(opt);
    }

    if (verify.points > 0) {
        std::vector<std::size_t> candidates;
        for (std::size_t i = 0; i < result.rows.size(); ++i) {
            const SweepRow& r = result.rows[i];
            if (feasibility_report({r.f_n, r.alpha, fric.mu_s, fric.mu_k}).feasible()) candidates.push_back(i);
        }
        std::mt19937_64 rng(verify.seed);
        std::shuffle(candidates.begin(), candidates.end(), rng);
        const std::size_t n = std::min<std::size_t>(candidates.size(), static_cast<std::size_t>(verify.points));
        candidates.resize(n);
        std::sort(candidates.begin(), candidates.end());
        for (std::size_t idx : candidates)
            result.checks.push_back(simulate_point(result.rows[idx].alpha, result.rows[idx].f_n, fric, verify));
    }
    return result;
}

/// Evenly spaced grid including both end points.
[[nodiscard]] inline std::vector<double> linspace(double first, double last, std::size_t count) {
    if (count == 0) return {};
    if (count == 1) return {first};
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i)
        out[i] = first + (last - first) * static_cast<double>(i) / static_cast<double>(count - 1);
    return out;
}

}  // namespace vvt
