// Acceptance checks. `acceptance <id>` runs one criterion (1, 2, 3, 4, 5,
// 6a, 6b, 7, 8); with no argument every criterion runs. Each prints one
// PASS/FAIL line; the exit status is nonzero if any ran criterion failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vvt/synthetic.hpp"
#include "vvt/vvt.hpp"

using namespace vvt;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
    char buf[2048];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

const FrictionPair kFric{0.7, 0.6};

// Closed form vs simulation over the 5x5 grid f_n in [2, 12], alpha in [6, 30].
Outcome closed_form_cross_validation() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto fns = linspace(2.0, 12.0, 5);
    const auto alphas = linspace(6.0, 30.0, 5);
    SweepVerification setup;
    int simulated = 0, outside = 0, bad = 0;
    double worst = 0.0;
    std::string where;
    for (double a : alphas)
        for (double f : fns) {
            const NondimensionalPoint p{f, a, kFric.mu_s, kFric.mu_k};
            if (!feasibility_report(p).feasible()) {
                // Outside the band both sides are zero by definition.
                ++outside;
                if (v_ave_closed_form(p) != 0.0 && in_band(f, a, kFric)) ++bad;
                continue;
            }
            const SimulationCheck c = simulate_point(a, f, kFric, setup);
            ++simulated;
            if (!c.converged || c.relative_error > 0.01) ++bad;
            if (c.relative_error > worst) {
                worst = c.relative_error;
                where = fmt("alpha=%g f_n=%g", a, f);
            }
        }
    const double secs = seconds_since(t0);
    return {bad == 0 && secs < 30.0,
            fmt("%d feasible points simulated (%d outside the band), max relative error %.2e at %s, %.2f s", simulated,
                outside, worst, where.c_str(), secs)};
}

Trajectory reference_run(int steps_per_period, int periods = 20) {
    const auto cfg = TransportConfig::from_nondimensional(5.0, 10.0);
    const Waveform w = optimal_waveform(kFric, cfg);
    SimulationOptions opts;
    opts.steps_per_period = steps_per_period;
    return simulate(w, kFric, cfg, periods, sticking_start(w), opts);
}

// Optimal trajectory shape at f_n = 5, alpha = 10.
Outcome optimal_trajectory_shape() {
    const auto cfg = TransportConfig::from_nondimensional(5.0, 10.0);
    const OptimalTiming timing = optimal_timing(kFric, cfg);
    const Trajectory traj = reference_run(2000);
    const double T = cfg.period;
    const std::size_t n = traj.samples_per_period;
    // Last full period, after the start-up transient.
    const std::size_t first = traj.size() - 1 - n;

    std::vector<int> phases;  // 1: stick-up, 2: -a_max, 3: +a_max
    bool modes_ok = true;
    std::size_t slip_down = 0;
    double first_slip = -1.0, min_catchup_v = 0.0;
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (traj.states[i].mode == ContactMode::SlippingDown) ++slip_down;
    for (std::size_t i = first; i < first + n; ++i) {
        const SystemState& s = traj.states[i];
        const double a = traj.surface_accel[i];
        const int ph = a <= -0.999 * cfg.a_max ? 2 : a >= 0.999 * cfg.a_max ? 3 : 1;
        if (phases.empty() || phases.back() != ph) phases.push_back(ph);
        if (ph == 1 && s.mode != ContactMode::Sticking) modes_ok = false;
        if (ph != 1 && s.mode != ContactMode::SlippingUp) modes_ok = false;
        if (first_slip < 0.0 && s.mode != ContactMode::Sticking) first_slip = s.t - traj.states[first].t;
        if (ph == 3) min_catchup_v = std::min(min_catchup_v, s.v_P);
    }
    const double t1_measured = first_slip / T;
    const double t1_expected = 0.6154;
    const bool order_ok = phases == std::vector<int>{1, 2, 3};
    const bool t1_ok = std::abs(timing.t1_fraction - t1_expected) <= 0.01 * t1_expected &&
                       std::abs(t1_measured - t1_expected) <= 0.01 * t1_expected;
    const bool pass = order_ok && modes_ok && slip_down == 0 && t1_ok && min_catchup_v < 0.0;
    return {pass, fmt("phase order %s, modes %s, %zu slip-down samples, T1/T %.5f (trajectory %.5f), min catch-up "
                      "v_P %.4f m/s",
                      order_ok ? "stick/-amax/+amax" : "WRONG", modes_ok ? "consistent" : "INCONSISTENT", slip_down,
                      timing.t1_fraction, t1_measured, min_catchup_v)};
}

// v_ave nearly vanishes just inside either end of the band at alpha = 10.
Outcome boundary_zeros() {
    const double alpha = 10.0;
    const double lo = (1.0 / kFric.mu_s) * (1.0 + 1e-3);
    const double hi = f_n_max(alpha, kFric.mu_k) * (1.0 - 1e-3);
    SweepVerification setup;
    bool pass = true;
    std::string detail;
    for (double f : {lo, hi}) {
        const double cf = v_ave_closed_form({f, alpha, kFric.mu_s, kFric.mu_k});
        const SimulationCheck c = simulate_point(alpha, f, kFric, setup);
        pass = pass && std::abs(cf) < 1e-3 && std::abs(c.v_simulated) < 1e-3 && c.converged;
        detail += fmt("f_n=%.6g: closed form %.3e, simulated %.3e; ", f, cf, c.v_simulated);
    }
    return {pass, detail.substr(0, detail.size() - 2)};
}

// No transport without alpha > 2; no arrest of the fall with f_n <= 1/mu_k.
Outcome feasibility_theorems() {
    int checked = 0, passed_any = 0;
    for (double mu_k : {0.2, 0.6, 1.0})
        for (double ratio : {1.0, 1.2, 2.0})
            for (double alpha : linspace(0.05, 2.0, 40))
                for (double f : linspace(0.05, 60.0, 200)) {
                    ++checked;
                    if (feasibility_report({f, alpha, ratio * mu_k, mu_k}).feasible()) ++passed_any;
                }

    // Falling part under a fixed family of bounded drives, from rest.
    const double alpha = 10.0;
    int runs = 0, falling = 0;
    std::string held;
    for (double f : {0.5, 1.0, 1.5, 0.999 / kFric.mu_k}) {
        const auto cfg = TransportConfig::from_nondimensional(f, alpha);
        std::vector<Waveform> drives{sawtooth_waveform(cfg, 0.8, 2.0 * cfg.gravity),
                                     sawtooth_waveform(cfg, 0.5, 5.0 * cfg.gravity),
                                     synthetic::harmonic_drive(1.0 / cfg.period, 5.0 * cfg.gravity)};
        // Defined only above the static hold bound.
        if (kFric.mu_s * f > 1.0) drives.push_back(optimal_waveform(kFric, cfg));
        for (const auto& w : drives) {
            ++runs;
            const Trajectory traj = simulate(w, kFric, cfg, 50, rest_start(w));
            std::vector<double> mean_v;  // per period
            const std::size_t n = traj.samples_per_period;
            for (std::size_t p = 0; p * n + n < traj.size(); ++p) {
                double s = 0.0;
                for (std::size_t i = p * n; i < p * n + n; ++i) s += traj.states[i].v_P;
                mean_v.push_back(s / static_cast<double>(n));
            }
            bool decreasing = mean_v.size() >= 2;
            for (std::size_t k = 1; k < mean_v.size(); ++k) decreasing = decreasing && mean_v[k] < mean_v[k - 1];
            const bool fell = traj.diverged || (decreasing && mean_v.back() < 0.0);
            if (fell) {
                ++falling;
            } else {
                held += fmt(" %s at f_n=%.4g (final period-mean v_P %+.4f m/s, %.0f%% slip-down);", w.id().c_str(), f,
                            mean_v.back(), 100.0 * mode_time_fractions(traj)[2]);
            }
        }
    }
    return {passed_any == 0 && falling == runs,
            fmt("%d/%d parameter sets with alpha <= 2 feasible; %d/%d bounded drives with f_n < 1/mu_k fall without "
                "bound%s",
                passed_any, checked, falling, runs, held.empty() ? "" : ("; not falling:" + held).c_str())};
}

// Vertical run vs the zero-gravity run with the fictitious coefficients.
Outcome horizontal_equivalence() {
    const double f_n = 5.0, alpha = 10.0, g = 9.81;
    const auto vcfg = TransportConfig::from_nondimensional(f_n, alpha, 0.009, 0.05, g);
    const EquivalentCoefficients eq = equivalent_horizontal_coefficients(kFric, f_n);
    const FrictionPair hfric = eq.friction();
    TransportConfig hcfg = vcfg;
    hcfg.gravity = 0.0;
    hcfg.normal_force = vcfg.effective_mass() * g;
    const Waveform w = optimal_waveform(kFric, vcfg);
    SimulationOptions opts;
    const Trajectory v = simulate(w, kFric, vcfg, 10, sticking_start(w), opts);
    const Trajectory h = simulate(w, hfric, hcfg, 10, sticking_start(w), opts);
    // Integration tolerance: event time tolerance times the largest speed
    // change rate scale, (a_max + g) T.
    const double eps_t = vcfg.period / opts.steps_per_period * opts.event_tolerance_fraction;
    const double tol = 10.0 * (vcfg.a_max + g) * vcfg.period * eps_t;
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) worst = std::max(worst, std::abs(v.states[i].z_P - h.states[i].z_P));
    return {v.size() == h.size() && worst <= tol,
            fmt("mu~_s=%.4g mu~_k=%.4g, max |dz_P| %.3e m over %zu samples (tolerance %.3e m)", eq.mu_s_tilde, eq.mu_k_tilde,
                worst, v.size(), tol)};
}

struct Draw {
    double alpha, mu_s, mu_k;
};

std::vector<Draw> feasible_draws(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Draw> out;
    while (static_cast<int>(out.size()) < count) {
        const double mu_k = 0.2 + 0.8 * u(rng);
        const double mu_s = mu_k + 0.5 * u(rng);
        const double alpha = 2.0 + 98.0 * u(rng);
        if ((alpha - 1.0) / mu_k > 1.0 / mu_s) out.push_back({alpha, mu_s, mu_k});
    }
    return out;
}

// Root finder vs a 10^6-point grid argmax over the band.
Outcome optimum_vs_grid() {
    constexpr int kGrid = 1000000;
    int agree = 0;
    double worst = 0.0, worst_half_step = 0.0, worst_over_half_step = 0.0;
    for (const Draw& d : feasible_draws(20, 2024)) {
        const FrictionPair fr{d.mu_s, d.mu_k};
        const OptimalNormalForce root = optimal_f_n(d.alpha, fr);
        const double lo = 1.0 / d.mu_s, hi = f_n_max(d.alpha, d.mu_k);
        double best_v = -1.0, best_f = lo;
        for (int k = 0; k < kGrid; ++k) {
            const double f = lo + (hi - lo) * k / (kGrid - 1.0);
            const double v = v_ave_closed_form({f, d.alpha, d.mu_s, d.mu_k});
            if (v > best_v) {
                best_v = v;
                best_f = f;
            }
        }
        const double rel = std::abs(best_f - root.f_n) / root.f_n;
        const double half_step = 0.5 * (hi - lo) / (kGrid - 1.0);
        if (rel <= 1e-6) ++agree;
        worst = std::max(worst, rel);
        worst_half_step = std::max(worst_half_step, half_step / root.f_n);
        worst_over_half_step = std::max(worst_over_half_step, std::abs(best_f - root.f_n) / half_step);
    }
    return {agree == 20,
            fmt("%d/20 draws agree to 1e-6 relative (worst %.2e); grid half-step reaches %.2e relative, "
                "root-grid gap is at most %.2f half-steps",
                agree, worst, worst_half_step, worst_over_half_step)};
}

// Log-log slope of f_n* against alpha over [10, 100].
Outcome optimum_scaling() {
    const auto alphas = linspace(10.0, 100.0, 10);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(alphas.size());
    for (double a : alphas) {
        const double x = std::log(a), y = std::log(optimal_f_n(a, kFric).f_n);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope >= 1.5 && slope <= 2.5,
            fmt("slope of log f_n* vs log alpha = %.4f (required [1.5, 2.5]; f_n* from %.3f to %.3f)", slope,
                optimal_f_n(10.0, kFric).f_n, optimal_f_n(100.0, kFric).f_n)};
}

// Synthetic fit recovery.
Outcome fitting_recovery() {
    const synthetic::Bundle bundle;
    const auto traces = synthetic::make_traces(bundle);
    FitBounds bounds;
    bounds.mu_k = {0.1, bundle.fixed.mu_s};
    bounds.normal_force.assign(traces.size(), {0.05, 5.0});
    const std::uint64_t seed = 7;
    const auto t0 = std::chrono::steady_clock::now();
    const FitResult r = fit(traces, bounds, bundle.fixed, seed);
    const double secs = seconds_since(t0);
    const FitResult again = fit(traces, bounds, bundle.fixed, seed);
    const bool deterministic =
        io::fit_report_json(r, traces, bundle.fixed, seed).dump() ==
        io::fit_report_json(again, traces, bundle.fixed, seed).dump();

    const double mu_err = std::abs(r.mu_k_fit - bundle.mu_k) / bundle.mu_k;
    double fn_err = 0.0;
    std::string fns;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const double truth = bundle.trials[i].normal_force;
        fn_err = std::max(fn_err, std::abs(r.normal_force_fit[i] - truth) / truth);
        fns += fmt("%.4f/%.2f ", r.normal_force_fit[i], truth);
    }
    return {mu_err <= 0.05 && fn_err <= 0.10 && deterministic && secs < 120.0,
            fmt("mu_k %.4f (error %.2f%%), F_n fit/truth %s(worst %.2f%%), mean position error %.3g mm, "
                "deterministic %s, %.2f s",
                r.mu_k_fit, 100 * mu_err, fns.c_str(), 100 * fn_err, 1e3 * r.mean_error(),
                deterministic ? "yes" : "NO", secs)};
}

// dt halving on the criterion-2 run.
Outcome integrator_convergence() {
    const Trajectory coarse = reference_run(2000);
    const Trajectory fine = reference_run(4000);
    const double a = coarse.states.back().z_P, b = fine.states.back().z_P;
    const double rel = std::abs(a - b) / std::abs(b);
    return {rel < 1e-3, fmt("final z_P %.9g m vs %.9g m, relative change %.2e", a, b, rel)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::pair<std::string, std::function<Outcome()>>>> criteria{
        {"1", {"closed-form cross-validation", closed_form_cross_validation}},
        {"2", {"optimal trajectory shape", optimal_trajectory_shape}},
        {"3", {"boundary zeros", boundary_zeros}},
        {"4", {"feasibility theorems", feasibility_theorems}},
        {"5", {"horizontal equivalence", horizontal_equivalence}},
        {"6a", {"optimal f_n vs grid argmax", optimum_vs_grid}},
        {"6b", {"optimal f_n scaling", optimum_scaling}},
        {"7", {"fitting recovery", fitting_recovery}},
        {"8", {"integrator convergence", integrator_convergence}},
    };
    const std::string only = argc > 1 ? argv[1] : "";
    bool all_pass = true, ran = false;
    for (const auto& [id, entry] : criteria) {
        if (!only.empty() && only != id) continue;
        ran = true;
        Outcome o;
        try {
            o = entry.second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("%s criterion %s (%s): %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), entry.first.c_str(),
                    o.detail.c_str());
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    if (!ran) {
        std::fprintf(stderr, "unknown criterion '%s'\n", only.c_str());
        return 2;
    }
    return all_pass ? 0 : 1;
}
