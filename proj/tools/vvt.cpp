// vvt: command-line front end for the vertical vibratory transport toolkit.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vvt/vvt.hpp"

namespace {

using vvt::io::json;

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

struct Physical {
    double mu_s = 0.7;
    double mu_k = 0.6;
    std::optional<double> f_n;
    std::optional<double> alpha;
    std::optional<double> normal_force;
    std::optional<double> a_max;
    double period = 0.05;
    double mass = 0.009;
    double gravity = vvt::kStandardGravity;
    bool dual_surface = false;

    [[nodiscard]] vvt::FrictionPair friction() const {
        vvt::FrictionPair f{mu_s, mu_k};
        f.validate();
        return f;
    }

    // Nondimensional and SI inputs are interchangeable; SI wins when both are
    // given for the same quantity.
    [[nodiscard]] vvt::TransportConfig config(std::optional<double> fallback_a_max = {}) const {
        vvt::TransportConfig cfg;
        cfg.part_mass = mass;
        cfg.period = period;
        cfg.gravity = gravity;
        cfg.dual_surface = dual_surface;
        if (normal_force) cfg.normal_force = *normal_force;
        else if (f_n) cfg.normal_force = *f_n * cfg.effective_mass() * gravity;
        else throw vvt::ValidationError("normal force required: pass --fn or --normal-force");
        if (a_max) cfg.a_max = *a_max;
        else if (alpha) cfg.a_max = *alpha * gravity;
        else if (fallback_a_max) cfg.a_max = *fallback_a_max;
        else throw vvt::ValidationError("peak acceleration required: pass --alpha or --amax");
        cfg.validate();
        return cfg;
    }

    [[nodiscard]] vvt::NondimensionalPoint point() const {
        const vvt::TransportConfig cfg = config();
        if (!(cfg.gravity > 0.0)) throw vvt::ValidationError("nondimensional analysis needs gravity > 0");
        return {cfg.normal_force_ratio(), cfg.alpha(), mu_s, mu_k};
    }
};

void add_friction(CLI::App* cmd, Physical& p) {
    cmd->add_option("--mus", p.mu_s, "static friction coefficient")->capture_default_str();
    cmd->add_option("--muk", p.mu_k, "kinetic friction coefficient")->capture_default_str();
}

void add_physical(CLI::App* cmd, Physical& p) {
    add_friction(cmd, p);
    cmd->add_option("--fn", p.f_n, "normal force per part weight");
    cmd->add_option("--alpha", p.alpha, "peak surface acceleration in g");
    cmd->add_option("--normal-force", p.normal_force, "normal force (N), overrides --fn");
    cmd->add_option("--amax", p.a_max, "peak surface acceleration (m/s^2), overrides --alpha");
    cmd->add_option("--period", p.period, "drive period (s)")->capture_default_str();
    cmd->add_option("--mass", p.mass, "part mass (kg)")->capture_default_str();
    cmd->add_option("--gravity", p.gravity, "gravitational acceleration (m/s^2)")->capture_default_str();
    cmd->add_flag("--dual-surface", p.dual_surface, "part squeezed between two driven surfaces");
}

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    for (auto field : vvt::detail::split(text, ',')) {
        const auto v = vvt::detail::parse_double(vvt::detail::trim(field));
        if (!v) throw vvt::ValidationError(std::string("malformed ") + what + " list: '" + text + "'");
        out.push_back(*v);
    }
    if (out.empty()) throw vvt::ValidationError(std::string("empty ") + what + " list");
    return out;
}

vvt::Interval parse_interval(const std::string& text, const char* what) {
    const auto v = parse_list(text, what);
    if (v.size() != 2 || !(v[0] < v[1]))
        throw vvt::ValidationError(std::string(what) + " must be 'lo,hi' with lo < hi");
    return {v[0], v[1]};
}

// Writes to the named file, or stdout for "" and "-".
template <class Fn>
void emit(const std::string& path, Fn&& write) {
    if (path.empty() || path == "-") {
        write(std::cout);
        std::cout.flush();
        return;
    }
    std::ofstream out(path);
    if (!out) throw vvt::RuntimeFailure("cannot open output file '" + path + "'");
    write(out);
    if (!out) throw vvt::RuntimeFailure("write failed for '" + path + "'");
}

void print_record(std::ostream& os, const json& j, const std::string& format) {
    if (format == "json") {
        os << j.dump(2) << '\n';
        return;
    }
    os << "key,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it->is_structured()) continue;
        os << it.key() << ',';
        if (it->is_number_float()) os << vvt::detail::format_double(it->get<double>());
        else if (it->is_string()) os << it->get<std::string>();
        else os << it->dump();
        os << '\n';
    }
}

// ---------------------------------------------------------------------------

struct SimulateArgs {
    Physical phys;
    std::string waveform = "optimal";
    int periods = 20;
    int steps = 2000;
    double up_fraction = 0.8;
    std::optional<double> up_accel;
    std::string start = "stick";
    std::string out;
    std::string format = "csv";
};

int run_simulate(const SimulateArgs& a) {
    const vvt::FrictionPair fric = a.phys.friction();
    std::optional<vvt::Waveform> w;
    if (a.waveform != "optimal" && a.waveform != "sawtooth") w = vvt::io::load_waveform(a.waveform);
    // A waveform file carries its own period and, unless overridden, its own
    // peak acceleration.
    vvt::TransportConfig cfg =
        w ? a.phys.config(std::max(w->peak_acceleration(), 1e-9)) : a.phys.config();
    if (w) {
        cfg.period = w->period();
    } else if (a.waveform == "optimal") {
        w = vvt::optimal_waveform(fric, cfg);
    } else if (a.waveform == "sawtooth") {
        // Default rise: 90% of the static-cone limit, capped so the return
        // stroke stays within a_max.
        double up = a.up_accel.value_or(std::min(0.9 * (fric.mu_s * cfg.normal_force / cfg.effective_mass() - cfg.gravity),
                                                 cfg.a_max * (1.0 - a.up_fraction) / a.up_fraction));
        w = vvt::sawtooth_waveform(cfg, a.up_fraction, up);
    }

    vvt::SystemState start;
    if (a.start == "stick") start = vvt::sticking_start(*w);
    else if (a.start == "rest") start = vvt::rest_start(*w);
    else throw vvt::ValidationError("--start must be 'stick' or 'rest'");

    vvt::SimulationOptions opts;
    opts.steps_per_period = a.steps;
    const vvt::Trajectory traj = vvt::simulate(*w, fric, cfg, a.periods, start, opts);
    if (!a.out.empty()) emit(a.out, [&](std::ostream& os) { vvt::io::write_trajectory_csv(os, traj); });

    json summary;
    summary["waveform"] = w->id();
    summary["periods"] = a.periods;
    summary["diverged"] = traj.diverged;
    const auto frac = vvt::mode_time_fractions(traj);
    if (traj.diverged) {
        summary["diagnostic"] = traj.diagnostic;
    } else if (const vvt::SteadyStateOptions so; a.periods < so.min_warmup_periods + so.consecutive_periods) {
        summary["converged"] = false;
        summary["diagnostic"] = "steady state needs at least " +
                                std::to_string(so.min_warmup_periods + so.consecutive_periods) + " periods";
    } else {
        const vvt::SteadyStateReport ss = vvt::steady_state(traj);
        summary["converged"] = ss.converged;
        summary["v_ave"] = ss.velocity;
        if (cfg.gravity > 0.0) summary["v_norm"] = ss.velocity / (cfg.gravity * cfg.period);
        if (!ss.converged) summary["diagnostic"] = ss.diagnostic;
    }
    summary["frac_sticking"] = frac[0];
    summary["frac_slipping_up"] = frac[1];
    summary["frac_slipping_down"] = frac[2];
    summary["min_part_velocity"] = [&] {
        double m = traj.states.front().v_P;
        for (const auto& s : traj.states) m = std::min(m, s.v_P);
        return m;
    }();
    print_record(std::cout, summary, a.format);
    if (traj.diverged) throw vvt::RuntimeFailure("simulation diverged: " + traj.diagnostic);
    return 0;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
    Physical phys;
    std::string alphas = "5,10,15,20,30,40";
    double fn_min = 1.0;
    double fn_max = 40.0;
    int fn_points = 400;
    int verify_sim = 0;
    std::uint64_t seed = 1;
    std::string out;
    std::string summary;
    std::string format = "json";
};

int run_sweep(const SweepArgs& a) {
    const vvt::FrictionPair fric = a.phys.friction();
    if (a.fn_points < 1) throw vvt::ValidationError("--fn-points must be >= 1");
    if (a.verify_sim < 0) throw vvt::ValidationError("--verify-sim must be >= 0");
    const auto alphas = parse_list(a.alphas, "alpha");
    const auto grid = vvt::linspace(a.fn_min, a.fn_max, static_cast<std::size_t>(a.fn_points));
    vvt::SweepVerification verify;
    verify.points = a.verify_sim;
    verify.seed = a.seed;
    verify.period = a.phys.period;
    verify.mass = a.phys.mass;
    verify.gravity = a.phys.gravity;
    const vvt::SweepResult r = vvt::sweep(fric, alphas, grid, verify);

    emit(a.out, [&](std::ostream& os) { vvt::io::write_sweep_csv(os, r); });
    if (!a.summary.empty() || a.verify_sim > 0) {
        const std::string target = a.summary.empty() ? std::string("-") : a.summary;
        if (target == "-" && (a.out.empty() || a.out == "-")) std::cout << '\n';
        emit(target, [&](std::ostream& os) {
            if (a.format == "json") os << vvt::io::sweep_summary_json(r).dump(2) << '\n';
            else vvt::io::write_sweep_optima_csv(os, r);
        });
    }
    for (const auto& c : r.checks)
        if (c.relative_error > 0.01 || !c.converged) {
            std::cerr << "verify-sim: alpha=" << c.alpha << " f_n=" << c.f_n << " relative error " << c.relative_error
                      << (c.converged ? "" : " (not converged)") << '\n';
            return kExitRuntime;
        }
    return 0;
}

// ---------------------------------------------------------------------------

struct OptimalArgs {
    Physical phys;
    std::string alphas;
    std::string out;
    std::string format = "json";
};

int run_optimal(const OptimalArgs& a) {
    const vvt::FrictionPair fric = a.phys.friction();
    std::vector<double> alphas;
    if (!a.alphas.empty()) alphas = parse_list(a.alphas, "alpha");
    else if (a.phys.alpha) alphas = {*a.phys.alpha};
    else throw vvt::ValidationError("optimal-fn needs --alpha or --alphas");
    json rows = json::array();
    for (double alpha : alphas) {
        const auto best = vvt::optimal_f_n(alpha, fric);
        rows.push_back({{"alpha", alpha},
                        {"f_n_min", 1.0 / fric.mu_s},
                        {"f_n_max", vvt::f_n_max(alpha, fric.mu_k)},
                        {"f_n_star", best.f_n},
                        {"v_star", best.v_norm}});
    }
    emit(a.out, [&](std::ostream& os) {
        if (a.format == "json") {
            os << (rows.size() == 1 ? rows[0] : rows).dump(2) << '\n';
            return;
        }
        os << "alpha,f_n_min,f_n_max,f_n_star,v_star\n";
        for (const auto& r : rows)
            os << vvt::detail::format_double(r["alpha"]) << ',' << vvt::detail::format_double(r["f_n_min"]) << ','
               << vvt::detail::format_double(r["f_n_max"]) << ',' << vvt::detail::format_double(r["f_n_star"]) << ','
               << vvt::detail::format_double(r["v_star"]) << '\n';
    });
    return 0;
}

// ---------------------------------------------------------------------------

struct FeasibilityArgs {
    Physical phys;
    std::string out;
    std::string format = "json";
};

int run_feasibility(const FeasibilityArgs& a) {
    const auto report = vvt::feasibility_report(a.phys.point());
    emit(a.out, [&](std::ostream& os) {
        if (a.format == "json") {
            os << vvt::io::feasibility_json(report).dump(2) << '\n';
            return;
        }
        os << "name,condition,value,limit,satisfied\n";
        for (const auto& b : report.bounds)
            os << b.name << ',' << b.condition << ',' << vvt::detail::format_double(b.value) << ','
               << vvt::detail::format_double(b.limit) << ',' << (b.satisfied ? 1 : 0) << '\n';
    });
    return 0;
}

// ---------------------------------------------------------------------------

struct FitArgs {
    std::vector<std::string> traces;
    double mu_s = 0.72;
    double mass = 0.009;
    double gravity = vvt::kStandardGravity;
    bool dual_surface = false;
    std::string muk_range = "0.1,0.72";
    std::string fn_range = "0.05,5";
    std::string units;
    std::uint64_t seed = 1;
    int restarts = 8;
    int particles = 60;
    int iterations = 200;
    int threads = 1;
    std::string out;
};

int run_fit(const FitArgs& a) {
    if (a.traces.empty()) throw vvt::ValidationError("fit: at least one trace file is required");
    vvt::TraceFormat format;
    if (!a.units.empty()) format.units = a.units;
    std::vector<vvt::ExperimentTrace> traces;
    for (const auto& path : a.traces) traces.push_back(vvt::load_trace(path, format));

    vvt::FixedParameters fixed{a.mu_s, a.mass, a.gravity, a.dual_surface};
    vvt::FitBounds bounds;
    bounds.mu_k = parse_interval(a.muk_range, "--muk-range");
    bounds.normal_force.assign(traces.size(), parse_interval(a.fn_range, "--fn-range"));
    vvt::FitOptions opts;
    opts.restarts = a.restarts;
    opts.swarm.particles = a.particles;
    opts.swarm.max_iterations = a.iterations;
    opts.swarm.threads = a.threads;
    const vvt::FitResult r = vvt::fit(traces, bounds, fixed, a.seed, opts);
    emit(a.out, [&](std::ostream& os) { os << vvt::io::fit_report_json(r, traces, fixed, a.seed).dump(2) << '\n'; });
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vertical vibratory transport: simulate, sweep, optimize, check feasibility, fit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "TOML/INI file with option values; command-line flags win");
    app.allow_config_extras(CLI::config_extras_mode::error);

    const auto formats = CLI::IsMember({"csv", "json"});

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "integrate the part under a periodic surface waveform");
    add_physical(c_sim, sim.phys);
    c_sim->add_option("--waveform", sim.waveform, "optimal | sawtooth | path to .json segments or t,a samples")
        ->capture_default_str();
    c_sim->add_option("--periods", sim.periods, "periods to integrate")->capture_default_str();
    c_sim->add_option("--steps", sim.steps, "output steps per period")->capture_default_str();
    c_sim->add_option("--up-fraction", sim.up_fraction, "sawtooth rising fraction of the period")->capture_default_str();
    c_sim->add_option("--up-accel", sim.up_accel, "sawtooth rising acceleration (m/s^2)");
    c_sim->add_option("--start", sim.start, "initial contact: stick | rest")->capture_default_str();
    c_sim->add_option("--out", sim.out, "trajectory CSV path");
    c_sim->add_option("--format", sim.format, "summary format")->check(formats)->capture_default_str();

    SweepArgs sw;
    auto* c_sweep = app.add_subcommand("sweep", "tabulate normalized velocity over (alpha, f_n)");
    add_friction(c_sweep, sw.phys);
    c_sweep->add_option("--period", sw.phys.period, "drive period for --verify-sim (s)")->capture_default_str();
    c_sweep->add_option("--mass", sw.phys.mass, "part mass for --verify-sim (kg)")->capture_default_str();
    c_sweep->add_option("--gravity", sw.phys.gravity, "gravity for --verify-sim (m/s^2)")->capture_default_str();
    c_sweep->add_option("--alphas", sw.alphas, "comma-separated alpha values")->capture_default_str();
    c_sweep->add_option("--fn-min", sw.fn_min)->capture_default_str();
    c_sweep->add_option("--fn-max", sw.fn_max)->capture_default_str();
    c_sweep->add_option("--fn-points", sw.fn_points)->capture_default_str();
    c_sweep->add_option("--verify-sim", sw.verify_sim, "grid points to cross-check by simulation")->capture_default_str();
    c_sweep->add_option("--seed", sw.seed, "seed for --verify-sim point selection")->capture_default_str();
    c_sweep->add_option("--out", sw.out, "sweep table CSV path (default stdout)");
    c_sweep->add_option("--summary", sw.summary, "per-alpha optimum summary path");
    c_sweep->add_option("--format", sw.format, "summary format")->check(formats)->capture_default_str();

    OptimalArgs opt;
    auto* c_opt = app.add_subcommand("optimal-fn", "normal force maximizing transport velocity");
    add_friction(c_opt, opt.phys);
    c_opt->add_option("--alpha", opt.phys.alpha, "peak surface acceleration in g");
    c_opt->add_option("--alphas", opt.alphas, "comma-separated alpha values");
    c_opt->add_option("--out", opt.out);
    c_opt->add_option("--format", opt.format)->check(formats)->capture_default_str();

    FeasibilityArgs fea;
    auto* c_fea = app.add_subcommand("feasibility", "check an operating point against every transport bound");
    add_physical(c_fea, fea.phys);
    c_fea->add_option("--out", fea.out);
    c_fea->add_option("--format", fea.format)->check(formats)->capture_default_str();

    FitArgs fit;
    auto* c_fit = app.add_subcommand("fit", "estimate mu_k and per-trial normal forces from traces");
    c_fit->add_option("traces", fit.traces, "trace files");
    c_fit->add_option("--mus", fit.mu_s, "fixed static friction coefficient")->capture_default_str();
    c_fit->add_option("--mass", fit.mass)->capture_default_str();
    c_fit->add_option("--gravity", fit.gravity)->capture_default_str();
    c_fit->add_flag("--dual-surface", fit.dual_surface);
    c_fit->add_option("--muk-range", fit.muk_range, "search interval lo,hi")->capture_default_str();
    c_fit->add_option("--fn-range", fit.fn_range, "normal-force search interval lo,hi (N)")->capture_default_str();
    c_fit->add_option("--units", fit.units, "position units when the file does not say: m | mm");
    c_fit->add_option("--seed", fit.seed)->capture_default_str();
    c_fit->add_option("--restarts", fit.restarts)->capture_default_str();
    c_fit->add_option("--particles", fit.particles)->capture_default_str();
    c_fit->add_option("--iterations", fit.iterations)->capture_default_str();
    c_fit->add_option("--threads", fit.threads)->capture_default_str();
    c_fit->add_option("--out", fit.out, "fit report JSON path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*c_sim) return run_simulate(sim);
        if (*c_sweep) return run_sweep(sw);
        if (*c_opt) return run_optimal(opt);
        if (*c_fea) return run_feasibility(fea);
        if (*c_fit) return run_fit(fit);
    } catch (const vvt::ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitValidation;
}
