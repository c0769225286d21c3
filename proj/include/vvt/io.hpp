#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "vvt/analysis.hpp"
#include "vvt/detail/text.hpp"
#include "vvt/dynamics.hpp"
#include "vvt/errors.hpp"
#include "vvt/fitting.hpp"
#include "vvt/waveform.hpp"

namespace vvt::io {

using json = nlohmann::ordered_json;
using detail::format_double;

// ---------------------------------------------------------------------------
// Trajectories

inline constexpr const char* kTrajectoryHeader = "t,z_S,v_S,a_S,z_P,v_P,mode";

/// One row per sample: t, z_S, v_S, a_S, z_P, v_P, mode (SI units).
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << kTrajectoryHeader << '\n';
    for (std::size_t i = 0; i < traj.size(); ++i) {
        const SystemState& s = traj.states[i];
        out << format_double(s.t) << ',' << format_double(s.z_S) << ',' << format_double(s.v_S) << ','
            << format_double(traj.surface_accel[i]) << ',' << format_double(s.z_P) << ',' << format_double(s.v_P)
            << ',' << to_string(s.mode) << '\n';
    }
}

/// Reads a trajectory export back (states and surface accelerations only).
[[nodiscard]] inline Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kTrajectoryHeader)
        throw ValidationError(std::string("trajectory file must start with header '") + kTrajectoryHeader + "'");
    Trajectory traj;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, ',');
        if (f.size() != 7) throw ValidationError("trajectory line " + std::to_string(line_no) + ": expected 7 fields");
        double v[6];
        for (int c = 0; c < 6; ++c) {
            const auto x = detail::parse_double(f[c]);
            if (!x) throw ValidationError("trajectory line " + std::to_string(line_no) + ": bad number");
            v[c] = *x;
        }
        traj.states.push_back({v[0], v[1], v[2], v[4], v[5], parse_contact_mode(f[6])});
        traj.surface_accel.push_back(v[3]);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Waveforms

[[nodiscard]] inline json waveform_to_json(const Waveform& w) {
    json segs = json::array();
    for (const auto& s : w.segments()) segs.push_back({{"duration", s.duration}, {"acceleration", s.acceleration}});
    return {{"id", w.id()}, {"period", w.period()}, {"segments", segs}};
}

[[nodiscard]] inline Waveform waveform_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("waveform JSON must be an object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (it.key() != "id" && it.key() != "period" && it.key() != "segments")
            throw ValidationError("waveform JSON: unknown key '" + it.key() + "'");
    if (!j.contains("period") || !j["period"].is_number()) throw ValidationError("waveform JSON: missing numeric 'period'");
    if (!j.contains("segments") || !j["segments"].is_array()) throw ValidationError("waveform JSON: missing 'segments' array");
    std::vector<Waveform::Segment> segs;
    for (const auto& s : j["segments"]) {
        if (!s.is_object() || !s.contains("duration") || !s.contains("acceleration") || !s["duration"].is_number() ||
            !s["acceleration"].is_number())
            throw ValidationError("waveform JSON: each segment needs numeric 'duration' and 'acceleration'");
        segs.push_back({s["duration"].get<double>(), s["acceleration"].get<double>()});
    }
    const std::string id = j.contains("id") && j["id"].is_string() ? j["id"].get<std::string>() : "custom";
    return Waveform(j["period"].get<double>(), std::move(segs), id);
}

inline void write_waveform_json(std::ostream& out, const Waveform& w) { out << waveform_to_json(w).dump(2) << '\n'; }

[[nodiscard]] inline Waveform read_waveform_json(std::istream& in) {
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("waveform JSON parse error: ") + e.what());
    }
    return waveform_from_json(j);
}

/// Sampled acceleration with header `t,a`; samples must be uniform and cover
/// one period starting at t = 0, so T = N dt.
[[nodiscard]] inline Waveform read_sampled_waveform_csv(std::istream& in, const SampledWaveformOptions& opts = {}) {
    std::string line;
    std::vector<double> t, a;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto text = detail::trim(line);
        if (text.empty() || text.front() == '#') continue;
        const auto f = detail::split(text, ',');
        if (!header) {
            if (f.size() != 2 || f[0] != "t" || f[1] != "a")
                throw ValidationError("sampled waveform: missing header 't,a'");
            header = true;
            continue;
        }
        if (f.size() != 2) throw ValidationError("sampled waveform line " + std::to_string(line_no) + ": expected 2 fields");
        const auto tv = detail::parse_double(f[0]);
        const auto av = detail::parse_double(f[1]);
        if (!tv || !av || !std::isfinite(*tv) || !std::isfinite(*av))
            throw ValidationError("sampled waveform line " + std::to_string(line_no) + ": bad number");
        t.push_back(*tv);
        a.push_back(*av);
    }
    if (!header) throw ValidationError("sampled waveform: missing header 't,a'");
    if (t.size() < 2) throw ValidationError("sampled waveform: need at least 2 samples");
    const double dt = t[1] - t[0];
    if (!(dt > 0.0)) throw ValidationError("sampled waveform: times must increase");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-6 * dt)
            throw ValidationError("sampled waveform: non-uniform sampling at row " + std::to_string(i));
    return sampled_waveform(a, dt * static_cast<double>(a.size()), opts);
}

/// Loads a waveform from `.json` (segments) or any other extension (sampled
/// `t,a` text).
[[nodiscard]] inline Waveform load_waveform(const std::string& path, const SampledWaveformOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open waveform file '" + path + "'");
    if (path.size() >= 5 && path.substr(path.size() - 5) == ".json") return read_waveform_json(in);
    return read_sampled_waveform_csv(in, opts);
}

// ---------------------------------------------------------------------------
// Sweeps

inline void write_sweep_csv(std::ostream& out, const SweepResult& r) {
    out << "alpha,f_n,v_norm,feasible\n";
    for (const auto& row : r.rows)
        out << format_double(row.alpha) << ',' << format_double(row.f_n) << ',' << format_double(row.v_norm) << ','
            << (row.feasible ? 1 : 0) << '\n';
}

inline void write_sweep_optima_csv(std::ostream& out, const SweepResult& r) {
    out << "alpha,f_n_star,v_star,grid_f_n,grid_v,band_empty\n";
    for (const auto& o : r.optima)
        out << format_double(o.alpha) << ',' << format_double(o.f_n_star) << ',' << format_double(o.v_star) << ','
            << format_double(o.grid_f_n) << ',' << format_double(o.grid_v) << ',' << (o.band_empty ? 1 : 0) << '\n';
}

[[nodiscard]] inline json sweep_summary_json(const SweepResult& r) {
    json optima = json::array();
    for (const auto& o : r.optima) {
        json item = {{"alpha", o.alpha}, {"band_empty", o.band_empty}};
        if (!o.band_empty) {
            item["f_n_min"] = 1.0 / r.friction.mu_s;
            item["f_n_max"] = f_n_max(o.alpha, r.friction.mu_k);
            item["f_n_star"] = o.f_n_star;
            item["v_star"] = o.v_star;
        }
        item["grid_f_n"] = o.grid_f_n;
        item["grid_v"] = o.grid_v;
        optima.push_back(item);
    }
    json checks = json::array();
    for (const auto& c : r.checks)
        checks.push_back({{"alpha", c.alpha},
                          {"f_n", c.f_n},
                          {"v_closed_form", c.v_closed_form},
                          {"v_simulated", c.v_simulated},
                          {"relative_error", c.relative_error},
                          {"converged", c.converged}});
    json out = {{"mu_s", r.friction.mu_s}, {"mu_k", r.friction.mu_k}, {"optima", optima}};
    if (!r.checks.empty()) out["simulation_checks"] = checks;
    return out;
}

// ---------------------------------------------------------------------------
// Reports

[[nodiscard]] inline json feasibility_json(const FeasibilityReport& r) {
    json bounds = json::array();
    for (const auto& b : r.bounds)
        bounds.push_back({{"name", b.name},
                          {"condition", b.condition},
                          {"value", b.value},
                          {"limit", b.limit},
                          {"satisfied", b.satisfied}});
    return {{"f_n", r.point.f_n},
            {"alpha", r.point.alpha},
            {"mu_s", r.point.mu_s},
            {"mu_k", r.point.mu_k},
            {"feasible", r.feasible()},
            {"violated", r.violated()},
            {"bounds", bounds}};
}

[[nodiscard]] inline json fit_report_json(const FitResult& r, const std::vector<ExperimentTrace>& traces,
                                          const FixedParameters& fixed, std::uint64_t seed) {
    json trials = json::array();
    for (std::size_t i = 0; i < r.normal_force_fit.size(); ++i) {
        json t = {{"trace", i < traces.size() ? traces[i].name : std::string()},
                  {"normal_force_fit", r.normal_force_fit[i]},
                  {"mean_position_error", r.trial_error[i]},
                  {"normalized_error", r.normalized_error[i]}};
        if (i < traces.size() && traces[i].metadata.measured_normal_force)
            t["measured_normal_force"] = *traces[i].metadata.measured_normal_force;
        trials.push_back(t);
    }
    const auto& d = r.diagnostics;
    return {{"seed", seed},
            {"fixed", {{"mu_s", fixed.mu_s}, {"part_mass", fixed.part_mass}, {"gravity", fixed.gravity},
                       {"dual_surface", fixed.dual_surface}}},
            {"mu_k_fit", r.mu_k_fit},
            {"total_cost", r.total_cost},
            {"mean_position_error", r.mean_error()},
            {"mean_normalized_error", r.mean_normalized_error()},
            {"trials", trials},
            {"diagnostics",
             {{"iterations", d.iterations},
              {"evaluations", d.evaluations},
              {"stalled", d.stalled},
              {"restart_mu_k", d.restart_mu_k},
              {"restart_cost", d.restart_cost},
              {"mu_k_spread", d.mu_k_spread},
              {"mu_k_profile_change", d.mu_k_profile_change},
              {"flat_mu_k", d.flat_mu_k},
              {"best_cost_history", d.best_cost_history}}}};
}

}  // namespace vvt::io
