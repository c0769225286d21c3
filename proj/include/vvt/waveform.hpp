#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "vvt/errors.hpp"
#include "vvt/params.hpp"

namespace vvt {

/// Constant-acceleration stretch of a surface drive, in absolute time.
struct DrivePiece {
    double acceleration;
    double start;
    double end;
};

/// Periodic, piecewise-constant surface acceleration.
///
/// Velocity and position are obtained by integrating the segments exactly.
/// The velocity constant is chosen so that velocity has zero mean over a
/// period, and position starts at zero; with zero net impulse this makes
/// both velocity and position T-periodic. Segments are right-open, so at a
/// boundary the acceleration of the following segment applies.
class Waveform {
  public:
    struct Segment {
        double duration;
        double acceleration;
    };

    /// Relative tolerance on the velocity closure sum(a_i d_i) against
    /// peak |a| * T.
    static constexpr double kClosureTolerance = 1e-9;

    Waveform(double period, std::vector<Segment> segments, std::string id = "custom")
        : period_(period), segments_(std::move(segments)), id_(std::move(id)) {
        if (!std::isfinite(period_) || !(period_ > 0.0))
            throw ValidationError("waveform period must be finite and > 0");
        if (segments_.empty()) throw ValidationError("waveform needs at least one segment");
        double total = 0.0;
        for (const auto& s : segments_) {
            if (!std::isfinite(s.duration) || !std::isfinite(s.acceleration))
                throw ValidationError("waveform segment values must be finite");
            if (!(s.duration > 0.0)) throw ValidationError("waveform segment durations must be > 0");
            total += s.duration;
        }
        if (std::abs(total - period_) > 1e-9 * period_) {
            std::ostringstream os;
            os << "waveform segment durations sum to " << total << " s, period is " << period_ << " s";
            throw ValidationError(os.str());
        }
        // Absorb summation round-off into the last segment.
        segments_.back().duration += period_ - total;

        double impulse = 0.0;
        for (const auto& s : segments_) impulse += s.acceleration * s.duration;
        const double scale = peak_acceleration() * period_;
        if (std::abs(impulse) > kClosureTolerance * scale + 1e-300) {
            std::ostringstream os;
            os << "waveform velocity does not close over a period: net velocity change " << impulse
               << " m/s";
            throw ValidationError(os.str());
        }
        integrate();
    }

    [[nodiscard]] double period() const { return period_; }
    [[nodiscard]] const std::vector<Segment>& segments() const { return segments_; }
    [[nodiscard]] const std::string& id() const { return id_; }

    [[nodiscard]] double peak_acceleration() const {
        double peak = 0.0;
        for (const auto& s : segments_) peak = std::max(peak, std::abs(s.acceleration));
        return peak;
    }

    /// Start of each segment within [0, T).
    [[nodiscard]] const std::vector<double>& segment_starts() const { return starts_; }

    /// Segment active just after time t, with absolute start and end times.
    [[nodiscard]] DrivePiece piece_at(double t) const {
        auto [cycle, index] = locate(t);
        const double base = cycle * period_;
        return {segments_[index].acceleration, base + starts_[index],
                base + starts_[index] + segments_[index].duration};
    }

    [[nodiscard]] double acceleration(double t) const { return piece_at(t).acceleration; }

    [[nodiscard]] double velocity(double t) const {
        auto [cycle, index] = locate(t);
        const double u = t - cycle * period_ - starts_[index];
        return v_start_[index] + segments_[index].acceleration * u;
    }

    [[nodiscard]] double position(double t) const {
        auto [cycle, index] = locate(t);
        const double u = t - cycle * period_ - starts_[index];
        const double a = segments_[index].acceleration;
        return z_start_[index] + v_start_[index] * u + 0.5 * a * u * u;
    }

    /// Net velocity change over one period from the stored segments.
    [[nodiscard]] double velocity_closure() const {
        double impulse = 0.0;
        for (const auto& s : segments_) impulse += s.acceleration * s.duration;
        return impulse;
    }

    /// Position change over one period from the exact integrals.
    [[nodiscard]] double position_closure() const {
        const auto& s = segments_.back();
        const double end = z_start_.back() + v_start_.back() * s.duration +
                           0.5 * s.acceleration * s.duration * s.duration;
        return end - z_start_.front();
    }

    /// Throws if any segment exceeds the actuator limit of `cfg` or the
    /// period disagrees with it.
    void check_against(const TransportConfig& cfg) const {
        if (std::abs(period_ - cfg.period) > 1e-9 * cfg.period) {
            std::ostringstream os;
            os << "waveform period " << period_ << " s does not match configured period " << cfg.period
               << " s";
            throw ValidationError(os.str());
        }
        const double peak = peak_acceleration();
        if (peak > cfg.a_max * (1.0 + 1e-9)) {
            std::ostringstream os;
            os << "waveform peak acceleration " << peak << " m/s^2 exceeds a_max " << cfg.a_max
               << " m/s^2";
            throw ValidationError(os.str());
        }
    }

  private:
    std::pair<double, std::size_t> locate(double t) const {
        double cycle = std::floor(t / period_);
        double tau = t - cycle * period_;
        if (tau >= period_) {
            cycle += 1.0;
            tau -= period_;
        }
        if (tau < 0.0) tau = 0.0;
        // Index of the last start <= tau.
        auto it = std::upper_bound(starts_.begin(), starts_.end(), tau);
        std::size_t index = static_cast<std::size_t>(std::distance(starts_.begin(), it)) - 1;
        // Within round-off of the next boundary the next segment applies.
        const double eps = 1e-12 * period_;
        const double end = starts_[index] + segments_[index].duration;
        if (end - tau <= eps) {
            ++index;
            if (index == segments_.size()) {
                index = 0;
                cycle += 1.0;
            }
        }
        return {cycle, index};
    }

    void integrate() {
        const std::size_t n = segments_.size();
        starts_.assign(n, 0.0);
        v_start_.assign(n, 0.0);
        z_start_.assign(n, 0.0);
        // Velocity relative to v(0) = 0, then shift to zero mean.
        double t = 0.0;
        double v = 0.0;
        double mean_num = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = segments_[i];
            starts_[i] = t;
            v_start_[i] = v;
            mean_num += v * s.duration + 0.5 * s.acceleration * s.duration * s.duration;
            v += s.acceleration * s.duration;
            t += s.duration;
        }
        const double v0 = -mean_num / period_;
        double z = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = segments_[i];
            v_start_[i] += v0;
            z_start_[i] = z;
            z += v_start_[i] * s.duration + 0.5 * s.acceleration * s.duration * s.duration;
        }
    }

    double period_;
    std::vector<Segment> segments_;
    std::string id_;
    std::vector<double> starts_;
    std::vector<double> v_start_;
    std::vector<double> z_start_;
};

/// Switching times of the optimal upward waveform, as fractions of T.
struct OptimalTiming {
    double t1_fraction;
    double t2_fraction;
    double phase1_acceleration;  // m/s^2
};

struct OptimalWaveformOptions {
    /// Scales the sticking-phase acceleration below the static limit to
    /// relax the timing of the end-of-period catch-up. Must lie in (0, 1].
    double phase1_scale = 1.0;
};

/// Switching times and sticking-phase acceleration of the three-phase
/// optimum: stick-up at the static limit, slip-down at -a_max, catch-up at
/// +a_max.
///
/// The sticking phase runs at (mu_s f_n - 1) g. With the switching times
///   T1 = T (mu_k f_n + 1) / ((mu_s + mu_k) f_n)
///   T2 = T1 + T (alpha + mu_k f_n + 1)(mu_s f_n - 1) / (2 alpha (mu_s + mu_k) f_n)
/// that is the only phase-1 value for which the surface velocity closes over
/// the period.
[[nodiscard]] inline OptimalTiming optimal_timing(const FrictionPair& fric, const TransportConfig& cfg,
                                                  const OptimalWaveformOptions& opts = {}) {
    fric.validate();
    cfg.validate();
    if (!(cfg.gravity > 0.0))
        throw ValidationError("optimal waveform requires gravity > 0 (it is defined through f_n)");
    if (!(opts.phase1_scale > 0.0 && opts.phase1_scale <= 1.0))
        throw ValidationError("phase1_scale must lie in (0, 1]");

    const double fn = cfg.normal_force_ratio();
    const double alpha = cfg.alpha();
    const double ms = fric.mu_s;
    const double mk = fric.mu_k;
    // f_n = 1/mu_s is allowed (degenerate zero waveform) up to round-off.
    if (ms * fn < 1.0 - 1e-12) {
        std::ostringstream os;
        os << "static_hold bound violated: f_n = " << fn << " must exceed 1/mu_s = " << 1.0 / ms;
        throw ValidationError(os.str());
    }
    if (!(alpha > mk * fn + 1.0)) {
        std::ostringstream os;
        os << "max_normal_force bound violated: f_n = " << fn
           << " must be below f_n,max = (alpha - 1)/mu_k = " << (alpha - 1.0) / mk;
        throw ValidationError(os.str());
    }

    const double sticking_excess = std::max(ms * fn - 1.0, 0.0);
    OptimalTiming timing{};
    timing.t1_fraction = std::min((mk * fn + 1.0) / ((ms + mk) * fn), 1.0);
    timing.phase1_acceleration = opts.phase1_scale * sticking_excess * cfg.gravity;
    if (opts.phase1_scale == 1.0) {
        timing.t2_fraction = timing.t1_fraction + (alpha + mk * fn + 1.0) * sticking_excess /
                                                      (2.0 * alpha * (ms + mk) * fn);
    } else {
        // Rebalance the slip-down/catch-up split so the surface velocity
        // still closes with the reduced sticking impulse.
        const double t1 = timing.t1_fraction;
        timing.t2_fraction = 0.5 * (1.0 + t1 + timing.phase1_acceleration * t1 / cfg.a_max);
    }
    timing.t2_fraction = std::clamp(timing.t2_fraction, timing.t1_fraction, 1.0);
    return timing;
}

/// Three-phase waveform maximizing the average upward part velocity.
[[nodiscard]] inline Waveform optimal_waveform(const FrictionPair& fric, const TransportConfig& cfg,
                                               const OptimalWaveformOptions& opts = {}) {
    const OptimalTiming timing = optimal_timing(fric, cfg, opts);
    const double T = cfg.period;
    const double t1 = timing.t1_fraction * T;
    const double t2 = timing.t2_fraction * T;
    const double min_len = 1e-12 * T;
    std::vector<Waveform::Segment> segs;
    if (t1 > min_len) segs.push_back({t1, timing.phase1_acceleration});
    if (t2 - t1 > min_len) segs.push_back({t2 - t1, -cfg.a_max});
    if (T - t2 > min_len) segs.push_back({T - t2, cfg.a_max});
    if (segs.empty()) segs.push_back({T, 0.0});
    // Dropped slivers shift their duration onto the neighbour.
    double sum = 0.0;
    for (const auto& s : segs) sum += s.duration;
    segs.front().duration += T - sum;
    return Waveform(T, std::move(segs), "optimal");
}

/// Two-phase drive: a slow constant upward acceleration for up_fraction * T,
/// then the downward acceleration that brings the velocity back.
[[nodiscard]] inline Waveform sawtooth_waveform(const TransportConfig& cfg, double up_fraction,
                                                double up_accel) {
    cfg.validate();
    if (!std::isfinite(up_fraction) || !(up_fraction > 0.0 && up_fraction < 1.0))
        throw ValidationError("up_fraction must lie strictly inside (0, 1)");
    if (!std::isfinite(up_accel) || !(up_accel > 0.0))
        throw ValidationError("up_accel must be finite and > 0");
    if (up_accel > cfg.a_max)
        throw ValidationError("up_accel exceeds a_max");
    const double down_accel = -up_accel * up_fraction / (1.0 - up_fraction);
    if (std::abs(down_accel) > cfg.a_max * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "sawtooth down-phase acceleration " << down_accel << " m/s^2 exceeds a_max "
           << cfg.a_max << " m/s^2";
        throw ValidationError(os.str());
    }
    const double T = cfg.period;
    return Waveform(T, {{up_fraction * T, up_accel}, {(1.0 - up_fraction) * T, down_accel}},
                    "sawtooth");
}

/// Same as above, additionally requiring the up phase to stay inside the
/// static friction cone so the part can stick on the way up.
[[nodiscard]] inline Waveform sawtooth_waveform(const FrictionPair& fric, const TransportConfig& cfg,
                                                double up_fraction, double up_accel) {
    fric.validate();
    const double m = cfg.effective_mass();
    if (m * (up_accel + cfg.gravity) > fric.mu_s * cfg.normal_force) {
        std::ostringstream os;
        os << "sawtooth up_accel " << up_accel << " m/s^2 leaves the sticking cone (limit "
           << fric.mu_s * cfg.normal_force / m - cfg.gravity << " m/s^2)";
        throw ValidationError(os.str());
    }
    return sawtooth_waveform(cfg, up_fraction, up_accel);
}

struct SampledWaveformOptions {
    /// Largest accepted |net impulse| / (peak |a| * T). Below it, the mean
    /// acceleration is subtracted to close the period.
    double closure_threshold = 0.01;
};

/// Piecewise-constant waveform from uniformly spaced acceleration samples
/// covering [0, T). Runs of identical samples are merged into one segment.
[[nodiscard]] inline Waveform sampled_waveform(std::span<const double> samples, double period,
                                               const SampledWaveformOptions& opts = {}) {
    if (samples.empty()) throw ValidationError("sampled waveform needs at least one sample");
    if (!std::isfinite(period) || !(period > 0.0))
        throw ValidationError("sampled waveform period must be finite and > 0");
    double peak = 0.0;
    double sum = 0.0;
    for (double a : samples) {
        if (!std::isfinite(a)) throw ValidationError("sampled waveform contains non-finite values");
        peak = std::max(peak, std::abs(a));
        sum += a;
    }
    const double n = static_cast<double>(samples.size());
    const double dt = period / n;
    if (peak == 0.0) return Waveform(period, {{period, 0.0}}, "sampled");

    const double impulse = sum * dt;
    const double relative = std::abs(impulse) / (peak * period);
    if (relative > opts.closure_threshold) {
        std::ostringstream os;
        os << "sampled waveform closure error " << relative * 100.0
           << "% of peak*T exceeds threshold " << opts.closure_threshold * 100.0 << "%";
        throw ValidationError(os.str());
    }
    const double mean = sum / n;
    std::vector<Waveform::Segment> segs;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= samples.size(); ++i) {
        if (i == samples.size() || samples[i] != samples[run_start]) {
            segs.push_back({static_cast<double>(i - run_start) * dt, samples[run_start] - mean});
            run_start = i;
        }
    }
    return Waveform(period, std::move(segs), "sampled");
}

}  // namespace vvt
