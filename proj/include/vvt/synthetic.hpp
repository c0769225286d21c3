#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "vvt/fitting.hpp"
#include "vvt/waveform.hpp"

namespace vvt::synthetic {

/// Smooth three-harmonic drive a(t) = A (cos w - cos 2w / 2 + cos 3w / 3),
/// sampled finely. Step drives make mu_k and F_n enter the part motion only
/// through their product; a smooth drive moves the slip onsets with F_n and
/// separates them.
[[nodiscard]] inline Waveform harmonic_drive(double frequency, double amplitude, int samples = 2000) {
    std::vector<double> a(static_cast<std::size_t>(samples));
    for (int i = 0; i < samples; ++i) {
        const double w = 2.0 * std::numbers::pi * i / samples;
        a[static_cast<std::size_t>(i)] = amplitude * (std::cos(w) - 0.5 * std::cos(2.0 * w) + std::cos(3.0 * w) / 3.0);
    }
    return sampled_waveform(a, 1.0 / frequency);
}

struct TrialSpec {
    double normal_force;  // N
    double frequency;     // Hz
};

struct Bundle {
    FixedParameters fixed{0.72, 0.009, kStandardGravity, false};
    double mu_k = 0.6;
    std::vector<TrialSpec> trials{{0.5, 20.0}, {0.8, 30.0}, {1.2, 40.0}};
    double sample_rate = 960.0;
    std::size_t samples = 384;  // 0.4 s
    double noise = 0.05;
    std::uint64_t noise_seed = 100;
};

/// Drive amplitude: 1.5x the part's static hold, spread over the harmonic
/// peak of 1.8.
[[nodiscard]] inline double drive_amplitude(const Bundle& b, double normal_force) {
    const double m = b.fixed.dual_surface ? b.fixed.part_mass / 2.0 : b.fixed.part_mass;
    const double f_n = normal_force / (m * b.fixed.gravity);
    return 1.5 * (b.fixed.mu_s * f_n + 1.0) * b.fixed.gravity / 1.8;
}

/// Simulator-generated traces for recovery tests, with Gaussian noise on the
/// part positions (`noise` times each trace's part range).
[[nodiscard]] inline std::vector<ExperimentTrace> make_traces(const Bundle& b) {
    std::vector<ExperimentTrace> out;
    for (std::size_t i = 0; i < b.trials.size(); ++i) {
        const auto& t = b.trials[i];
        const Waveform w = harmonic_drive(t.frequency, drive_amplitude(b, t.normal_force));
        ExperimentTrace trace = synthesize_trace(w, b.mu_k, t.normal_force, b.fixed, b.sample_rate, b.samples);
        trace.name = "trial_" + std::to_string(i + 1);
        if (b.noise > 0.0) add_part_position_noise(trace, b.noise, b.noise_seed + i);
        out.push_back(std::move(trace));
    }
    return out;
}

}  // namespace vvt::synthetic
