#pragma once

#include <cmath>
#include <string>

#include "vvt/errors.hpp"

namespace vvt {

inline constexpr double kStandardGravity = 9.81;

/// Coulomb coefficients between the vibrating surface and the part.
///
/// `fictitious` marks remapped coefficients for the horizontal-equivalent
/// model, where mu_s < mu_k is legitimate; physical pairs need mu_s >= mu_k.
struct FrictionPair {
    double mu_s = 0.7;
    double mu_k = 0.6;
    bool fictitious = false;

    void validate() const {
        if (!std::isfinite(mu_s) || !std::isfinite(mu_k))
            throw ValidationError("friction coefficients must be finite");
        if (!(mu_k > 0.0))
            throw ValidationError("mu_k must be > 0 (got " + std::to_string(mu_k) + ")");
        if (mu_s < 0.0) throw ValidationError("mu_s must be >= 0 (got " + std::to_string(mu_s) + ")");
        if (!fictitious && mu_s < mu_k)
            throw ValidationError("mu_s must be >= mu_k (got mu_s=" + std::to_string(mu_s) +
                                  ", mu_k=" + std::to_string(mu_k) + ")");
    }
};

/// Physical parameters of one transport setup.
///
/// Gravity may be zero so that horizontal transport can be modelled with the
/// same integrator; every other field must be strictly positive.
struct TransportConfig {
    double part_mass = 0.009;      // kg
    double normal_force = 0.0;     // N
    double gravity = kStandardGravity;
    double a_max = 0.0;            // m/s^2
    double period = 0.05;          // s
    bool dual_surface = false;

    /// Mass seen by the equations of motion. A second synchronized surface
    /// doubles the friction force, which is the same as halving the mass.
    [[nodiscard]] double effective_mass() const { return dual_surface ? part_mass / 2.0 : part_mass; }

    /// F_n / (m g) using the effective mass.
    [[nodiscard]] double normal_force_ratio() const {
        return normal_force / (effective_mass() * gravity);
    }
    [[nodiscard]] double alpha() const { return a_max / gravity; }

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!std::isfinite(v) || !(v > 0.0))
                throw ValidationError(std::string(name) + " must be finite and > 0 (got " +
                                      std::to_string(v) + ")");
        };
        positive(part_mass, "part_mass");
        positive(normal_force, "normal_force");
        positive(a_max, "a_max");
        positive(period, "period");
        if (!std::isfinite(gravity) || gravity < 0.0)
            throw ValidationError("gravity must be finite and >= 0");
    }

    /// Builds a config from the nondimensional pair (f_n, alpha).
    static TransportConfig from_nondimensional(double f_n, double alpha, double mass = 0.009,
                                               double period = 0.05,
                                               double gravity = kStandardGravity,
                                               bool dual_surface = false) {
        TransportConfig cfg;
        cfg.part_mass = mass;
        cfg.dual_surface = dual_surface;
        cfg.gravity = gravity;
        cfg.period = period;
        cfg.normal_force = f_n * cfg.effective_mass() * gravity;
        cfg.a_max = alpha * gravity;
        return cfg;
    }
};

}  // namespace vvt
