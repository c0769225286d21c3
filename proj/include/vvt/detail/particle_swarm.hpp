#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "vvt/errors.hpp"

namespace vvt::detail {

struct SwarmOptions {
    int particles = 60;
    double inertia = 0.729;
    double cognitive = 1.494;
    double social = 1.494;
    int max_iterations = 200;
    /// Stop when the best cost improved by less than function_tolerance
    /// (relative) over this many iterations.
    int stall_iterations = 30;
    double function_tolerance = 1e-6;
    /// Worker threads for cost evaluation; results do not depend on it.
    int threads = 1;
};

struct SwarmResult {
    std::vector<double> best;
    double best_cost = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool stalled = false;
    std::size_t evaluations = 0;
    /// Global best cost after initialization and after every iteration.
    std::vector<double> history;
};

/// Global-best particle swarm with constriction-style coefficients.
///
/// Every particle owns an RNG stream derived from (seed, particle index), so
/// the result is a pure function of the inputs and the seed.
template <class Cost>
SwarmResult particle_swarm(Cost&& cost, const std::vector<double>& lower, const std::vector<double>& upper,
                           std::uint64_t seed, const SwarmOptions& opts = {}) {
    const std::size_t dim = lower.size();
    if (dim == 0 || upper.size() != dim) throw ValidationError("particle_swarm: bounds must be nonempty and aligned");
    for (std::size_t d = 0; d < dim; ++d)
        if (!(upper[d] >= lower[d])) throw ValidationError("particle_swarm: lower bound above upper bound");
    if (opts.particles < 1 || opts.max_iterations < 0) throw ValidationError("particle_swarm: bad swarm size");

    const std::size_t n = static_cast<std::size_t>(opts.particles);
    std::vector<double> range(dim);
    for (std::size_t d = 0; d < dim; ++d) range[d] = upper[d] - lower[d];

    std::vector<std::mt19937_64> rng;
    rng.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(i)};
        rng.emplace_back(seq);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<std::vector<double>> x(n, std::vector<double>(dim)), v(n, std::vector<double>(dim));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t d = 0; d < dim; ++d) {
            x[i][d] = lower[d] + range[d] * unit(rng[i]);
            v[i][d] = range[d] * (2.0 * unit(rng[i]) - 1.0);
        }

    std::vector<double> f(n);
    SwarmResult result;
    auto evaluate_all = [&] {
        const int workers = std::max(1, std::min<int>(opts.threads, static_cast<int>(n)));
        if (workers == 1) {
            for (std::size_t i = 0; i < n; ++i) f[i] = cost(x[i]);
        } else {
            std::vector<std::thread> pool;
            for (int w = 0; w < workers; ++w)
                pool.emplace_back([&, w] {
                    for (std::size_t i = static_cast<std::size_t>(w); i < n; i += static_cast<std::size_t>(workers))
                        f[i] = cost(x[i]);
                });
            for (auto& t : pool) t.join();
        }
        result.evaluations += n;
    };

    evaluate_all();
    std::vector<std::vector<double>> pbest = x;
    std::vector<double> pbest_f = f;
    std::size_t g = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    result.best = x[g];
    result.best_cost = f[g];
    result.history.push_back(result.best_cost);

    for (int it = 1; it <= opts.max_iterations; ++it) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                const double r1 = unit(rng[i]);
                const double r2 = unit(rng[i]);
                double vel = opts.inertia * v[i][d] + opts.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                             opts.social * r2 * (result.best[d] - x[i][d]);
                vel = std::clamp(vel, -range[d], range[d]);
                double pos = x[i][d] + vel;
                if (pos < lower[d] || pos > upper[d]) {
                    pos = std::clamp(pos, lower[d], upper[d]);
                    vel = 0.0;
                }
                x[i][d] = pos;
                v[i][d] = vel;
            }
        }
        evaluate_all();
        for (std::size_t i = 0; i < n; ++i) {
            if (f[i] < pbest_f[i]) {
                pbest_f[i] = f[i];
                pbest[i] = x[i];
                if (f[i] < result.best_cost) {
                    result.best_cost = f[i];
                    result.best = x[i];
                }
            }
        }
        result.history.push_back(result.best_cost);
        result.iterations = it;
        if (it >= opts.stall_iterations) {
            const double old = result.history[static_cast<std::size_t>(it - opts.stall_iterations)];
            if (old - result.best_cost <= opts.function_tolerance * std::abs(old)) {
                result.stalled = true;
                break;
            }
        }
    }
    return result;
}

struct SimplexOptions {
    /// Initial simplex edge as a fraction of each bound range.
    double initial_step = 0.01;
    /// Stop when the simplex cost spread falls below this (relative).
    double cost_tolerance = 1e-12;
    /// Stop when every vertex is within this fraction of the range of the best.
    double size_tolerance = 1e-10;
    int max_evaluations = 3000;
};

/// Nelder-Mead simplex refinement inside box bounds (trial points are
/// clamped), started from the swarm's best point. Deterministic.
template <class Cost>
SwarmResult simplex_refine(Cost&& cost, const std::vector<double>& lower, const std::vector<double>& upper,
                           const std::vector<double>& start, double start_cost, const SimplexOptions& opts = {}) {
    const std::size_t dim = start.size();
    SwarmResult out;
    auto clamp_point = [&](std::vector<double> p) {
        for (std::size_t d = 0; d < dim; ++d) p[d] = std::clamp(p[d], lower[d], upper[d]);
        return p;
    };
    auto eval = [&](const std::vector<double>& p) {
        ++out.evaluations;
        return cost(p);
    };

    std::vector<std::vector<double>> pts{start};
    std::vector<double> f{start_cost};
    for (std::size_t d = 0; d < dim; ++d) {
        std::vector<double> p = start;
        const double h = opts.initial_step * (upper[d] - lower[d]);
        p[d] = (p[d] + h <= upper[d]) ? p[d] + h : p[d] - h;
        p = clamp_point(p);
        pts.push_back(p);
        f.push_back(eval(p));
    }

    std::vector<std::size_t> order(dim + 1);
    while (out.evaluations < static_cast<std::size_t>(opts.max_evaluations)) {
        for (std::size_t i = 0; i <= dim; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f[a] < f[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[dim - 1];

        double size = 0.0;
        for (std::size_t i = 0; i <= dim; ++i)
            for (std::size_t d = 0; d < dim; ++d)
                size = std::max(size, std::abs(pts[i][d] - pts[best][d]) / std::max(upper[d] - lower[d], 1e-300));
        if (f[worst] - f[best] <= opts.cost_tolerance * std::abs(f[best]) && size <= 1e3 * opts.size_tolerance) break;
        if (size <= opts.size_tolerance) break;

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i <= dim; ++i)
            if (i != worst)
                for (std::size_t d = 0; d < dim; ++d) centroid[d] += pts[i][d] / static_cast<double>(dim);
        auto along = [&](double t) {
            std::vector<double> p(dim);
            for (std::size_t d = 0; d < dim; ++d) p[d] = centroid[d] + t * (pts[worst][d] - centroid[d]);
            return clamp_point(p);
        };

        std::vector<double> xr = along(-1.0);
        const double fr = eval(xr);
        if (fr < f[best]) {
            std::vector<double> xe = along(-2.0);
            const double fe = eval(xe);
            if (fe < fr) {
                pts[worst] = std::move(xe);
                f[worst] = fe;
            } else {
                pts[worst] = std::move(xr);
                f[worst] = fr;
            }
            continue;
        }
        if (fr < f[second]) {
            pts[worst] = std::move(xr);
            f[worst] = fr;
            continue;
        }
        const bool outside = fr < f[worst];
        std::vector<double> xc = along(outside ? -0.5 : 0.5);
        const double fc = eval(xc);
        if (fc < (outside ? fr : f[worst])) {
            pts[worst] = std::move(xc);
            f[worst] = fc;
            continue;
        }
        for (std::size_t i = 0; i <= dim; ++i) {
            if (i == best) continue;
            for (std::size_t d = 0; d < dim; ++d) pts[i][d] = pts[best][d] + 0.5 * (pts[i][d] - pts[best][d]);
            f[i] = eval(pts[i]);
        }
        ++out.iterations;
    }
    const std::size_t best = static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    out.best = pts[best];
    out.best_cost = f[best];
    if (start_cost <= out.best_cost) {
        out.best = start;
        out.best_cost = start_cost;
    }
    return out;
}

}  // namespace vvt::detail
