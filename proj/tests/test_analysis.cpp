#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "vvt/analysis.hpp"

using namespace vvt;

namespace {

const FrictionPair kFric{0.7, 0.6};

double v(double f, double a, const FrictionPair& fr = kFric) { return v_ave_closed_form({f, a, fr.mu_s, fr.mu_k}); }

}  // namespace

TEST(ClosedForm, ReferencePoint) { EXPECT_NEAR(v(5.0, 10.0), 525.0 / 1690.0, 1e-15); }

TEST(ClosedForm, ZerosAtBandEnds) {
    EXPECT_EQ(v(1.0 / 0.7, 10.0), 0.0);
    EXPECT_NEAR(v(15.0 - 1e-12, 10.0), 0.0, 1e-10);
    EXPECT_EQ(v(15.0, 10.0), 0.0);
    EXPECT_EQ(v(20.0, 10.0), 0.0);
    EXPECT_EQ(v(1.0, 10.0), 0.0);
}

TEST(ClosedForm, NonnegativeAndPositiveInsideBand) {
    for (double a : {3.0, 5.0, 10.0, 40.0})
        for (double f : linspace(0.5, 80.0, 400)) {
            const double x = v(f, a);
            ASSERT_GE(x, 0.0);
            if (in_band(f, a, kFric)) {
                ASSERT_GT(x, 0.0) << f << " " << a;
            }
        }
}

TEST(ClosedForm, IncreasesWithAlpha) {
    for (double f : linspace(1.5, 14.0, 60))
        for (double a : linspace(10.0, 40.0, 30)) {
            if (!in_band(f, a, kFric)) continue;
            ASSERT_GE(v(f, a + 1.0), v(f, a));
        }
}

TEST(Derivative, MatchesFiniteDifference) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double a = 3.0 + 50.0 * u(rng);
        const double lo = 1.0 / kFric.mu_s, hi = f_n_max(a, kFric.mu_k);
        const double f = lo + (hi - lo) * (0.05 + 0.9 * u(rng));
        const double h = 1e-5 * f;
        const double fd = (v(f + h, a) - v(f - h, a)) / (2 * h);
        ASSERT_NEAR(v_ave_derivative(f, a, kFric), fd, 1e-6 * std::max(1.0, std::abs(fd)));
    }
}

TEST(FnMax, Examples) {
    EXPECT_DOUBLE_EQ(f_n_max(10.0, 0.6), 15.0);
    EXPECT_DOUBLE_EQ(f_n_max(2.0, 1.0), 1.0);
    // Band collapses at alpha = 1 + mu_k/mu_s.
    EXPECT_NEAR(f_n_max(1.0 + 0.6 / 0.7, 0.6), 1.0 / 0.7, 1e-14);
    EXPECT_THROW((void)f_n_max(1.0, 0.6), ValidationError);
    EXPECT_THROW((void)optimal_f_n(1.0 + 0.6 / 0.7, kFric), ValidationError);
}

TEST(OptimalFn, MatchesDenseGridAtReferencePoint) {
    const auto best = optimal_f_n(10.0, kFric);
    const double lo = 1.0 / 0.7, hi = 15.0;
    const int n = 1000000;
    double bv = -1, bf = 0;
    for (int k = 0; k < n; ++k) {
        const double f = lo + (hi - lo) * k / (n - 1.0);
        const double x = v(f, 10.0);
        if (x > bv) {
            bv = x;
            bf = f;
        }
    }
    const double half_step = 0.5 * (hi - lo) / (n - 1.0);
    EXPECT_LE(std::abs(bf - best.f_n), half_step);
    EXPECT_NEAR(best.v_norm, bv, 1e-12);
    EXPECT_NEAR(best.f_n, 6.708304416946822, 1e-9);
}

TEST(OptimalFn, StationaryAndUnimodal) {
    for (double a : {3.0, 5.0, 10.0, 15.0, 20.0, 30.0, 40.0, 100.0}) {
        const auto best = optimal_f_n(a, kFric);
        EXPECT_NEAR(v_ave_derivative_factor(best.f_n, a, kFric), 0.0, 1e-9 * a * a);
        // One sign change of the derivative across the band.
        int changes = 0;
        double prev = 0.0;
        for (double f : linspace(1.0 / 0.7 + 1e-9, f_n_max(a, 0.6) - 1e-9, 5000)) {
            const double d = v_ave_derivative(f, a, kFric);
            if (prev != 0.0 && (d > 0) != (prev > 0)) ++changes;
            prev = d;
        }
        EXPECT_EQ(changes, 1) << "alpha " << a;
    }
}

TEST(Feasibility, ReferencePointPassesEverything) {
    const auto r = feasibility_report({5.0, 10.0, 0.7, 0.6});
    EXPECT_TRUE(r.feasible());
    EXPECT_TRUE(r.violated().empty());
    EXPECT_EQ(r.bounds.size(), 5u);
}

TEST(Feasibility, AlphaTwoNeverTransports) {
    for (double f : linspace(1.0 / 0.7, 30.0, 300)) {
        const auto r = feasibility_report({f, 2.0, 0.7, 0.6});
        EXPECT_FALSE(r.bound("slip_down_accel").satisfied);
        EXPECT_FALSE(r.bound("min_accel").satisfied);
    }
}

TEST(Feasibility, KineticBoundaryFlagged) {
    const auto r = feasibility_report({1.0 / 0.6, 10.0, 0.7, 0.6});
    EXPECT_FALSE(r.bound("kinetic_support").satisfied);
    ASSERT_EQ(r.violated().size(), 1u);
    EXPECT_EQ(r.violated()[0], "kinetic_support");
    EXPECT_THROW((void)r.bound("nope"), ValidationError);
}

TEST(Equivalent, Coefficients) {
    const auto e = equivalent_horizontal_coefficients(kFric, 5.0);
    EXPECT_DOUBLE_EQ(e.mu_s_tilde, 2.5);
    EXPECT_DOUBLE_EQ(e.mu_k_tilde, 4.0);
    EXPECT_NEAR(equivalent_horizontal_coefficients(kFric, 1.0 / 0.7).mu_s_tilde, 0.0, 1e-15);
    // mu~_s < mu~_k exactly when (mu_s - mu_k) f_n < 2.
    for (double f : linspace(0.5, 40.0, 200)) {
        const auto q = equivalent_horizontal_coefficients(kFric, f);
        EXPECT_EQ(q.mu_s_tilde < q.mu_k_tilde, (0.7 - 0.6) * f < 2.0) << f;
    }
    EXPECT_NO_THROW(e.friction().validate());
    EXPECT_THROW((FrictionPair{2.5, 4.0}.validate()), ValidationError);
}

TEST(Sweep, DefaultGridEndpoints) {
    const auto alphas = std::vector<double>{5, 10, 15, 20, 30, 40};
    const auto grid = linspace(1.0, 40.0, 400);
    const auto r = sweep(kFric, alphas, grid);
    ASSERT_EQ(r.rows.size(), alphas.size() * grid.size());
    for (const auto& row : r.rows) {
        if (row.f_n <= 1.0 / 0.7 || row.f_n >= (row.alpha - 1.0) / 0.6) {
            EXPECT_EQ(row.v_norm, 0.0);
            EXPECT_FALSE(row.feasible);
        } else {
            EXPECT_GT(row.v_norm, 0.0);
            EXPECT_TRUE(row.feasible);
        }
    }
    ASSERT_EQ(r.optima.size(), alphas.size());
    for (const auto& o : r.optima) {
        EXPECT_FALSE(o.band_empty);
        EXPECT_GE(o.v_star, o.grid_v);
        EXPECT_NEAR(o.f_n_star, o.grid_f_n, 40.0 / 399.0);
    }
}

TEST(Sweep, SinglePointAndValidation) {
    const auto r = sweep(kFric, {10.0}, {5.0});
    ASSERT_EQ(r.rows.size(), 1u);
    EXPECT_NEAR(r.rows[0].v_norm, 525.0 / 1690.0, 1e-15);
    EXPECT_THROW((void)sweep(kFric, {}, {5.0}), ValidationError);
    EXPECT_THROW((void)sweep(kFric, {10.0}, {5.0, 4.0}), ValidationError);
    EXPECT_THROW((void)sweep(kFric, {-1.0}, {5.0}), ValidationError);
    // Empty band is a flag, not an error.
    const auto e = sweep(kFric, {1.5}, {2.0});
    EXPECT_TRUE(e.optima[0].band_empty);
}

TEST(Sweep, VerifySimulationSubset) {
    SweepVerification verify;
    verify.points = 6;
    verify.seed = 9;
    const auto r = sweep(kFric, {8.0, 12.0, 20.0}, linspace(2.0, 12.0, 6), verify);
    ASSERT_EQ(r.checks.size(), 6u);
    for (const auto& c : r.checks) {
        EXPECT_TRUE(c.converged);
        EXPECT_LT(c.relative_error, 0.01) << c.alpha << " " << c.f_n;
    }
    const auto again = sweep(kFric, {8.0, 12.0, 20.0}, linspace(2.0, 12.0, 6), verify);
    for (std::size_t i = 0; i < r.checks.size(); ++i) EXPECT_EQ(r.checks[i].f_n, again.checks[i].f_n);
}
