#include <gtest/gtest.h>

#include <sstream>

#include "vvt/io.hpp"
#include "vvt/synthetic.hpp"

using namespace vvt;

namespace {

const FrictionPair kFric{0.7, 0.6};

}  // namespace

TEST(TrajectoryCsv, RoundTripsExactly) {
    const auto cfg = TransportConfig::from_nondimensional(5.0, 10.0, 0.009, 0.05);
    const Waveform w = optimal_waveform(kFric, cfg);
    SimulationOptions opts;
    opts.steps_per_period = 200;
    const Trajectory traj = simulate(w, kFric, cfg, 2, sticking_start(w), opts);
    std::stringstream ss;
    io::write_trajectory_csv(ss, traj);
    EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')), "t,z_S,v_S,a_S,z_P,v_P,mode");
    const Trajectory back = io::read_trajectory_csv(ss);
    ASSERT_EQ(back.size(), traj.size());
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_EQ(back.states[i].t, traj.states[i].t);
        EXPECT_EQ(back.states[i].z_P, traj.states[i].z_P);
        EXPECT_EQ(back.states[i].v_P, traj.states[i].v_P);
        EXPECT_EQ(back.states[i].mode, traj.states[i].mode);
        EXPECT_EQ(back.surface_accel[i], traj.surface_accel[i]);
    }
}

TEST(TrajectoryCsv, RejectsBadInput) {
    std::istringstream no_header("1,2,3\n");
    EXPECT_THROW((void)io::read_trajectory_csv(no_header), ValidationError);
    std::istringstream short_row("t,z_S,v_S,a_S,z_P,v_P,mode\n0,0,0,0,0,0\n");
    EXPECT_THROW((void)io::read_trajectory_csv(short_row), ValidationError);
    std::istringstream bad_mode("t,z_S,v_S,a_S,z_P,v_P,mode\n0,0,0,0,0,0,flying\n");
    EXPECT_THROW((void)io::read_trajectory_csv(bad_mode), ValidationError);
}

TEST(WaveformJson, RoundTrip) {
    const auto cfg = TransportConfig::from_nondimensional(5.0, 10.0, 0.009, 0.05);
    const Waveform w = optimal_waveform(kFric, cfg);
    std::stringstream ss;
    io::write_waveform_json(ss, w);
    const Waveform back = io::read_waveform_json(ss);
    EXPECT_EQ(back.id(), w.id());
    EXPECT_EQ(back.period(), w.period());
    ASSERT_EQ(back.segments().size(), w.segments().size());
    for (std::size_t i = 0; i < w.segments().size(); ++i) {
        EXPECT_EQ(back.segments()[i].duration, w.segments()[i].duration);
        EXPECT_EQ(back.segments()[i].acceleration, w.segments()[i].acceleration);
    }
}

TEST(WaveformJson, RejectsUnknownKeysAndMalformed) {
    std::istringstream extra(R"({"period": 1, "segments": [{"duration": 1, "acceleration": 0}], "gain": 2})");
    try {
        (void)io::read_waveform_json(extra);
        FAIL();
    } catch (const ValidationError& e) {
        EXPECT_NE(std::string(e.what()).find("gain"), std::string::npos);
    }
    std::istringstream broken("{\"period\": ");
    EXPECT_THROW((void)io::read_waveform_json(broken), ValidationError);
    std::istringstream no_segments(R"({"period": 1})");
    EXPECT_THROW((void)io::read_waveform_json(no_segments), ValidationError);
    std::istringstream open(R"({"period": 1, "segments": [{"duration": 1, "acceleration": 3}]})");
    EXPECT_THROW((void)io::read_waveform_json(open), ValidationError);  // net velocity change
}

TEST(SampledCsv, PeriodFromSampleCount) {
    std::ostringstream os;
    os << "# square wave\nt,a\n";
    for (int i = 0; i < 100; ++i) os << i * 0.0005 << ',' << (i < 50 ? 4.0 : -4.0) << '\n';
    std::istringstream in(os.str());
    const Waveform w = io::read_sampled_waveform_csv(in);
    EXPECT_NEAR(w.period(), 0.05, 1e-12);
    EXPECT_EQ(w.peak_acceleration(), 4.0);
    ASSERT_EQ(w.segments().size(), 2u);

    std::istringstream uneven("t,a\n0,1\n0.1,1\n0.3,-1\n");
    EXPECT_THROW((void)io::read_sampled_waveform_csv(uneven), ValidationError);
    std::istringstream headerless("0,1\n0.1,-1\n");
    EXPECT_THROW((void)io::read_sampled_waveform_csv(headerless), ValidationError);
}

TEST(SweepCsv, HeaderAndRows) {
    const SweepResult r = sweep(kFric, {10.0}, {1.0, 5.0});
    std::ostringstream os;
    io::write_sweep_csv(os, r);
    EXPECT_EQ(os.str().substr(0, os.str().find('\n')), "alpha,f_n,v_norm,feasible");
    std::istringstream lines(os.str());
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) ++n;
    EXPECT_EQ(n, 3);
    const auto j = io::sweep_summary_json(r);
    ASSERT_EQ(j["optima"].size(), 1u);
    EXPECT_NEAR(j["optima"][0]["f_n_max"].get<double>(), 15.0, 1e-12);
}

TEST(FitReport, DeterministicAndComplete) {
    synthetic::Bundle b;
    b.noise = 0.0;
    const auto traces = synthetic::make_traces(b);
    FitBounds bounds;
    bounds.mu_k = {0.1, 0.72};
    bounds.normal_force.assign(traces.size(), {0.05, 5.0});
    FitOptions o;
    o.swarm.particles = 10;
    o.swarm.max_iterations = 10;
    o.restarts = 2;
    const auto a = io::fit_report_json(fit(traces, bounds, b.fixed, 11, o), traces, b.fixed, 11).dump(2);
    const auto c = io::fit_report_json(fit(traces, bounds, b.fixed, 11, o), traces, b.fixed, 11).dump(2);
    EXPECT_EQ(a, c);
    const auto j = io::json::parse(a);
    EXPECT_EQ(j["seed"], 11);
    EXPECT_EQ(j["trials"].size(), 3u);
    EXPECT_EQ(j["trials"][0]["trace"], "trial_1");
    EXPECT_EQ(j["trials"][2]["measured_normal_force"], 1.2);
    EXPECT_EQ(j["diagnostics"]["restart_mu_k"].size(), 2u);
}
