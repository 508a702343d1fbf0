#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "liangflow/error.hpp"
#include "liangflow/liang.hpp"

using namespace liangflow;

namespace {

std::vector<double> grid(double t0, double t1, double step) {
    std::vector<double> out;
    for (int i = 0; t0 + i * step <= t1 + 1e-12; ++i)
        out.push_back(t0 + i * step);
    return out;
}

double flow_at(const ChainModel& m, const InitialStateSpec& init, Site b, Site a, double t, Engine engine) {
    const double times[] = {t};
    return cumulative_flow(m, init, b, a, times, engine).values[0];
}

// Slope at t of the cubic through T(t - 2h), T(t - h), T(t + h), T(t + 2h).
double cubic_slope(const ChainModel& m, const InitialStateSpec& init, Site b, Site a, double t, double h) {
    const std::vector<double> offsets = {-2.0 * h, -h, h, 2.0 * h};
    std::vector<double> times;
    for (double o : offsets)
        times.push_back(t + o);
    const FlowSeries s = cumulative_flow(m, init, b, a, times, Engine::Quadratic);
    Eigen::Matrix4d v;
    Eigen::Vector4d y;
    for (int i = 0; i < 4; ++i) {
        for (int p = 0; p < 4; ++p)
            v(i, p) = std::pow(offsets[static_cast<std::size_t>(i)], p);
        y(i) = s.values[static_cast<std::size_t>(i)];
    }
    return v.fullPivLu().solve(y)(1);
}

} // namespace

TEST_SUITE("liang") {

TEST_CASE("flow vanishes at t = 0 for every engine") {
    const std::vector<double> zero = {0.0};
    const ChainModel aah = build_aah(12, 1.7);
    CHECK(cumulative_flow(aah, Neel{}, 5, 8, zero, Engine::Quadratic).values[0] == 0.0);
    CHECK(cumulative_flow(aah, Neel{}, 5, 8, zero, Engine::Exact).values[0] == 0.0);
    CHECK(cumulative_flow(aah, GroundStateOf{}, 5, 8, zero, Engine::Quadratic).values[0] == 0.0);

    const ChainModel tfim = build_annni(10, 0.0, 0.8);
    CHECK(cumulative_flow(tfim, GroundStateOf{}, 5, 8, zero, Engine::Bdg).values[0] == 0.0);
    CHECK(cumulative_flow(tfim, FerromagneticCat{}, 5, 8, zero, Engine::Bdg).values[0] == 0.0);
    CHECK(cumulative_flow(tfim, GroundStateOf{}, 5, 8, zero, Engine::Exact).values[0] == 0.0);

    const ChainModel annni = build_annni(10, 0.2, 0.6);
    CHECK(cumulative_flow(annni, GroundStateOf{}, 5, 3, zero, Engine::Exact).values[0] == 0.0);
    CHECK(cumulative_flow(annni, Neel{}, 5, 3, zero, Engine::Exact).values[0] == 0.0);
}

TEST_CASE("flow is bounded by ln 2") {
    const std::vector<double> times = grid(0.0, 40.0, 0.5);
    const ChainModel aah = build_aah(89, 0.8);
    const FlowProfile p =
        cumulative_flow_profile(aah, Neel{}, 55, std::vector<Site>{56, 60, 70, 20}, times, Engine::Quadratic);
    const ChainModel tfim = build_annni(60, 0.0, 0.7);
    const FlowProfile q =
        cumulative_flow_profile(tfim, GroundStateOf{}, 30, std::vector<Site>{31, 33, 40}, times, Engine::Bdg);
    for (const FlowProfile* f : {&p, &q})
        for (const auto& row : f->values)
            for (double v : row)
                CHECK(std::abs(v) <= std::numbers::ln2 + 1e-12);
}

TEST_CASE("quadratic and exact engines agree on AAH chains") {
    const std::vector<double> times = {0.5, 2.0, 7.0, 15.0};
    for (double lambda : {0.5, 2.0, 3.5}) {
        const ChainModel m = build_aah(8, lambda);
        for (Site a : {5, 7, 1}) {
            const FlowSeries q = cumulative_flow(m, Neel{}, 4, a, times, Engine::Quadratic);
            const FlowSeries e = cumulative_flow(m, Neel{}, 4, a, times, Engine::Exact);
            for (std::size_t i = 0; i < times.size(); ++i)
                CHECK(std::abs(q.values[i] - e.values[i]) < 1e-8);
        }
    }
}

TEST_CASE("bdg and exact engines agree on Ising chains") {
    const std::vector<double> times = {0.5, 3.0, 9.0};
    for (double field : {0.4, 1.0, 1.6}) {
        const ChainModel m = build_annni(8, 0.0, field);
        for (const InitialStateSpec& init : {InitialStateSpec{GroundStateOf{}}, InitialStateSpec{FerromagneticCat{}},
                                             InitialStateSpec{GroundStateOf{build_annni(8, 0.0, 2.5)}}}) {
            const FlowSeries b = cumulative_flow(m, init, 4, 7, times, Engine::Bdg);
            const FlowSeries e = cumulative_flow(m, init, 4, 7, times, Engine::Exact);
            for (std::size_t i = 0; i < times.size(); ++i)
                CHECK(std::abs(b.values[i] - e.values[i]) < 1e-8);
        }
    }
}

TEST_CASE("stationary unfrozen run reduces to the frozen-run entropy deficit") {
    const ChainModel m = build_annni(250, 0.0, 0.9);
    const Site b = 125, a = 128;
    const double t = 30.0;
    auto initial = std::make_shared<const PreparedState>(prepare_initial_state(m, GroundStateOf{}, Engine::Bdg));
    EntropyTrajectory still(m, initial);
    EntropyTrajectory frozen(freeze(m, FrozenMask::single(b)), initial);
    const Site site[] = {a};
    const double s0 = still.entropies(site, 0.0)[0];
    CHECK(std::abs(still.entropies(site, t)[0] - s0) < 1e-9);
    const double deficit = s0 - frozen.entropies(site, t)[0];
    CHECK(std::abs(flow_at(m, GroundStateOf{}, b, a, t, Engine::Bdg) - deficit) < 1e-9);
}

TEST_CASE("flow outside the lightcone is negligible") {
    const ChainModel m = build_annni(250, 0.0, 0.5);
    // Maximal velocity 2 min(1, B) = 1, so d = 40 is far outside at t = 10.
    CHECK(std::abs(flow_at(m, GroundStateOf{}, 125, 165, 10.0, Engine::Bdg)) < 1e-6);
    CHECK(std::abs(flow_at(m, GroundStateOf{}, 125, 126, 10.0, Engine::Bdg)) > 1e-6);
}

TEST_CASE("left-side targets mirror right-side targets on a reflected chain") {
    // The uniform Ising chain is reflection symmetric about its centre.
    const ChainModel m = build_annni(41, 0.0, 0.8);
    const std::vector<double> times = {2.0, 6.0};
    const FlowSeries right = cumulative_flow(m, GroundStateOf{}, 21, 24, times, Engine::Bdg);
    const FlowSeries left = cumulative_flow(m, GroundStateOf{}, 21, 18, times, Engine::Bdg);
    CHECK(right.distance == 3);
    CHECK(left.distance == 3);
    for (std::size_t i = 0; i < times.size(); ++i)
        CHECK(std::abs(right.values[i] - left.values[i]) < 1e-10);
}

TEST_CASE("profile series match single-target runs") {
    const ChainModel m = build_aah(55, 1.2);
    const std::vector<double> times = {1.0, 4.0, 9.0};
    const std::vector<Site> targets = {35, 40, 30};
    const FlowProfile p = cumulative_flow_profile(m, Neel{}, 34, targets, times, Engine::Quadratic);
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const FlowSeries s = cumulative_flow(m, Neel{}, 34, targets[k], times, Engine::Quadratic);
        const FlowSeries from_profile = p.series(k);
        CHECK(from_profile.target == targets[k]);
        for (std::size_t i = 0; i < times.size(); ++i)
            CHECK(std::abs(s.values[i] - from_profile.values[i]) < 1e-13);
    }
    CHECK_THROWS_AS(p.series(3), std::out_of_range);
}

TEST_CASE("exact trajectories accept out-of-order times") {
    const ChainModel m = build_annni(9, 0.2, 0.7);
    const std::vector<double> forward = {1.0, 2.5, 4.0};
    const FlowSeries s = cumulative_flow(m, GroundStateOf{}, 5, 7, forward, Engine::Exact);
    auto initial = std::make_shared<const PreparedState>(prepare_initial_state(m, GroundStateOf{}, Engine::Exact));
    EntropyTrajectory a(m, initial);
    EntropyTrajectory b(freeze(m, FrozenMask::single(5)), initial);
    const Site site[] = {7};
    for (int i = 2; i >= 0; --i) {
        const double t = forward[static_cast<std::size_t>(i)];
        const double v = a.entropies(site, t)[0] - b.entropies(site, t)[0];
        CHECK(std::abs(v - s.values[static_cast<std::size_t>(i)]) < 1e-10);
    }
}

TEST_CASE("invalid requests are rejected") {
    const ChainModel aah = build_aah(10, 1.0);
    const std::vector<double> times = {1.0};
    CHECK_THROWS_AS(cumulative_flow(aah, Neel{}, 4, 4, times, Engine::Quadratic), std::invalid_argument);
    CHECK_THROWS_AS(cumulative_flow(aah, Neel{}, 0, 4, times, Engine::Quadratic), std::out_of_range);
    CHECK_THROWS_AS(cumulative_flow(aah, Neel{}, 4, 11, times, Engine::Quadratic), std::out_of_range);
    const std::vector<double> backwards = {2.0, 1.0};
    CHECK_THROWS_AS(cumulative_flow(aah, Neel{}, 4, 5, backwards, Engine::Quadratic), std::invalid_argument);
    const std::vector<double> negative = {-1.0};
    CHECK_THROWS_AS(cumulative_flow(aah, Neel{}, 4, 5, negative, Engine::Quadratic), std::invalid_argument);

    // Engine and state compatibility.
    const ChainModel tfim = build_annni(10, 0.0, 1.0);
    CHECK_THROWS_AS(cumulative_flow(tfim, Neel{}, 4, 5, times, Engine::Bdg), EngineError);
    CHECK_THROWS_AS(cumulative_flow(tfim, GroundStateOf{}, 4, 5, times, Engine::Quadratic), EngineError);
    CHECK_THROWS_AS(cumulative_flow(aah, GroundStateOf{}, 4, 5, times, Engine::Bdg), EngineError);
    CHECK_THROWS_AS(cumulative_flow(aah, FerromagneticCat{}, 4, 5, times, Engine::Quadratic), EngineError);
    CHECK_THROWS_AS(cumulative_flow(build_annni(10, 0.2, 1.0), GroundStateOf{}, 4, 5, times, Engine::Bdg),
                    EngineError);
    CHECK_THROWS_AS(cumulative_flow(build_annni(20, 0.2, 1.0), GroundStateOf{}, 4, 5, times, Engine::Exact),
                    ResourceError);
}

TEST_CASE("default engines") {
    CHECK(default_engine(build_aah(10, 1.0)) == Engine::Quadratic);
    CHECK(default_engine(build_annni(10, 0.0, 1.0)) == Engine::Bdg);
    CHECK(default_engine(build_annni(10, 0.2, 1.0)) == Engine::Exact);
    CHECK(default_engine(build_annni(10, 0.0, 1.0, 1e-4)) == Engine::Exact);
    CHECK(engine_name(Engine::Quadratic) == "quadratic");
    CHECK(engine_name(Engine::Bdg) == "bdg");
    CHECK(engine_name(Engine::Exact) == "exact");
}

TEST_CASE("instantaneous flow matches a cubic fit") {
    const ChainModel m = build_aah(8, 1.3);
    for (double t : {0.7, 2.0, 5.5}) {
        const FlowRate r = instantaneous_flow(m, Neel{}, 4, 6, t, Engine::Quadratic);
        CHECK(r.converged);
        CHECK(std::abs(r.rate - cubic_slope(m, Neel{}, 4, 6, t, 0.05)) < 1e-4);
    }
}

TEST_CASE("instantaneous flow requires t > dt > 0") {
    const ChainModel m = build_aah(8, 1.0);
    CHECK_THROWS_AS(instantaneous_flow(m, Neel{}, 4, 5, 0.01, Engine::Quadratic), std::invalid_argument);
    CHECK_THROWS_AS(instantaneous_flow(m, Neel{}, 4, 5, 0.005, Engine::Quadratic), std::invalid_argument);
    CHECK_THROWS_AS(instantaneous_flow(m, Neel{}, 4, 5, 1.0, Engine::Quadratic, 0.0), std::invalid_argument);
    CHECK_NOTHROW(instantaneous_flow(m, Neel{}, 4, 5, 0.011, Engine::Quadratic));
}

TEST_CASE("instantaneous flow vanishes when both runs are stationary") {
    // Deep in the localised phase the ground state is a product of site
    // occupations, an eigenstate of both the chain and its frozen copy.
    const ChainModel m = build_aah(34, 1e4);
    const FlowRate r = instantaneous_flow(m, GroundStateOf{}, 17, 18, 200.0, Engine::Quadratic);
    CHECK(std::abs(r.rate) < 1e-6);
}

TEST_CASE("late-time average") {
    FlowSeries s;
    for (int i = 0; i <= 100; ++i) {
        s.times.push_back(i);
        s.values.push_back(-0.25);
    }
    CHECK(late_time_average(s, 20.0, 80.0) == doctest::Approx(0.25).epsilon(1e-15));

    // Symmetric sawtooth around 0.3.
    for (std::size_t i = 0; i < s.values.size(); ++i)
        s.values[i] = 0.3 + 0.1 * ((static_cast<int>(i) % 4) - 1.5) / 1.5;
    CHECK(late_time_average(s, 0.0, 99.0) == doctest::Approx(0.3).epsilon(1e-12));

    CHECK_THROWS_AS(late_time_average(s, 50.0, 55.0), std::invalid_argument);
    CHECK_THROWS_AS(late_time_average(s, 50.0, 150.0), std::invalid_argument);
    CHECK_THROWS_AS(late_time_average(s, -5.0, 50.0), std::invalid_argument);
    CHECK_THROWS_AS(late_time_average(s, 60.0, 40.0), std::invalid_argument);
    CHECK_THROWS_AS(late_time_average(FlowSeries{}, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("localised AAH flow decays with distance") {
    const ChainModel m = build_aah(610, 3.0);
    const Site b = fibonacci_frozen_site(610);
    const std::vector<double> times = grid(0.0, 200.0, 1.0);
    const FlowProfile p = cumulative_flow_profile(m, Neel{}, b, std::vector<Site>{b + 1, b + 15}, times,
                                                  Engine::Quadratic);
    CHECK(late_time_average(p.series(0), 100.0, 200.0) > late_time_average(p.series(1), 100.0, 200.0));
}

TEST_CASE("ground-state entropy difference limits") {
    // Paramagnet: both ground states are near products.
    CHECK(std::abs(delta_S_ground(build_annni(40, 0.0, 1e3), 20, 23)) < 1e-6);
    // Tilted near-classical chain: both states are polarised.
    CHECK(std::abs(delta_S_ground(build_annni(10, 0.0, 1e-3, 1e-2), 5, 8, Engine::Exact)) < 1e-6);
    // Freezing a site never changes a distant paramagnet.
    CHECK(std::abs(delta_S_ground(build_annni(60, 0.0, 2.0), 30, 55)) < 1e-10);
}

TEST_CASE("ground-state entropy difference agrees across engines") {
    for (double field : {0.5, 0.9, 1.4}) {
        const ChainModel m = build_annni(10, 0.0, field);
        for (Site a : {6, 8}) {
            const double b = delta_S_ground(m, 5, a, Engine::Bdg);
            const double e = delta_S_ground(m, 5, a, Engine::Exact);
            CHECK(std::abs(b - e) < 1e-8);
        }
    }
}

TEST_CASE("ground-state entropy difference guards") {
    // Untilted classical chain: the frozen halves are degenerate.
    CHECK_THROWS_AS(delta_S_ground(build_annni(10, 0.0, 0.0), 5, 8, Engine::Exact), EngineError);
    CHECK_THROWS_AS(delta_S_ground(build_aah(10, 1.0), 5, 8, Engine::Quadratic), EngineError);
    CHECK_THROWS_AS(delta_S_ground(build_annni(10, 0.0, 1.0), 5, 5), std::invalid_argument);
}

} // TEST_SUITE
