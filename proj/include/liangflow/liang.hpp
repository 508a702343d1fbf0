#pragma once

// Cumulative Liang information flow from a frozen site b to a target site a:
//   T_d(t) = S(rho_a, t | unfrozen) - S(rho_a, t | freeze(model, b)),  d = |a - b|,
// both evolutions starting from the same initial state. Entropies are in
// nats. Values are kept signed; callers take |.| for presentation.

#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "liangflow/bdg.hpp"
#include "liangflow/exact.hpp"
#include "liangflow/model.hpp"
#include "liangflow/quadratic.hpp"

namespace liangflow {

enum class Engine { Quadratic, Bdg, Exact };

std::string_view engine_name(Engine engine);

// Quadratic for AAH chains, Bdg for Ising chains without NNN bonds or tilt,
// Exact otherwise.
Engine default_engine(const ChainModel& model);

// Odd sites up. Quadratic and exact engines.
struct Neel {};
// Ground state of the given model, or of the unfrozen evolution model when
// empty (a stationary unfrozen run).
struct GroundStateOf {
    std::optional<ChainModel> model;
};
// Product state |down ... down>. Quadratic (empty band) and exact engines.
struct Ferromagnetic {};
// (|up...up> + |down...down>)/sqrt(2). Bdg and exact engines.
struct FerromagneticCat {};

using InitialStateSpec = std::variant<Neel, GroundStateOf, Ferromagnetic, FerromagneticCat>;

// An initial state in the representation of one engine.
struct PreparedState {
    Engine engine = Engine::Exact;
    std::variant<CorrelationState, CovarianceState, PureStateVector> state;
    // A ground state picked from a degenerate (or numerically degenerate)
    // manifold by the engine's symmetry policy.
    bool degenerate = false;
};

// `model` is the unfrozen evolution model; GroundStateOf without a model
// refers to it. Throws EngineError when the engine cannot represent the state.
PreparedState prepare_initial_state(const ChainModel& model, const InitialStateSpec& init, Engine engine);

// Single-site entropies along one evolution. Times may be queried in any
// order; the exact engine is fastest for non-decreasing times.
class EntropyTrajectory {
public:
    EntropyTrajectory(const ChainModel& model, std::shared_ptr<const PreparedState> initial);
    ~EntropyTrajectory();
    EntropyTrajectory(EntropyTrajectory&&) noexcept;
    EntropyTrajectory& operator=(EntropyTrajectory&&) noexcept;

    std::vector<double> entropies(std::span<const Site> sites, double t);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct FlowSeries {
    Site frozen = 0;
    Site target = 0;
    int distance = 0;
    std::vector<double> times;
    std::vector<double> values; // signed, nats
    Engine engine = Engine::Exact;
    ModelParams params;
};

// Flow to several targets at once: values[i][k] is T at times[i], targets[k].
struct FlowProfile {
    Site frozen = 0;
    std::vector<Site> targets;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    Engine engine = Engine::Exact;
    ModelParams params;

    FlowSeries series(std::size_t target_index) const;
};

FlowProfile cumulative_flow_profile(const ChainModel& model, const InitialStateSpec& init, Site frozen,
                                    std::span<const Site> targets, std::span<const double> times, Engine engine);

FlowSeries cumulative_flow(const ChainModel& model, const InitialStateSpec& init, Site frozen, Site target,
                           std::span<const double> times, Engine engine);

inline constexpr double kDefaultRateStep = 0.01;

struct FlowRate {
    double rate = 0.0;           // central difference with step dt
    double half_step_rate = 0.0; // same with dt/2
    bool converged = false;      // the two agree to 1e-6 + 1e-3 |rate|
};

// dT/dt by central differences. Requires t > dt > 0.
FlowRate instantaneous_flow(const ChainModel& model, const InitialStateSpec& init, Site frozen, Site target,
                            double t, Engine engine, double dt = kDefaultRateStep);

// Mean of |T| over samples with t1 <= t <= t2. The window must lie inside the
// sampled range and hold at least 10 samples.
double late_time_average(const FlowSeries& series, double t1, double t2);

// S(rho_a | ground state of model) - S(rho_a | ground state of freeze(model, b)).
// Bdg resolves edge-mode near-degeneracy by even parity; exact throws
// EngineError on a degenerate ground state (use a tilt).
double delta_S_ground(const ChainModel& model, Site frozen, Site target, Engine engine);
double delta_S_ground(const ChainModel& model, Site frozen, Site target);

} // namespace liangflow
