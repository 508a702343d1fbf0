#include "liangflow/liang.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "liangflow/entropy.hpp"
#include "liangflow/error.hpp"

namespace liangflow {

namespace {

constexpr double kZeroEnergy = 1e-10;
constexpr double kExactTolerance = 1e-10;

template <class... Fs>
struct overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
overloaded(Fs...) -> overloaded<Fs...>;

void check_sites(const ChainModel& model, Site frozen, std::span<const Site> targets) {
    const int n = model.length();
    if (frozen < 1 || frozen > n)
        throw std::out_of_range("frozen site outside chain");
    for (Site a : targets) {
        if (a < 1 || a > n)
            throw std::out_of_range("target site outside chain");
        if (a == frozen)
            throw std::invalid_argument("target site equals frozen site");
    }
}

void check_times(std::span<const double> times) {
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!std::isfinite(times[i]) || times[i] < 0.0)
            throw std::invalid_argument("sample times must be finite and non-negative");
        if (i > 0 && times[i] < times[i - 1])
            throw std::invalid_argument("sample times must be non-decreasing");
    }
}

// Fills every negative single-particle level.
PreparedState u1_ground_state(const ChainModel& model) {
    const U1Propagator prop(compile_u1(model));
    const Eigen::VectorXd& e = prop.energies();
    PreparedState out;
    out.engine = Engine::Quadratic;
    std::vector<int> filled;
    for (int k = 0; k < e.size(); ++k) {
        if (std::abs(e(k)) <= kZeroEnergy)
            out.degenerate = true;
        else if (e(k) < 0.0)
            filled.push_back(k);
    }
    Eigen::MatrixXd occupied(prop.length(), static_cast<Eigen::Index>(filled.size()));
    for (std::size_t k = 0; k < filled.size(); ++k)
        occupied.col(static_cast<Eigen::Index>(k)) = prop.modes().col(filled[k]);
    CorrelationState c;
    c.c = (occupied * occupied.transpose()).cast<std::complex<double>>();
    out.state = std::move(c);
    return out;
}

[[noreturn]] void unsupported(Engine engine, const char* state) {
    throw EngineError(std::string(engine_name(engine)) + " engine cannot represent the " + state + " state");
}

} // namespace

std::string_view engine_name(Engine engine) {
    switch (engine) {
    case Engine::Quadratic:
        return "quadratic";
    case Engine::Bdg:
        return "bdg";
    case Engine::Exact:
        return "exact";
    }
    return "unknown";
}

Engine default_engine(const ChainModel& model) {
    if (model.kind() == ModelKind::Aah)
        return Engine::Quadratic;
    if (!model.has_next_nearest() && model.params().tilt == 0.0 && !model.has_term(TermKind::HoppingXY))
        return Engine::Bdg;
    return Engine::Exact;
}

PreparedState prepare_initial_state(const ChainModel& model, const InitialStateSpec& init, Engine engine) {
    const int n = model.length();
    return std::visit(
        overloaded{
            [&](const Neel&) {
                PreparedState out;
                out.engine = engine;
                if (engine == Engine::Quadratic)
                    out.state = neel_state(n);
                else if (engine == Engine::Exact)
                    out.state = neel_product_state(n);
                else
                    unsupported(engine, "Neel");
                return out;
            },
            [&](const Ferromagnetic&) {
                PreparedState out;
                out.engine = engine;
                if (engine == Engine::Quadratic) {
                    CorrelationState c;
                    c.c = Eigen::MatrixXcd::Zero(n, n);
                    out.state = std::move(c);
                } else if (engine == Engine::Exact) {
                    out.state = all_down_state(n);
                } else {
                    unsupported(engine, "product ferromagnetic");
                }
                return out;
            },
            [&](const FerromagneticCat&) {
                PreparedState out;
                out.engine = engine;
                if (engine == Engine::Bdg)
                    out.state = ferromagnetic_cat_covariance(n);
                else if (engine == Engine::Exact)
                    out.state = ferromagnetic_cat_state(n);
                else
                    unsupported(engine, "ferromagnetic cat");
                return out;
            },
            [&](const GroundStateOf& g) {
                const ChainModel& source = g.model ? *g.model : model;
                if (source.length() != n)
                    throw std::invalid_argument("ground-state model has a different length");
                PreparedState out;
                out.engine = engine;
                switch (engine) {
                case Engine::Quadratic:
                    out = u1_ground_state(source);
                    break;
                case Engine::Bdg: {
                    CovarianceState m = ground_covariance(compile_bdg(source));
                    out.degenerate = m.degenerate;
                    out.state = std::move(m);
                    break;
                }
                case Engine::Exact: {
                    GroundState gs = model_ground_state(source);
                    out.degenerate = gs.degenerate;
                    out.state = std::move(gs.state);
                    break;
                }
                }
                return out;
            },
        },
        init);
}

struct EntropyTrajectory::Impl {
    std::shared_ptr<const PreparedState> initial;

    // Quadratic.
    std::unique_ptr<U1Propagator> u1;
    std::unique_ptr<U1Trajectory> u1_path;
    // Bdg.
    std::unique_ptr<BdgPropagator> bdg;
    // Exact: last evolved state, reused for later times.
    std::unique_ptr<ManyBodyHamiltonian> h;
    PureStateVector cached;
};

EntropyTrajectory::EntropyTrajectory(const ChainModel& model, std::shared_ptr<const PreparedState> initial)
    : impl_(std::make_unique<Impl>()) {
    if (!initial)
        throw std::invalid_argument("missing initial state");
    impl_->initial = std::move(initial);
    const PreparedState& init = *impl_->initial;
    switch (init.engine) {
    case Engine::Quadratic: {
        const auto* c0 = std::get_if<CorrelationState>(&init.state);
        if (!c0)
            throw EngineError("initial state is not a correlation matrix");
        impl_->u1 = std::make_unique<U1Propagator>(compile_u1(model));
        impl_->u1_path = std::make_unique<U1Trajectory>(*impl_->u1, *c0);
        break;
    }
    case Engine::Bdg: {
        const auto* m0 = std::get_if<CovarianceState>(&init.state);
        if (!m0)
            throw EngineError("initial state is not a Majorana covariance");
        impl_->bdg = std::make_unique<BdgPropagator>(compile_bdg(model));
        if (m0->length() != model.length())
            throw std::invalid_argument("initial state and model lengths differ");
        break;
    }
    case Engine::Exact: {
        const auto* psi = std::get_if<PureStateVector>(&init.state);
        if (!psi)
            throw EngineError("initial state is not a state vector");
        impl_->h = std::make_unique<ManyBodyHamiltonian>(assemble(model));
        if (psi->amplitudes.size() != impl_->h->dimension())
            throw std::invalid_argument("initial state and model dimensions differ");
        impl_->cached = *psi;
        impl_->cached.time = 0.0;
        break;
    }
    }
}

EntropyTrajectory::~EntropyTrajectory() = default;
EntropyTrajectory::EntropyTrajectory(EntropyTrajectory&&) noexcept = default;
EntropyTrajectory& EntropyTrajectory::operator=(EntropyTrajectory&&) noexcept = default;

std::vector<double> EntropyTrajectory::entropies(std::span<const Site> sites, double t) {
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument("evolution time must be finite and non-negative");
    const PreparedState& init = *impl_->initial;
    std::vector<double> out;
    out.reserve(sites.size());
    switch (init.engine) {
    case Engine::Quadratic:
        for (double n : impl_->u1_path->occupations(sites, t))
            out.push_back(binary_entropy(n));
        break;
    case Engine::Bdg: {
        const auto& m0 = std::get<CovarianceState>(init.state);
        for (double m : impl_->bdg->pair_elements(m0, sites, t))
            out.push_back(bloch_entropy(std::abs(m)));
        break;
    }
    case Engine::Exact: {
        if (t < impl_->cached.time) {
            impl_->cached = std::get<PureStateVector>(init.state);
            impl_->cached.time = 0.0;
        }
        if (t > impl_->cached.time)
            impl_->cached = evolve_exact(*impl_->h, impl_->cached, t - impl_->cached.time, kExactTolerance);
        impl_->cached.time = t;
        for (Site s : sites)
            out.push_back(entropy_2x2(single_site_rdm(impl_->cached, s)));
        break;
    }
    }
    return out;
}

FlowSeries FlowProfile::series(std::size_t target_index) const {
    if (target_index >= targets.size())
        throw std::out_of_range("target index");
    FlowSeries s;
    s.frozen = frozen;
    s.target = targets[target_index];
    s.distance = std::abs(s.target - frozen);
    s.times = times;
    s.values.reserve(values.size());
    for (const auto& row : values)
        s.values.push_back(row[target_index]);
    s.engine = engine;
    s.params = params;
    return s;
}

FlowProfile cumulative_flow_profile(const ChainModel& model, const InitialStateSpec& init, Site frozen,
                                    std::span<const Site> targets, std::span<const double> times, Engine engine) {
    check_sites(model, frozen, targets);
    check_times(times);

    const auto initial = std::make_shared<const PreparedState>(prepare_initial_state(model, init, engine));
    EntropyTrajectory free_run(model, initial);
    EntropyTrajectory frozen_run(freeze(model, FrozenMask::single(frozen)), initial);

    FlowProfile out;
    out.frozen = frozen;
    out.targets.assign(targets.begin(), targets.end());
    out.times.assign(times.begin(), times.end());
    out.engine = engine;
    out.params = model.params();
    out.values.reserve(times.size());
    for (double t : times) {
        const std::vector<double> s_free = free_run.entropies(targets, t);
        const std::vector<double> s_frozen = frozen_run.entropies(targets, t);
        std::vector<double> row(targets.size());
        for (std::size_t k = 0; k < targets.size(); ++k)
            row[k] = s_free[k] - s_frozen[k];
        out.values.push_back(std::move(row));
    }
    return out;
}

FlowSeries cumulative_flow(const ChainModel& model, const InitialStateSpec& init, Site frozen, Site target,
                           std::span<const double> times, Engine engine) {
    const Site targets[] = {target};
    return cumulative_flow_profile(model, init, frozen, targets, times, engine).series(0);
}

FlowRate instantaneous_flow(const ChainModel& model, const InitialStateSpec& init, Site frozen, Site target,
                            double t, Engine engine, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt))
        throw std::invalid_argument("rate step must be positive");
    if (!(t > dt))
        throw std::invalid_argument("rate time must exceed the step");
    const double h = dt / 2.0;
    const double times[] = {t - dt, t - h, t + h, t + dt};
    const FlowSeries s = cumulative_flow(model, init, frozen, target, times, engine);
    FlowRate r;
    r.rate = (s.values[3] - s.values[0]) / (2.0 * dt);
    r.half_step_rate = (s.values[2] - s.values[1]) / (2.0 * h);
    r.converged = std::abs(r.rate - r.half_step_rate) <= 1e-6 + 1e-3 * std::abs(r.rate);
    return r;
}

double late_time_average(const FlowSeries& series, double t1, double t2) {
    if (series.times.empty() || series.times.size() != series.values.size())
        throw std::invalid_argument("series is empty or malformed");
    if (!(t1 <= t2))
        throw std::invalid_argument("window start after window end");
    if (t1 < series.times.front() || t2 > series.times.back())
        throw std::invalid_argument("window outside the sampled range");
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < series.times.size(); ++i) {
        if (series.times[i] >= t1 && series.times[i] <= t2) {
            sum += std::abs(series.values[i]);
            ++count;
        }
    }
    if (count < 10)
        throw std::invalid_argument("averaging window holds fewer than 10 samples");
    return sum / count;
}

double delta_S_ground(const ChainModel& model, Site frozen, Site target, Engine engine) {
    const Site targets[] = {target};
    check_sites(model, frozen, targets);
    if (engine == Engine::Quadratic)
        throw EngineError("ground-state difference needs the bdg or exact engine");
    const ChainModel frozen_model = freeze(model, FrozenMask::single(frozen));
    const InitialStateSpec gs = GroundStateOf{};

    double s[2];
    const ChainModel* models[] = {&model, &frozen_model};
    for (int k = 0; k < 2; ++k) {
        const PreparedState p = prepare_initial_state(*models[k], gs, engine);
        if (engine == Engine::Exact && p.degenerate)
            throw EngineError("degenerate ground state; add a longitudinal tilt");
        if (engine == Engine::Bdg)
            s[k] = site_entropy_bdg(std::get<CovarianceState>(p.state), target);
        else
            s[k] = entropy_2x2(single_site_rdm(std::get<PureStateVector>(p.state), target));
    }
    return s[0] - s[1];
}

double delta_S_ground(const ChainModel& model, Site frozen, Site target) {
    return delta_S_ground(model, frozen, target, default_engine(model));
}

} // namespace liangflow
