#include "liangflow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <ostream>
#include <set>
#include <stdexcept>
#include <thread>

#include "liangflow/error.hpp"

namespace liangflow {

namespace {

struct ParamPoint {
    double param1;
    double param2;
};

std::vector<ParamPoint> param_points(const SweepConfig& c) {
    std::vector<ParamPoint> out;
    if (c.experiment == Experiment::AahHeatmap || c.experiment == Experiment::AahCrosscut) {
        for (double l : c.lambdas)
            out.push_back({l, c.beta});
    } else {
        for (double k : c.kappas)
            for (double b : c.fields)
                out.push_back({b, k});
    }
    return out;
}

constexpr double kDefaultTilt = 1e-4;
constexpr double kTiltBelowField = 0.1;

// Unset tilt: a small longitudinal field selects one ferromagnetic ground
// state in exact runs at weak transverse field, where the two are nearly
// degenerate. Pairing-engine runs (kappa = 0 Ising sweeps) stay untilted.
double point_tilt(const SweepConfig& c, const ParamPoint& p) {
    if (c.tilt)
        return *c.tilt;
    const bool exact_ground_state =
        (c.experiment == Experiment::AnnniEd && c.init == InitKind::GroundState) ||
        (c.experiment == Experiment::DeltaSg && p.param2 != 0.0);
    return exact_ground_state && p.param1 < kTiltBelowField ? kDefaultTilt : 0.0;
}

ChainModel point_model(const SweepConfig& c, const ParamPoint& p) {
    if (c.experiment == Experiment::AahHeatmap || c.experiment == Experiment::AahCrosscut)
        return build_aah(c.length, p.param1, p.param2, c.normalization);
    return build_annni(c.length, p.param2, p.param1, point_tilt(c, p));
}

InitialStateSpec point_init(const SweepConfig& c, const ParamPoint& p) {
    switch (c.init) {
    case InitKind::Neel:
        return Neel{};
    case InitKind::Ferromagnetic:
        return Ferromagnetic{};
    case InitKind::FerromagneticCat:
        return FerromagneticCat{};
    case InitKind::GroundState:
        if (c.init_field)
            return GroundStateOf{build_annni(c.length, p.param2, *c.init_field, point_tilt(c, {*c.init_field, p.param2}))};
        return GroundStateOf{};
    }
    return Neel{};
}

Engine point_engine(const SweepConfig& c, const ChainModel& model) {
    if (c.engine)
        return *c.engine;
    if (c.experiment == Experiment::AnnniEd)
        return Engine::Exact;
    return default_engine(model);
}

std::vector<Site> targets_of(const SweepConfig& c) {
    const int sign = c.side == TargetSide::Right ? 1 : -1;
    std::vector<Site> out;
    for (int d : c.distances)
        out.push_back(c.frozen_site + sign * d);
    return out;
}

ResultRow base_row(const SweepConfig& c, const ParamPoint& p, Engine engine) {
    ResultRow r;
    r.experiment = std::string(experiment_name(c.experiment));
    r.length = c.length;
    r.param1 = p.param1;
    r.param2 = p.param2;
    r.engine = std::string(engine_name(engine));
    return r;
}

// One row per (target, time), targets outer.
void append_series_rows(const SweepConfig& c, const ParamPoint& p, const FlowProfile& f,
                        std::vector<ResultRow>& rows) {
    for (std::size_t k = 0; k < f.targets.size(); ++k) {
        for (std::size_t i = 0; i < f.times.size(); ++i) {
            ResultRow r = base_row(c, p, f.engine);
            r.frozen = f.frozen;
            r.target = f.targets[k];
            r.distance = std::abs(r.target - r.frozen);
            r.time = f.times[i];
            r.value = f.values[i][k];
            rows.push_back(std::move(r));
        }
    }
}

std::vector<ResultRow> run_aah(const SweepConfig& c, const ParamPoint& p) {
    const ChainModel model = point_model(c, p);
    const Engine engine = point_engine(c, model);
    const std::vector<Site> targets = targets_of(c);
    const bool heatmap = c.experiment == Experiment::AahHeatmap;

    // The heatmap only reports window averages, so only window samples are computed.
    std::vector<double> times;
    for (double t : c.times)
        if (!heatmap || (t >= c.window_start && t <= c.window_end))
            times.push_back(t);
    const FlowProfile f = cumulative_flow_profile(model, point_init(c, p), c.frozen_site, targets, times, engine);

    std::vector<ResultRow> rows;
    if (!heatmap) {
        append_series_rows(c, p, f, rows);
        const std::size_t per_target = f.times.size();
        for (std::size_t k = 0; k < f.targets.size(); ++k) {
            const double avg = late_time_average(f.series(k), c.window_start, c.window_end);
            for (std::size_t i = 0; i < per_target; ++i)
                rows[k * per_target + i].extras = {{"window_average", avg}};
        }
        return rows;
    }
    for (std::size_t k = 0; k < f.targets.size(); ++k) {
        const FlowSeries s = f.series(k);
        double signed_sum = 0.0;
        for (double v : s.values)
            signed_sum += v;
        const auto count = static_cast<double>(s.values.size());
        ResultRow r = base_row(c, p, engine);
        r.frozen = s.frozen;
        r.target = s.target;
        r.distance = s.distance;
        r.time = c.window_end;
        // Signed column holds the mean signed flow; |.| column the mean of |T|.
        r.value = signed_sum / count;
        r.magnitude = late_time_average(s, c.window_start, c.window_end);
        r.extras = {{"window_start", c.window_start}, {"window_end", c.window_end}};
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> run_series(const SweepConfig& c, const ParamPoint& p) {
    const ChainModel model = point_model(c, p);
    const Engine engine = point_engine(c, model);
    const std::vector<Site> targets = targets_of(c);
    const FlowProfile f = cumulative_flow_profile(model, point_init(c, p), c.frozen_site, targets, c.times, engine);
    std::vector<ResultRow> rows;
    append_series_rows(c, p, f, rows);
    if (c.experiment == Experiment::AnnniEd)
        for (auto& r : rows)
            r.extras = {{"critical_field", critical_field(p.param2)}};
    return rows;
}

std::vector<ResultRow> run_profile(const SweepConfig& c, const ParamPoint& p) {
    const ChainModel model = point_model(c, p);
    const Engine engine = point_engine(c, model);
    const std::vector<Site> targets = targets_of(c);
    const FlowProfile f = cumulative_flow_profile(model, point_init(c, p), c.frozen_site, targets, c.times, engine);

    std::vector<ProfileSnapshot> snaps;
    for (std::size_t i = 0; i < f.times.size(); ++i) {
        if (f.times[i] <= 0.0)
            continue;
        ProfileSnapshot s;
        s.time = f.times[i];
        s.distances = c.distances;
        for (double v : f.values[i])
            s.magnitudes.push_back(std::abs(v));
        snaps.push_back(std::move(s));
    }
    const double reference = 2.0 * std::min(1.0, p.param1);
    double velocity = std::numeric_limits<double>::quiet_NaN();
    try {
        velocity = fit_lightcone_velocity(snaps, c.lightcone_threshold).velocity;
    } catch (const EngineError&) {
        // No front above threshold: reach is reported as NaN.
    }

    std::vector<ResultRow> rows;
    append_series_rows(c, p, f, rows);
    for (auto& r : rows)
        r.extras = {{"v_fit", velocity}, {"v_reference", reference}, {"lightcone_reach", velocity * r.time}};
    return rows;
}

std::vector<ResultRow> run_delta_sg(const SweepConfig& c, const ParamPoint& p) {
    const ChainModel model = point_model(c, p);
    const Engine engine = point_engine(c, model);
    std::vector<ResultRow> rows;
    for (Site a : targets_of(c)) {
        ResultRow r = base_row(c, p, engine);
        r.frozen = c.frozen_site;
        r.target = a;
        r.distance = std::abs(a - c.frozen_site);
        r.time = std::numeric_limits<double>::infinity();
        r.value = delta_S_ground(model, c.frozen_site, a, engine);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<ResultRow> run_frozen_sweep(const SweepConfig& c, const ParamPoint& p) {
    const ChainModel model = point_model(c, p);
    const Engine engine = point_engine(c, model);
    const auto initial = std::make_shared<const PreparedState>(prepare_initial_state(model, point_init(c, p), engine));
    const Site target[] = {c.target_site};

    // The unfrozen run does not depend on b and is computed once.
    EntropyTrajectory free_run(model, initial);
    std::vector<double> s_free;
    for (double t : c.times)
        s_free.push_back(free_run.entropies(target, t).front());

    std::vector<ResultRow> rows;
    for (Site b : c.frozen_sites) {
        EntropyTrajectory frozen_run(freeze(model, FrozenMask::single(b)), initial);
        for (std::size_t i = 0; i < c.times.size(); ++i) {
            ResultRow r = base_row(c, p, engine);
            r.frozen = b;
            r.target = c.target_site;
            r.distance = std::abs(b - c.target_site);
            r.time = c.times[i];
            r.value = s_free[i] - frozen_run.entropies(target, c.times[i]).front();
            rows.push_back(std::move(r));
        }
    }
    return rows;
}

std::vector<ResultRow> run_point(const SweepConfig& c, const ParamPoint& p) {
    switch (c.experiment) {
    case Experiment::AahHeatmap:
    case Experiment::AahCrosscut:
        return run_aah(c, p);
    case Experiment::TfimMap:
    case Experiment::AnnniEd:
        return run_series(c, p);
    case Experiment::TfimProfile:
        return run_profile(c, p);
    case Experiment::DeltaSg:
        return run_delta_sg(c, p);
    case Experiment::FrozenSiteSweep:
        return run_frozen_sweep(c, p);
    }
    return {};
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos)
        return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"')
            out += '"';
        out += ch;
    }
    return out + '"';
}

} // namespace

void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job) {
    if (count == 0)
        return;
    std::size_t threads = workers > 0 ? static_cast<std::size_t>(workers)
                                      : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count)
                return;
            try {
                job(i);
            } catch (...) {
                const std::lock_guard lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed.store(true);
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (std::size_t k = 0; k < threads; ++k)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (error)
        std::rethrow_exception(error);
}

ResultTable run_experiment(const SweepConfig& config) {
    const std::vector<ParamPoint> points = param_points(config);
    if (points.empty())
        throw ConfigError(0, "empty parameter grid");
    std::vector<std::vector<ResultRow>> slots(points.size());
    parallel_for(points.size(), config.workers,
                 [&](std::size_t i) { slots[i] = run_point(config, points[i]); });

    ResultTable table;
    for (auto& slot : slots)
        for (auto& row : slot)
            table.rows.push_back(std::move(row));
    return table;
}

std::string format_number(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

void write_csv(const ResultTable& table, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const auto& r : table.rows) {
        std::string keys;
        std::string vals;
        for (std::size_t k = 0; k < r.extras.size(); ++k) {
            if (k > 0) {
                keys += ';';
                vals += ';';
            }
            keys += r.extras[k].first;
            vals += format_number(r.extras[k].second);
        }
        const double magnitude = r.magnitude.value_or(std::abs(r.value));
        out << csv_field(r.experiment) << ',' << r.length << ',' << format_number(r.param1) << ','
            << format_number(r.param2) << ',' << r.frozen << ',' << r.target << ',' << r.distance << ','
            << format_number(r.time) << ',' << format_number(r.value) << ',' << format_number(magnitude) << ','
            << csv_field(r.engine) << ',' << csv_field(keys) << ',' << csv_field(vals) << '\n';
    }
}

void emit_csv(const ResultTable& table, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    write_csv(table, out);
    out.flush();
    if (!out)
        throw std::runtime_error("write to '" + path + "' failed");
}

LightconeFit fit_lightcone_velocity(const std::vector<ProfileSnapshot>& profiles, double threshold) {
    if (!(threshold > 0.0))
        throw std::invalid_argument("front threshold must be positive");
    std::set<double> distinct;
    for (const auto& p : profiles)
        distinct.insert(p.time);
    if (distinct.size() < 3)
        throw std::invalid_argument("lightcone fit needs profiles at 3 or more distinct times");

    LightconeFit fit;
    for (const auto& p : profiles) {
        if (p.distances.size() != p.magnitudes.size())
            throw std::invalid_argument("profile distances and values differ in length");
        int front = -1;
        for (std::size_t k = 0; k < p.distances.size(); ++k)
            if (std::abs(p.magnitudes[k]) >= threshold)
                front = std::max(front, p.distances[k]);
        if (front < 0)
            throw EngineError("no lightcone front above threshold at t = " + format_number(p.time));
        fit.times.push_back(p.time);
        fit.fronts.push_back(front);
    }
    const auto n = static_cast<double>(fit.times.size());
    double st = 0.0, sf = 0.0, stt = 0.0, stf = 0.0;
    for (std::size_t i = 0; i < fit.times.size(); ++i) {
        st += fit.times[i];
        sf += fit.fronts[i];
        stt += fit.times[i] * fit.times[i];
        stf += fit.times[i] * fit.fronts[i];
    }
    const double denom = n * stt - st * st;
    fit.velocity = (n * stf - st * sf) / denom;
    fit.intercept = (sf - fit.velocity * st) / n;
    return fit;
}

} // namespace liangflow
