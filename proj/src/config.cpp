#include "liangflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "liangflow/error.hpp"

namespace liangflow {

namespace {

struct Entry {
    std::string value;
    int line;
};

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos)
            return out;
        start = pos + 1;
    }
}

double round12(double x) { return std::round(x * 1e12) / 1e12; }

// Throws std::invalid_argument; callers attach the line number.
double to_double(std::string_view s) {
    s = trim(s);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        throw std::invalid_argument("expected a finite number, got '" + std::string(s) + "'");
    return v;
}

int to_int(std::string_view s) {
    s = trim(s);
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("expected an integer, got '" + std::string(s) + "'");
    return v;
}

const std::set<std::string, std::less<>> kKnownKeys = {
    "experiment", "L",         "lambda_grid",  "beta",         "normalization", "field_grid",
    "kappa_grid", "tilt",      "init",         "init_field",   "frozen_site",   "side",
    "distances",  "target_site", "frozen_sites", "times",      "t_max",         "dt",
    "window_start", "window_end", "engine",    "lightcone_threshold", "output", "workers",
};

class Reader {
public:
    explicit Reader(std::map<std::string, Entry, std::less<>> entries) : entries_(std::move(entries)) {}

    bool has(std::string_view key) const { return entries_.count(key) != 0; }
    int line(std::string_view key) const {
        const auto it = entries_.find(key);
        return it == entries_.end() ? 0 : it->second.line;
    }

    template <class F>
    auto get(std::string_view key, F&& convert) -> std::optional<decltype(convert(std::string_view{}))> {
        const auto it = entries_.find(key);
        if (it == entries_.end())
            return std::nullopt;
        used_.insert(std::string(key));
        try {
            return convert(std::string_view(it->second.value));
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError(it->second.line, std::string(key) + ": " + e.what());
        }
    }

    // Keys present in the file but meaningless for the experiment.
    void reject_unused() const {
        for (const auto& [key, entry] : entries_)
            if (!used_.count(key))
                throw ConfigError(entry.line, "key '" + key + "' is not used by this experiment");
    }

private:
    std::map<std::string, Entry, std::less<>> entries_;
    std::set<std::string, std::less<>> used_;
};

Experiment parse_experiment(std::string_view s) {
    static const std::pair<std::string_view, Experiment> names[] = {
        {"aah_heatmap", Experiment::AahHeatmap}, {"aah_crosscut", Experiment::AahCrosscut},
        {"tfim_map", Experiment::TfimMap},       {"tfim_profile", Experiment::TfimProfile},
        {"annni_ed", Experiment::AnnniEd},       {"delta_sg", Experiment::DeltaSg},
        {"frozen_site_sweep", Experiment::FrozenSiteSweep},
    };
    for (const auto& [name, e] : names)
        if (s == name)
            return e;
    throw std::invalid_argument("unknown experiment '" + std::string(s) + "'");
}

InitKind parse_init(std::string_view s) {
    if (s == "neel")
        return InitKind::Neel;
    if (s == "ground_state")
        return InitKind::GroundState;
    if (s == "ferromagnetic")
        return InitKind::Ferromagnetic;
    if (s == "ferromagnetic_cat")
        return InitKind::FerromagneticCat;
    throw std::invalid_argument("expected neel, ground_state, ferromagnetic or ferromagnetic_cat");
}

Engine parse_engine(std::string_view s) {
    if (s == "quadratic")
        return Engine::Quadratic;
    if (s == "bdg")
        return Engine::Bdg;
    if (s == "exact")
        return Engine::Exact;
    throw std::invalid_argument("expected quadratic, bdg or exact");
}

std::vector<int> to_int_list(std::string_view s) {
    std::vector<int> out;
    for (double v : expand_grid(s)) {
        if (v != std::floor(v) || std::abs(v) > 1e9)
            throw std::invalid_argument("expected integers");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

bool is_aah(Experiment e) { return e == Experiment::AahHeatmap || e == Experiment::AahCrosscut; }

} // namespace

std::string_view experiment_name(Experiment e) {
    switch (e) {
    case Experiment::AahHeatmap:
        return "aah_heatmap";
    case Experiment::AahCrosscut:
        return "aah_crosscut";
    case Experiment::TfimMap:
        return "tfim_map";
    case Experiment::TfimProfile:
        return "tfim_profile";
    case Experiment::AnnniEd:
        return "annni_ed";
    case Experiment::DeltaSg:
        return "delta_sg";
    case Experiment::FrozenSiteSweep:
        return "frozen_site_sweep";
    }
    return "unknown";
}

std::vector<double> expand_grid(std::string_view text) {
    text = trim(text);
    if (text.empty())
        throw std::invalid_argument("empty grid");
    std::vector<double> out;
    if (text.find(':') != std::string_view::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3)
            throw std::invalid_argument("grid must be start:stop:step");
        const double start = to_double(parts[0]);
        const double stop = to_double(parts[1]);
        const double step = to_double(parts[2]);
        if (!(step > 0.0))
            throw std::invalid_argument("grid step must be positive");
        if (stop < start)
            throw std::invalid_argument("grid stop below start");
        const double span = (stop - start) / step;
        if (span > 1e6)
            throw std::invalid_argument("grid has more than a million points");
        const auto n = static_cast<long>(std::floor(span + 1e-9)) + 1;
        for (long i = 0; i < n; ++i)
            out.push_back(round12(start + static_cast<double>(i) * step));
        return out;
    }
    for (auto item : split(text, ','))
        out.push_back(round12(to_double(item)));
    return out;
}

SweepConfig parse_config(std::string_view text) {
    std::map<std::string, Entry, std::less<>> entries;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? end : end - start);
        start = end == std::string_view::npos ? text.size() + 1 : end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty())
            throw ConfigError(line_no, "missing key");
        if (!kKnownKeys.count(key))
            throw ConfigError(line_no, "unknown key '" + key + "'");
        if (value.empty())
            throw ConfigError(line_no, "missing value for '" + key + "'");
        if (entries.count(key))
            throw ConfigError(line_no, "duplicate key '" + key + "'");
        entries.emplace(key, Entry{value, line_no});
    }

    Reader r(std::move(entries));
    SweepConfig c;
    const auto experiment = r.get("experiment", parse_experiment);
    if (!experiment)
        throw ConfigError(0, "missing key 'experiment'");
    c.experiment = *experiment;
    const Experiment e = c.experiment;
    const bool aah = is_aah(e);
    const auto fail = [&](std::string_view key, const std::string& msg) -> ConfigError {
        return ConfigError(r.line(key), msg);
    };

    // Size.
    const int default_length = aah ? 610 : (e == Experiment::AnnniEd ? 12 : 250);
    c.length = r.get("L", to_int).value_or(default_length);
    if (c.length < 3)
        throw fail("L", "L must be at least 3");
    if (e == Experiment::AnnniEd && c.length > kMaxExactSites)
        throw fail("L", "annni_ed runs exact dynamics; L must not exceed " + std::to_string(kMaxExactSites));

    // Model parameters.
    if (aah) {
        c.lambdas = r.get("lambda_grid", expand_grid).value_or(expand_grid("0.1:3.5:0.05"));
        c.beta = r.get("beta", to_double).value_or(kInverseGoldenRatio);
        c.normalization = r.get("normalization", [](std::string_view s) {
                               if (s == "spin_half")
                                   return AahNormalization::SpinHalf;
                               if (s == "pauli")
                                   return AahNormalization::Pauli;
                               throw std::invalid_argument("expected spin_half or pauli");
                           }).value_or(AahNormalization::SpinHalf);
        if (c.lambdas.empty())
            throw fail("lambda_grid", "lambda grid is empty");
    } else {
        c.fields = r.get("field_grid", expand_grid)
                       .value_or(e == Experiment::TfimProfile      ? std::vector<double>{0.5}
                                 : e == Experiment::FrozenSiteSweep ? std::vector<double>{0.9}
                                                                    : expand_grid("0.05:2.0:0.05"));
        const bool tfim_only = e == Experiment::TfimMap || e == Experiment::TfimProfile;
        if (tfim_only) {
            c.kappas = {0.0};
        } else {
            c.kappas = r.get("kappa_grid", expand_grid)
                           .value_or(e == Experiment::AnnniEd ? std::vector<double>{0.2} : std::vector<double>{0.0});
        }
        c.tilt = r.get("tilt", to_double);
        for (double b : c.fields)
            if (b < 0.0)
                throw fail("field_grid", "fields must be non-negative");
        for (double k : c.kappas)
            if (k < 0.0 || k >= 0.5)
                throw fail("kappa_grid", "kappa must lie in [0, 0.5)");
        if (c.tilt && *c.tilt < 0.0)
            throw fail("tilt", "tilt must be non-negative");
    }

    // Initial state.
    if (e != Experiment::DeltaSg) {
        c.init = r.get("init", parse_init).value_or(aah ? InitKind::Neel : InitKind::GroundState);
        c.init_field = r.get("init_field", to_double);
        if (c.init_field && (aah || c.init != InitKind::GroundState))
            throw fail("init_field", "init_field applies to ground-state initial states of Ising chains");
        if (c.init_field && *c.init_field < 0.0)
            throw fail("init_field", "init_field must be non-negative");
    }

    c.engine = r.get("engine", parse_engine);
    c.side = r.get("side", [](std::string_view s) {
                  if (s == "right")
                      return TargetSide::Right;
                  if (s == "left")
                      return TargetSide::Left;
                  throw std::invalid_argument("expected right or left");
              }).value_or(TargetSide::Right);

    // Sites.
    const int n = c.length;
    const int sign = c.side == TargetSide::Right ? 1 : -1;
    if (e == Experiment::FrozenSiteSweep) {
        c.target_site = r.get("target_site", to_int).value_or(middle_site(n));
        if (c.target_site < 1 || c.target_site > n)
            throw fail("target_site", "target site outside the chain");
        // Target sits on `side` of the frozen site: b = a - sign * d.
        const auto swept = r.get("frozen_sites", to_int_list);
        if (swept) {
            c.frozen_sites = *swept;
        } else {
            const auto dists = r.get("distances", to_int_list);
            if (dists) {
                for (int d : *dists)
                    c.frozen_sites.push_back(c.target_site - sign * d);
            } else {
                for (int d = 1;; ++d) {
                    const Site b = c.target_site - sign * d;
                    if (b < 1 || b > n)
                        break;
                    c.frozen_sites.push_back(b);
                }
            }
        }
        if (c.frozen_sites.empty())
            throw fail("frozen_sites", "no frozen sites to sweep");
        for (Site b : c.frozen_sites)
            if (b < 1 || b > n || b == c.target_site)
                throw fail(r.has("frozen_sites") ? "frozen_sites" : "distances",
                           "frozen site " + std::to_string(b) + " outside the chain or equal to the target");
    } else {
        const auto rule = r.get("frozen_site", [](std::string_view s) -> std::pair<FrozenRule, int> {
            if (s == "fibonacci")
                return {FrozenRule::Fibonacci, 0};
            if (s == "middle")
                return {FrozenRule::Middle, 0};
            return {FrozenRule::Explicit, to_int(s)};
        });
        c.frozen_rule = rule ? rule->first : (aah ? FrozenRule::Fibonacci : FrozenRule::Middle);
        switch (c.frozen_rule) {
        case FrozenRule::Fibonacci:
            c.frozen_site = fibonacci_frozen_site(n);
            break;
        case FrozenRule::Middle:
            c.frozen_site = middle_site(n);
            break;
        case FrozenRule::Explicit:
            c.frozen_site = rule->second;
            break;
        }
        if (c.frozen_site < 1 || c.frozen_site > n)
            throw fail("frozen_site", "frozen site outside the chain");

        const auto dists = r.get("distances", to_int_list);
        if (dists) {
            c.distances = *dists;
        } else if (e == Experiment::AahHeatmap) {
            for (int d = 1; d <= 30; ++d)
                c.distances.push_back(d);
        } else if (e == Experiment::AahCrosscut) {
            c.distances = {1, 15};
        } else if (e == Experiment::TfimProfile) {
            for (int d = 1;; ++d) {
                const Site a = c.frozen_site + sign * d;
                if (a < 1 || a > n)
                    break;
                c.distances.push_back(d);
            }
        } else {
            c.distances = {3};
        }
        if (c.distances.empty())
            throw fail("distances", "no target distances");
        for (int d : c.distances) {
            const Site a = c.frozen_site + sign * d;
            if (d < 1 || a < 1 || a > n)
                throw fail("distances", "distance " + std::to_string(d) + " puts the target outside the chain");
        }
    }

    // Time grid.
    if (e != Experiment::DeltaSg) {
        const auto times = r.get("times", expand_grid);
        c.dt = r.get("dt", to_double).value_or(1.0);
        c.t_max = r.get("t_max", to_double).value_or(aah ? 200.0 : 30.0);
        if (!(c.dt > 0.0))
            throw fail("dt", "dt must be positive");
        if (!(c.t_max > 0.0))
            throw fail("t_max", "t_max must be positive");
        if (times) {
            if (r.has("dt") || r.has("t_max"))
                throw fail("times", "give either times or t_max/dt, not both");
            c.times = *times;
            if (!std::is_sorted(c.times.begin(), c.times.end()) ||
                std::adjacent_find(c.times.begin(), c.times.end()) != c.times.end())
                throw fail("times", "times must be strictly increasing");
            if (c.times.front() < 0.0)
                throw fail("times", "times must be non-negative");
            c.t_max = c.times.back();
        } else {
            const auto steps = static_cast<long>(std::floor(c.t_max / c.dt + 1e-9));
            if (steps > 1000000)
                throw fail("dt", "time grid has more than a million samples");
            for (long i = 0; i <= steps; ++i)
                c.times.push_back(round12(static_cast<double>(i) * c.dt));
        }
        if (e == Experiment::TfimProfile) {
            std::set<double> distinct(c.times.begin(), c.times.end());
            distinct.erase(0.0);
            if (distinct.size() < 3)
                throw fail("times", "a lightcone fit needs at least 3 distinct positive times");
        }
    }

    if (aah) {
        c.window_start = r.get("window_start", to_double).value_or(std::min(100.0, c.t_max));
        c.window_end = r.get("window_end", to_double).value_or(c.t_max);
        if (!(c.window_start <= c.window_end) || c.window_start < 0.0 || c.window_end > c.t_max)
            throw fail(r.has("window_start") ? "window_start" : "window_end", "window must lie inside [0, t_max]");
        const auto inside = std::count_if(c.times.begin(), c.times.end(),
                                          [&](double t) { return t >= c.window_start && t <= c.window_end; });
        if (inside < 10)
            throw fail(r.has("window_start") ? "window_start" : "window_end",
                       "averaging window holds fewer than 10 samples");
    }

    if (e == Experiment::TfimProfile) {
        c.lightcone_threshold = r.get("lightcone_threshold", to_double).value_or(1e-6);
        if (!(c.lightcone_threshold > 0.0))
            throw fail("lightcone_threshold", "threshold must be positive");
    }

    c.output = r.get("output", [](std::string_view s) { return std::string(s); }).value_or("");
    c.workers = r.get("workers", to_int).value_or(0);
    if (c.workers < 0)
        throw fail("workers", "workers must be non-negative");

    r.reject_unused();
    return c;
}

SweepConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError(0, "cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace liangflow
