#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "liangflow/config.hpp"

namespace liangflow {

struct ResultRow {
    std::string experiment;
    int length = 0;
    double param1 = 0.0; // lambda or B
    double param2 = 0.0; // beta or kappa
    Site frozen = 0;
    Site target = 0;
    int distance = 0;
    double time = 0.0;
    double value = 0.0; // signed
    // |T| column; |value| when unset. Window averages set it to mean |T|.
    std::optional<double> magnitude;
    std::string engine;
    std::vector<std::pair<std::string, double>> extras;
};

struct ResultTable {
    std::vector<ResultRow> rows;
};

// Runs job(0..count-1) on up to `workers` threads (0: hardware concurrency),
// handing out indices from a shared counter. Jobs write to disjoint slots, so
// results do not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t count, int workers, const std::function<void(std::size_t)>& job);

ResultTable run_experiment(const SweepConfig& config);

inline constexpr const char* kCsvHeader =
    "experiment,L,param1,param2,b,a,d,t,T_signed,T_abs,engine,extra_key,extra_val";

void write_csv(const ResultTable& table, std::ostream& out);
// Throws std::runtime_error on I/O failure.
void emit_csv(const ResultTable& table, const std::string& path);

// Shortest round-trip text with 17 significant digits.
std::string format_number(double value);

struct ProfileSnapshot {
    double time = 0.0;
    std::vector<int> distances;
    std::vector<double> magnitudes; // |T_d|
};

struct LightconeFit {
    double velocity = 0.0;
    double intercept = 0.0;
    std::vector<double> times;
    std::vector<int> fronts;
};

inline constexpr double kDefaultFrontThreshold = 1e-6;

// Front = largest d with |T_d| >= threshold. Least-squares line through
// (t, front). Needs at least 3 distinct times; throws EngineError when some
// profile has no point above threshold.
LightconeFit fit_lightcone_velocity(const std::vector<ProfileSnapshot>& profiles,
                                    double threshold = kDefaultFrontThreshold);

} // namespace liangflow
