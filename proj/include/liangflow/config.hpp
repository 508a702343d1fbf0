#pragma once

// Run configuration in a flat `key = value` format:
//
//   # comment
//   experiment   = aah_heatmap
//   lambda_grid  = 0.5:3.0:0.1      # start:stop:step, inclusive
//   distances    = 1, 5, 15         # comma-separated list
//
// Unknown keys, repeated keys and malformed values are errors carrying the
// offending line number.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "liangflow/liang.hpp"
#include "liangflow/model.hpp"

namespace liangflow {

enum class Experiment { AahHeatmap, AahCrosscut, TfimMap, TfimProfile, AnnniEd, DeltaSg, FrozenSiteSweep };

std::string_view experiment_name(Experiment e);

enum class InitKind { Neel, GroundState, Ferromagnetic, FerromagneticCat };
enum class FrozenRule { Explicit, Fibonacci, Middle };
enum class TargetSide { Right, Left };

inline constexpr int kMaxExactSites = 14;

struct SweepConfig {
    Experiment experiment = Experiment::AahHeatmap;
    int length = 0;

    // AAH.
    std::vector<double> lambdas;
    double beta = kInverseGoldenRatio;
    AahNormalization normalization = AahNormalization::SpinHalf;

    // Ising / ANNNI.
    std::vector<double> fields;
    std::vector<double> kappas;
    // Longitudinal tilt; unset means the per-experiment default.
    std::optional<double> tilt;

    InitKind init = InitKind::Neel;
    // Ground state of the chain at this field instead of the evolution field.
    std::optional<double> init_field;

    FrozenRule frozen_rule = FrozenRule::Fibonacci;
    Site frozen_site = 0; // resolved for every rule
    TargetSide side = TargetSide::Right;
    // Empty means the full profile to the chain end on `side`.
    std::vector<int> distances;

    // frozen_site_sweep: the fixed target and the swept frozen sites (empty
    // means every other site on the opposite side of `side`).
    Site target_site = 0;
    std::vector<Site> frozen_sites;

    std::vector<double> times;
    double t_max = 0.0;
    double dt = 0.0;
    double window_start = 0.0;
    double window_end = 0.0;

    std::optional<Engine> engine; // unset: default_engine per model
    double lightcone_threshold = 1e-6;

    std::string output;
    int workers = 0; // 0: hardware concurrency
};

SweepConfig parse_config(std::string_view text);
SweepConfig load_config(const std::string& path);

// Expands `start:stop:step` (inclusive) or a comma list. Values are rounded to
// 12 decimals so that grids print cleanly.
std::vector<double> expand_grid(std::string_view text);

} // namespace liangflow
