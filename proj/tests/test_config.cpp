#include <doctest.h>

#include <string>

#include "liangflow/config.hpp"
#include "liangflow/error.hpp"

using namespace liangflow;

namespace {

int error_line(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.line();
    }
    return -1;
}

} // namespace

TEST_SUITE("config") {

TEST_CASE("a full AAH heatmap configuration") {
    const SweepConfig c = parse_config("# heatmap\n"
                                       "experiment = aah_heatmap\n"
                                       "L = 610\n"
                                       "lambda_grid = 0.5:3.5:0.1   # inclusive\n"
                                       "normalization = pauli\n"
                                       "frozen_site = fibonacci\n"
                                       "distances = 1:30:1\n"
                                       "t_max = 200\n"
                                       "dt = 1\n"
                                       "window_start = 100\n"
                                       "window_end = 200\n"
                                       "workers = 4\n");
    CHECK(c.experiment == Experiment::AahHeatmap);
    CHECK(c.length == 610);
    CHECK(c.lambdas.size() == 31);
    CHECK(c.lambdas.front() == 0.5);
    CHECK(c.lambdas.back() == 3.5);
    CHECK(c.lambdas[7] == 1.2);
    CHECK(c.normalization == AahNormalization::Pauli);
    CHECK(c.frozen_site == 378);
    CHECK(c.distances.size() == 30);
    CHECK(c.times.size() == 201);
    CHECK(c.times.back() == 200.0);
    CHECK(c.window_start == 100.0);
    CHECK(c.workers == 4);
    CHECK(c.init == InitKind::Neel);
    CHECK_FALSE(c.engine.has_value());
}

TEST_CASE("defaults per experiment") {
    const SweepConfig aah = parse_config("experiment = aah_heatmap");
    CHECK(aah.length == 610);
    CHECK(aah.normalization == AahNormalization::SpinHalf);
    CHECK(aah.lambdas.front() == 0.1);
    CHECK(aah.lambdas.back() == 3.5);
    CHECK(aah.frozen_site == 378);
    CHECK(aah.distances.size() == 30);
    CHECK(aah.window_start == 100.0);
    CHECK(aah.window_end == 200.0);

    const SweepConfig cross = parse_config("experiment = aah_crosscut");
    CHECK(cross.distances == std::vector<int>{1, 15});

    const SweepConfig tfim = parse_config("experiment = tfim_map");
    CHECK(tfim.length == 250);
    CHECK(tfim.fields.size() == 40);
    CHECK(tfim.kappas == std::vector<double>{0.0});
    CHECK(tfim.frozen_site == 125);
    CHECK(tfim.distances == std::vector<int>{3});
    CHECK(tfim.init == InitKind::GroundState);
    CHECK(tfim.t_max == 30.0);
    CHECK_FALSE(tfim.tilt.has_value());

    const SweepConfig profile = parse_config("experiment = tfim_profile\ntimes = 5:30:5");
    CHECK(profile.fields == std::vector<double>{0.5});
    CHECK(profile.distances.size() == 125);
    CHECK(profile.lightcone_threshold == 1e-6);

    const SweepConfig ed = parse_config("experiment = annni_ed");
    CHECK(ed.length == 12);
    CHECK(ed.kappas == std::vector<double>{0.2});

    const SweepConfig left = parse_config("experiment = tfim_profile\ntimes = 5:30:5\nside = left");
    CHECK(left.distances.size() == 124);

    const SweepConfig sweep = parse_config("experiment = frozen_site_sweep\nL = 20\ndistances = 1, 3");
    CHECK(sweep.target_site == 10);
    CHECK(sweep.frozen_sites == std::vector<Site>{9, 7});
    CHECK(sweep.fields == std::vector<double>{0.9});
}

TEST_CASE("exact-dynamics size guard") {
    const std::string text = "experiment = annni_ed\nL = 16\n";
    CHECK_THROWS_AS(parse_config(text), ConfigError);
    CHECK(error_line(text) == 2);
    CHECK_NOTHROW(parse_config("experiment = annni_ed\nL = 14\n"));
}

TEST_CASE("key errors carry line numbers") {
    CHECK(error_line("experiment = tfim_map\n\nfeild_grid = 0.5\n") == 3);
    CHECK(error_line("experiment = tfim_map\nL = 20\nL = 30\n") == 3);
    CHECK(error_line("experiment = tfim_map\nL =\n") == 2);
    CHECK(error_line("experiment = tfim_map\nL 20\n") == 2);
    CHECK(error_line("experiment = tfim_map\n = 20\n") == 2);
    CHECK(error_line("L = 20\n") == 0);
    CHECK(error_line("experiment = nonsense\n") == 1);
    // Known key that the experiment ignores.
    CHECK(error_line("experiment = tfim_map\nlambda_grid = 1.0\n") == 2);
    CHECK(error_line("experiment = aah_heatmap\nfield_grid = 1.0\n") == 2);
}

TEST_CASE("type errors carry line numbers") {
    CHECK(error_line("experiment = tfim_map\nL = twenty\n") == 2);
    CHECK(error_line("experiment = tfim_map\nL = 20.5\n") == 2);
    CHECK(error_line("experiment = tfim_map\n# note\nfield_grid = 0.1:x:0.1\n") == 3);
    CHECK(error_line("experiment = tfim_map\nfield_grid = 0.5, nan\n") == 2);
    CHECK(error_line("experiment = tfim_map\ninit = up\n") == 2);
    CHECK(error_line("experiment = tfim_map\nengine = gpu\n") == 2);
    CHECK(error_line("experiment = tfim_map\ndistances = 1.5\n") == 2);
}

TEST_CASE("value checks") {
    CHECK(error_line("experiment = tfim_map\ndt = 0\n") == 2);
    CHECK(error_line("experiment = tfim_map\ndt = -0.1\n") == 2);
    CHECK(error_line("experiment = tfim_map\nt_max = 0\n") == 2);
    CHECK(error_line("experiment = tfim_map\nL = 2\n") == 2);
    CHECK(error_line("experiment = tfim_map\nfield_grid = -0.5\n") == 2);
    CHECK(error_line("experiment = annni_ed\nkappa_grid = 0.5\n") == 2);
    CHECK(error_line("experiment = tfim_map\ntilt = -1\n") == 2);
    CHECK(error_line("experiment = tfim_map\nL = 20\nfrozen_site = 21\n") == 3);
    CHECK(error_line("experiment = tfim_map\nL = 20\nfrozen_site = 18\ndistances = 3\n") == 4);
    CHECK(error_line("experiment = tfim_map\ntimes = 1, 3, 2\n") == 2);
    CHECK(error_line("experiment = tfim_map\ntimes = 1, 2\nt_max = 5\n") == 2);
    CHECK(error_line("experiment = tfim_profile\ntimes = 0, 5, 10\n") == 2);
    CHECK(error_line("experiment = tfim_map\ninit = neel\ninit_field = 0.3\n") == 3);
    CHECK(error_line("experiment = tfim_map\nworkers = -1\n") == 2);
    CHECK(error_line("experiment = frozen_site_sweep\nL = 20\ntarget_site = 10\nfrozen_sites = 10\n") == 4);
}

TEST_CASE("averaging window must lie inside the time grid") {
    CHECK(error_line("experiment = aah_heatmap\nt_max = 100\nwindow_start = 50\nwindow_end = 150\n") == 3);
    CHECK(error_line("experiment = aah_heatmap\nt_max = 100\nwindow_start = 60\nwindow_end = 50\n") == 3);
    CHECK(error_line("experiment = aah_heatmap\nt_max = 100\nwindow_start = 95\nwindow_end = 100\n") == 3);
    CHECK_NOTHROW(parse_config("experiment = aah_heatmap\nt_max = 100\nwindow_start = 90\nwindow_end = 100\n"));
}

TEST_CASE("grid expansion") {
    CHECK(expand_grid("0.5:3.5:0.1").size() == 31);
    CHECK(expand_grid("0.05:2.0:0.05").size() == 40);
    CHECK(expand_grid("0.05:2.0:0.05")[2] == 0.15);
    CHECK(expand_grid("1:1:1") == std::vector<double>{1.0});
    CHECK(expand_grid("1:2.5:1") == std::vector<double>{1.0, 2.0});
    CHECK(expand_grid(" 1, 5 ,15 ") == std::vector<double>{1.0, 5.0, 15.0});
    CHECK_THROWS_AS(expand_grid(""), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("1:2"), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("1:2:0"), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("2:1:0.1"), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("1,,2"), std::invalid_argument);
    CHECK_THROWS_AS(expand_grid("0:1:1e-9"), std::invalid_argument);
}

TEST_CASE("missing files are configuration errors") {
    CHECK_THROWS_AS(load_config("/nonexistent/liangflow.cfg"), ConfigError);
}

} // TEST_SUITE
