#include <doctest.h>

#include <string>

#include "fastlimit/config.hpp"
#include "fastlimit/error.hpp"

using namespace fastlimit;

namespace {

const std::string minimal =
    "system = fast_reaction\n"
    "nonlinearity.kind = affine\n"
    "grid.n = 256\n"
    "eps = 1e-2, 2.5e-3\n";

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
    const RunConfig c = parse_config(minimal);
    CHECK(c.system == SystemKind::FastReaction);
    CHECK(c.nonlinearity == canonical_affine_spec());
    CHECK(c.grid == Grid(256, 1.0));
    CHECK(c.eps == std::vector<double>{1e-2, 2.5e-3});
    CHECK(c.t_end == 0.5);
    CHECK(c.dt == 1e-3);
    CHECK(c.fb_c_dt == 0.5);
    CHECK(c.diffusion == DiffusionScheme::BackwardEuler);
    CHECK(c.init.generator == InitialGenerator::PhaseCheckerboard);
    CHECK(c.init.seed == 0);
    CHECK(c.time_windows == 8);
    CHECK(c.space_windows == 8);
    CHECK(c.bins_u == 128);
    CHECK(c.bins_v == 128);
    CHECK(c.cadence() == doctest::Approx(0.5 / 128));
    CHECK(c.output_dir == "out");
    CHECK(c.snapshots == SnapshotExport::All);
    CHECK(c.workers == 0);
    CHECK(c.identities);
    CHECK(c.measures);
}

TEST_CASE("cubic kind uses the canonical coefficients unless given") {
    RunConfig c = parse_config(
        "system = forward_backward\nnonlinearity.kind = cubic\ngrid.n = 64\neps = 1e-2\n");
    CHECK(c.system == SystemKind::ForwardBackward);
    CHECK(c.nonlinearity.cubic == std::array<double, 3>{1.0, -3.0, 2.5});
    c = parse_config(
        "system = forward_backward\nnonlinearity.kind = cubic\nnonlinearity.coefficients = 2, -6, 5\n"
        "grid.n = 64\neps = 1e-2\n");
    CHECK(c.nonlinearity.cubic == std::array<double, 3>{2.0, -6.0, 5.0});
}

TEST_CASE("validation errors") {
    CHECK(message_of("system = fast_reaction\nnonlinearity.kind = affine\ngrid.n = 64\neps = 1e-3, 1e-2\n")
              .find("strictly decreasing") != std::string::npos);
    CHECK(message_of("system = fast_reaction\nnonlinearity.kind = affine\ngrid.n = 64\neps = 1e-2, 1e-2\n")
              .find("strictly decreasing") != std::string::npos);
    CHECK(message_of("system = fast_reaction\nnonlinearity.kind = affine\ngrid.n = 64\neps = -1\n")
              .find("positive") != std::string::npos);
    CHECK(message_of("system = fast_reaction\nnonlinearity.kind = affine\neps = 1e-2\n")
              .find("grid.n") != std::string::npos);
    CHECK(message_of(minimal + "fb.c_dt = 1.5\n").find("fb.c_dt") != std::string::npos);
    CHECK(message_of(minimal + "init.r = 2.5\n").find("init.r") != std::string::npos);
    // monotone F is rejected by the shape check
    CHECK(message_of("system = fast_reaction\nnonlinearity.kind = affine\nnonlinearity.breakpoints = 0:0, 1:1\n"
                     "nonlinearity.slopes = 1, 2\ngrid.n = 64\neps = 1e-2\n")
              .find("nonlinearity") != std::string::npos);
}

TEST_CASE("parse errors carry line numbers") {
    CHECK(message_of(minimal + "grid.size = 3\n") == "line 5: unknown key 'grid.size'");
    CHECK(message_of("# comment\n\nsystem fast_reaction\n") == "line 3: expected 'key = value'");
    CHECK(message_of(minimal + "grid.n = 128\n").find("line 5: duplicate key") == 0);
    CHECK(message_of(minimal + "t_end = soon\n").find("line 5: t_end") == 0);
    CHECK(message_of(minimal + "system2 = x\nt_end = 0.1\n").find("line 5") == 0);
}

TEST_CASE("comments and whitespace") {
    const RunConfig c = parse_config(
        "  # full line comment\n"
        "system = fast_reaction   # trailing\n"
        "nonlinearity.kind=affine\n"
        "grid.n =   512\n"
        "eps = 1e-2 ,5e-3\n");
    CHECK(c.grid.n_cells == 512);
    CHECK(c.eps == std::vector<double>{1e-2, 5e-3});
}

TEST_CASE("serialize round-trips") {
    RunConfig c = parse_config(minimal);
    CHECK(parse_config(serialize(c)) == c);

    c.system = SystemKind::ForwardBackward;
    c.nonlinearity = canonical_cubic_spec();
    c.eps = {0.1, 1.0 / 30.0, 0.001};
    c.t_end = 0.125;
    c.dt = 1.0 / 7.0 * 1e-3;
    c.fb_c_dt = 0.9;
    c.diffusion = DiffusionScheme::CrankNicolson;
    c.init.generator = InitialGenerator::SineMix;
    c.init.seed = 123456789012345ULL;
    c.init.value = 0.3;
    c.init.r = 0.5;
    c.init.jitter = 0.1;
    c.time_windows = 4;
    c.space_windows = 16;
    c.bins_u = 64;
    c.entropy_tau0 = 0.55;
    c.entropy_h = 1e-4;
    c.snapshot_cadence = 0.01;
    c.output_dir = "results/run a";
    c.snapshots = SnapshotExport::Final;
    c.workers = 3;
    c.dirac_threshold = 0.95;
    c.delta_fraction = 0.1;
    c.identities = false;
    c.measures = false;
    const RunConfig back = parse_config(serialize(c));
    CHECK(back == c);
    CHECK(serialize(back) == serialize(c));
}

TEST_CASE("load_config") {
    const RunConfig c = load_config(std::string(FASTLIMIT_TEST_DATA) + "/cubic_fb.cfg");
    CHECK(c.system == SystemKind::ForwardBackward);
    CHECK_THROWS_AS(load_config(std::string(FASTLIMIT_TEST_DATA) + "/bad_eps.cfg"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/path.cfg"), ConfigError);
}

TEST_CASE("per-eps solver configs") {
    RunConfig c = parse_config(minimal + "t_end = 0.25\ndt = 5e-4\nseed = 9\n");
    const auto fr = c.fast_reaction(2.5e-3);
    CHECK(fr.eps == 2.5e-3);
    CHECK(fr.t_end == 0.25);
    CHECK(fr.dt_macro == 5e-4);
    CHECK(fr.init.seed == 9);
    CHECK(fr.snapshot_cadence == doctest::Approx(0.25 / 128));
    const auto fb = c.forward_backward(1e-2);
    CHECK(fb.c_dt == 0.5);
    CHECK(fb.dt_max == 5e-4);
}
