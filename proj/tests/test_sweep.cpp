#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "fastlimit/config.hpp"
#include "fastlimit/sweep.hpp"

using namespace fastlimit;
namespace fs = std::filesystem;

namespace {

RunConfig small_sweep() {
    return parse_config(
        "system = fast_reaction\n"
        "nonlinearity.kind = affine\n"
        "grid.n = 128\n"
        "eps = 1e-2, 5e-3, 2.5e-3\n"
        "t_end = 0.05\n"
        "init.period = 8\n"
        "cells.time_windows = 4\n"
        "cells.space_windows = 4\n"
        "snapshot.cadence = 0\n"
        "seed = 3\n");
}

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = ss.str();
    }
    return files;
}

std::string first_line(const fs::path& p) {
    std::ifstream in(p);
    std::string line;
    std::getline(in, line);
    return line;
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::current_path() / "sweep_test_output" / name;
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("constant data sweep") {
    RunConfig c = small_sweep();
    c.init.generator = InitialGenerator::Constant;
    c.init.value = 1.3;
    const SweepReport r = run_sweep(c, {.write_files = false});
    REQUIRE(r.all_ok());
    REQUIRE(r.table.size() == 2);
    for (const auto& row : r.table) {
        CHECK(*row.cauchy_v == 0.0);
        CHECK(*row.cauchy_u == 0.0);
        CHECK(row.mean_dirac_v == 1.0);
        CHECK(row.mean_dirac_u == 1.0);
        CHECK(row.lambda2 == 0.0);
    }
    for (const auto& run : r.runs)
        for (const auto& cell : run.cells) CHECK(cell.lambda == std::array<double, 3>{0.0, 0.0, 1.0});
}

TEST_CASE("outputs do not depend on the worker count") {
    const RunConfig c = small_sweep();
    const fs::path a = fresh_dir("serial");
    const fs::path b = fresh_dir("parallel");
    const SweepReport ra = run_sweep(c, {.workers = 1, .output_dir = a.string()});
    const SweepReport rb = run_sweep(c, {.workers = 3, .output_dir = b.string()});
    REQUIRE(ra.all_ok());
    auto fa = read_tree(a);
    auto fb = read_tree(b);
    fa.erase("timing.json");
    fb.erase("timing.json");
    CHECK(fa.size() > 10);
    REQUIRE(fa.size() == fb.size());
    for (const auto& [name, content] : fa) {
        INFO(name);
        REQUIRE(fb.count(name));
        CHECK(fb[name] == content);
    }
    CHECK(report_json(ra) == report_json(rb));
}

TEST_CASE("golden schema") {
    CHECK(std::string(schema::snapshot_fast_reaction) == "cell_index,x,u,v");
    CHECK(std::string(schema::snapshot_forward_backward) == "cell_index,x,u,v_derived");
    CHECK(std::string(schema::diagnostics_fast_reaction) ==
          "t,mass,energy_id,energy_cubic,energy_step,dissip_gradv,dissip_reaction");
    CHECK(std::string(schema::diagnostics_forward_backward) == "t,mass_u,lyapunov_id,dissip_gradv,dissip_ut");
    CHECK(std::string(schema::cells) ==
          "t_window,x_window,lambda1,lambda2,lambda3,v_bar,dirac_score_v,dirac_score_u,fit_residual");
    CHECK(std::string(schema::identities) == "cell_id,variant,tau0,lambda0,lhs,rhs,residual,tolerance");

    const fs::path out = fresh_dir("schema");
    RunConfig c = small_sweep();
    c.eps = {1e-2, 5e-3};
    run_sweep(c, {.output_dir = out.string()});
    const fs::path e0 = out / "eps_0";
    CHECK(first_line(e0 / "snapshot_0000.csv") == "cell_index,x,u,v");
    CHECK(first_line(e0 / "diagnostics.csv") ==
          "t,mass,energy_id,energy_cubic,energy_step,dissip_gradv,dissip_reaction");
    CHECK(first_line(e0 / "cells.csv") ==
          "t_window,x_window,lambda1,lambda2,lambda3,v_bar,dirac_score_v,dirac_score_u,fit_residual");
    CHECK(first_line(e0 / "identities.csv") == "cell_id,variant,tau0,lambda0,lhs,rhs,residual,tolerance");
    CHECK(fs::exists(e0 / "measures.json"));
    CHECK(fs::exists(out / "report.json"));

    const fs::path fbo = fresh_dir("schema_fb");
    RunConfig f = small_sweep();
    f.system = SystemKind::ForwardBackward;
    f.eps = {1e-2, 5e-3};
    f.t_end = 0.05;
    f.snapshots = SnapshotExport::Final;
    run_sweep(f, {.output_dir = fbo.string()});
    int snaps = 0;
    for (const auto& e : fs::directory_iterator(fbo / "eps_0"))
        snaps += e.path().filename().string().rfind("snapshot_", 0) == 0;
    CHECK(snaps == 1);
    for (const auto& e : fs::directory_iterator(fbo / "eps_0"))
        if (e.path().filename().string().rfind("snapshot_", 0) == 0)
            CHECK(first_line(e.path()) == "cell_index,x,u,v_derived");
    CHECK(first_line(fbo / "eps_0" / "diagnostics.csv") == "t,mass_u,lyapunov_id,dissip_gradv,dissip_ut");
}

TEST_CASE("convergence table") {
    const SweepReport r = run_sweep(small_sweep(), {.write_files = false});
    CHECK(r.table.size() == r.config.eps.size() - 1);
    const std::string text = convergence_table(r);
    std::istringstream is(text);
    std::string line;
    int lines = 0;
    while (std::getline(is, line)) ++lines;
    CHECK(lines == int(r.table.size()) + 1);
    CHECK(text.find("dirac_v") != std::string::npos);

    const SweepReport back = parse_report_json(report_json(r));
    REQUIRE(back.table.size() == r.table.size());
    for (std::size_t k = 0; k < r.table.size(); ++k) {
        CHECK(back.table[k].eps == r.table[k].eps);
        CHECK(back.table[k].cauchy_v == r.table[k].cauchy_v);
        CHECK(back.table[k].mean_dirac_u == r.table[k].mean_dirac_u);
    }
    CHECK(convergence_table(back) == text);

    SweepReport single;
    single.config.eps = {1e-2};
    single.runs.resize(1);
    CHECK_THROWS_AS(convergence_table(single), std::invalid_argument);
    CHECK_THROWS(parse_report_json("{not json"));
}

TEST_CASE("a failing eps does not affect the others") {
    // forward-backward steps scale with eps, so the largest eps yields too few
    // snapshots per cell while the smaller one is fine
    RunConfig c = parse_config(
        "system = forward_backward\n"
        "nonlinearity.kind = affine\n"
        "grid.n = 64\n"
        "eps = 1e-2, 1e-4\n"
        "t_end = 0.1\n"
        "dt = 1\n"
        "snapshot.cadence = 0\n");
    const SweepReport r = run_sweep(c, {.write_files = false});
    REQUIRE(r.runs.size() == 2);
    CHECK_FALSE(r.runs[0].ok);
    CHECK(r.runs[0].error_kind == "measure");
    CHECK(r.runs[0].eps == 1e-2);
    CHECK(r.runs[1].ok);
    CHECK(r.runs[1].error.empty());
    CHECK_FALSE(r.all_ok());
    REQUIRE(r.table.size() == 1);
    CHECK_FALSE(r.table[0].cauchy_v.has_value());
    CHECK(convergence_table(r).find("failed") != std::string::npos);
}
