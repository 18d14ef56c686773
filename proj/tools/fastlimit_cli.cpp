#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fastlimit/config.hpp"
#include "fastlimit/error.hpp"
#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/sweep.hpp"

using namespace fastlimit;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kSolver = 2;

int cmd_run(const std::string& path, int workers) {
    const RunConfig config = load_config(path);
    SweepOptions opts;
    if (workers >= 0) opts.workers = workers;
    if (const char* env = std::getenv("FASTLIMIT_OUTPUT_DIR"); env && *env) opts.output_dir = env;
    const SweepReport report = run_sweep(config, opts);
    const std::string out = opts.output_dir.value_or(config.output_dir);
    for (std::size_t k = 0; k < report.runs.size(); ++k) {
        const auto& r = report.runs[k];
        if (r.ok)
            std::printf("eps=%-10.4g ok     %6.2fs  mass drift %.2e  mean dirac v %.4f  u %.4f\n", r.eps,
                        report.wall_seconds[k], r.mass_drift, r.mean_dirac_v, r.mean_dirac_u);
        else
            std::printf("eps=%-10.4g FAILED (%s) %s\n", r.eps, r.error_kind.c_str(), r.error.c_str());
    }
    if (report.table.size() > 0) std::fputs(convergence_table(report).c_str(), stdout);
    std::printf("report: %s/report.json\n", out.c_str());
    for (const auto& r : report.runs)
        if (!r.ok) return r.error_kind == "validation" ? kValidation : kSolver;
    return kOk;
}

int cmd_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read report '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::fputs(convergence_table(parse_report_json(ss.str())).c_str(), stdout);
    return kOk;
}

const char* verdict(bool b) { return b ? "true" : "false"; }

int cmd_check(const std::string& path) {
    const RunConfig config = load_config(path);
    const Nonlinearity F(config.nonlinearity);
    const auto& t = F.thresholds();
    std::printf("kind            %s\n",
                F.kind() == NonlinearityKind::PiecewiseAffine ? "piecewise affine" : "cubic");
    std::printf("alpha-          %.12g\nalpha+          %.12g\nbeta-           %.12g\nbeta+           %.12g\n",
                t.alpha_minus, t.alpha_plus, t.beta_minus, t.beta_plus);
    std::printf("f-              %.12g\nf+              %.12g\n", t.f_minus, t.f_plus);
    const auto d = check_theorem_D(F);
    std::printf("theorem D       %s", verdict(d.holds));
    if (d.holds && d.witness_tau0) std::printf(" (witness tau0 = %.12g)", *d.witness_tau0);
    std::printf("\n");
    std::printf("nondegenerate (fast reaction)      %s\n",
                verdict(check_nondegeneracy(F, Variant::FastReaction)));
    std::printf("nondegenerate (forward-backward)   %s\n",
                verdict(check_nondegeneracy(F, Variant::ForwardBackward)));
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fast-reaction and forward-backward limit experiments"};
    app.require_subcommand(1);

    std::string run_path;
    int workers = -1;
    auto* run = app.add_subcommand("run", "run an eps sweep described by a config file");
    run->add_option("config", run_path, "config file")->required();
    run->add_option("-w,--workers", workers, "worker threads (0: one per eps)");

    std::string report_path;
    auto* table = app.add_subcommand("table", "print the convergence table of a report.json");
    table->add_option("report", report_path, "report.json")->required();

    std::string check_path;
    auto* check = app.add_subcommand("check-nonlinearity",
                                     "print thresholds, Theorem D and nondegeneracy verdicts");
    check->add_option("config", check_path, "config file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kValidation;
    }

    try {
        if (*run) return cmd_run(run_path, workers);
        if (*table) return cmd_table(report_path);
        if (*check) return cmd_check(check_path);
    } catch (const SolverError& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return kSolver;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kValidation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kSolver;
    }
    return kOk;
}
