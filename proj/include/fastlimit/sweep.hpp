#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fastlimit/config.hpp"
#include "fastlimit/entropy_diagnostics.hpp"
#include "fastlimit/trajectory.hpp"

namespace fastlimit {

/// Young-measure statistics of one space-time cell.
struct CellResult {
    int t_index = 0;
    int x_index = 0;
    std::size_t n_samples = 0;
    std::array<double, 3> lambda{};
    double v_bar = 0.0;
    double dirac_score_v = 0.0;
    double dirac_score_u = 0.0;
    double fit_residual = 0.0;
    bool flagged = false;
    double var_u = 0.0;
    double var_Fu = 0.0;
};

/// Outcome of one eps. When ok is false only eps, error and error_kind are meaningful.
struct EpsResult {
    double eps = 0.0;
    bool ok = false;
    std::string error;
    std::string error_kind;  // "solver", "validation" or "measure"

    double bound = 0.0;
    double dt = 0.0;
    int steps = 0;
    double mass_drift = 0.0;
    /// max over steps of (E_{n+1} - E_n)/dt per registered test function
    std::array<double, 3> max_energy_increase_per_dt{};
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    double dissip_gradv = 0.0;
    double dissip_coupling = 0.0;
    /// sup over snapshots of |F(u) - v|_{L2}
    double coupling_residual = 0.0;

    std::vector<CellResult> cells;
    double mean_dirac_v = 0.0;
    double mean_dirac_u = 0.0;
    double mean_var_Fu = 0.0;
    double mean_lambda2 = 0.0;
    /// max fit residual over cells with dirac_score_v above the threshold (0 if none)
    double max_fit_residual = 0.0;

    std::vector<IdentityReport> identities;
    double max_identity_residual = 0.0;

    /// per cell: mu (u-axis) and F#mu (value axis)
    std::vector<EmpiricalMeasure> mu_u;
    std::vector<EmpiricalMeasure> pushforward;

    std::vector<double> final_u;
    std::vector<double> final_v;
};

struct TableRow {
    double eps = 0.0;
    double eps_next = 0.0;
    std::optional<double> cauchy_v;
    std::optional<double> cauchy_u;
    double mean_dirac_v = 0.0;
    double mean_dirac_u = 0.0;
    double lambda2 = 0.0;
};

struct SweepReport {
    RunConfig config;
    std::vector<EpsResult> runs;
    std::vector<TableRow> table;
    std::vector<double> wall_seconds;

    bool all_ok() const;
};

struct SweepOptions {
    /// Overrides config.workers; 0 means one worker per eps.
    std::optional<int> workers;
    /// Overrides config.output_dir.
    std::optional<std::string> output_dir;
    bool write_files = true;
};

/// Simulates every eps (one worker thread per eps, at most `workers` at a
/// time), analyses cells and identities, writes per-eps CSV/JSON files and
/// report.json. Failures are caught per eps and recorded in its EpsResult.
/// Output files do not depend on the worker count.
SweepReport run_sweep(const RunConfig& config, const SweepOptions& options = {});

/// Simulation plus analysis of a single eps (no files, no exception capture).
EpsResult analyze_eps(const RunConfig& config, double eps, Trajectory* keep = nullptr);

/// Columns eps, |v - v_next|, |u - u_next|, dirac_v, dirac_u, lambda2;
/// one row per consecutive eps pair. Throws std::invalid_argument for fewer
/// than two eps.
std::string convergence_table(const SweepReport& report);

/// report.json text (deterministic; no wall-clock data).
std::string report_json(const SweepReport& report);
/// Rebuilds the eps list and table rows from report.json text.
SweepReport parse_report_json(const std::string& text);

/// CSV headers of the exported files.
namespace schema {
inline constexpr const char* snapshot_fast_reaction = "cell_index,x,u,v";
inline constexpr const char* snapshot_forward_backward = "cell_index,x,u,v_derived";
inline constexpr const char* diagnostics_fast_reaction =
    "t,mass,energy_id,energy_cubic,energy_step,dissip_gradv,dissip_reaction";
inline constexpr const char* diagnostics_forward_backward =
    "t,mass_u,lyapunov_id,dissip_gradv,dissip_ut";
inline constexpr const char* cells =
    "t_window,x_window,lambda1,lambda2,lambda3,v_bar,dirac_score_v,dirac_score_u,fit_residual";
inline constexpr const char* identities =
    "cell_id,variant,tau0,lambda0,lhs,rhs,residual,tolerance";
}  // namespace schema

}  // namespace fastlimit
