#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fastlimit/fast_reaction.hpp"
#include "fastlimit/forward_backward.hpp"
#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/trajectory.hpp"

namespace fastlimit {

enum class SystemKind { FastReaction, ForwardBackward };

enum class SnapshotExport { All, Final, None };

/// One experiment: an eps sweep of a single system on a common grid.
///
/// Text format: one `key = value` per line, `#` starts a comment, lists are
/// comma separated. Keys and defaults:
///
///   system                   fast_reaction | forward_backward   (required)
///   nonlinearity.kind        affine | cubic                     (required)
///   nonlinearity.breakpoints x:y, x:y, ...    (affine; default 0:0, 1:2, 1.25:1.5)
///   nonlinearity.slopes      s, s, ...        (affine; default 2, -2, 4)
///   nonlinearity.coefficients c3, c2, c1      (cubic; default 1, -3, 2.5)
///   grid.n                   cells                              (required)
///   grid.length              1
///   eps                      strictly decreasing list           (required)
///   t_end                    0.5
///   dt                       1e-3   fast reaction macro step; forward-backward cap
///   fb.c_dt                  0.5    forward-backward safety factor in (0, 1]
///   diffusion                backward_euler | crank_nicolson   (backward_euler)
///   init.generator           phase_checkerboard | sine_mix | constant
///   init.value, init.r       optional (constant level; checkerboard level)
///   init.theta 0.5, init.period 16, init.jitter 0, init.modes 4
///   seed                     0
///   cells.time_windows 8, cells.space_windows 8
///   bins.u 128, bins.v 128
///   entropy.tau0, entropy.h  optional
///   snapshot.cadence         t_end/128 (<= 0: every step)
///   output.dir               out
///   output.snapshots         all | final | none                 (all)
///   workers                  0 (one per eps)
///   decompose.dirac_threshold 0.99, decompose.delta_fraction 0.05
///   diagnostics.identities   true
///   diagnostics.measures     true
struct RunConfig {
    SystemKind system = SystemKind::FastReaction;
    NonlinearitySpec nonlinearity = canonical_affine_spec();
    Grid grid{1024, 1.0};
    std::vector<double> eps;
    double t_end = 0.5;
    double dt = 1e-3;
    double fb_c_dt = 0.5;
    DiffusionScheme diffusion = DiffusionScheme::BackwardEuler;
    InitialDataSpec init;
    int time_windows = 8;
    int space_windows = 8;
    int bins_u = 128;
    int bins_v = 128;
    std::optional<double> entropy_tau0;
    std::optional<double> entropy_h;
    std::optional<double> snapshot_cadence;
    std::string output_dir = "out";
    SnapshotExport snapshots = SnapshotExport::All;
    int workers = 0;
    double dirac_threshold = 0.99;
    double delta_fraction = 0.05;
    bool identities = true;
    bool measures = true;

    double cadence() const { return snapshot_cadence.value_or(t_end / 128.0); }

    bool operator==(const RunConfig&) const = default;

    /// Throws ConfigError naming the violated invariant.
    void validate() const;

    FastReactionConfig fast_reaction(double eps_value) const;
    ForwardBackwardConfig forward_backward(double eps_value) const;
};

/// Parses and validates; errors carry the line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Canonical text; parse_config(serialize(c)) == c.
std::string serialize(const RunConfig& config);

std::string system_name(SystemKind s);

}  // namespace fastlimit
