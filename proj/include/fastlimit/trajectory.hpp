#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fastlimit/entropy_pair.hpp"
#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/pde_core.hpp"

namespace fastlimit {

/// u and v on the grid at time t. For the forward-backward system v is the
/// derived field (I - eps Delta)^{-1} F(u).
struct Snapshot {
    double t = 0.0;
    std::vector<double> u;
    std::vector<double> v;
};

/// One row per time step (plus the initial row).
///
/// energy[k] is sum [Psi(u) + Phi(v)] dx for the fast-reaction system and
/// sum Psi(u) dx for the forward-backward one, for the k-th registered test
/// function. The two dissipation columns are running time integrals:
/// dissip_gradv = int int |grad v|^2, dissip_coupling = int int (F(u)-v)^2/eps
/// (fast reaction) or int int eps |u_t|^2 (forward-backward).
struct DiagnosticRow {
    double t = 0.0;
    double mass = 0.0;
    std::array<double, 3> energy{};
    double dissip_gradv = 0.0;
    double dissip_coupling = 0.0;
};

struct Trajectory {
    Grid grid;
    double eps = 0.0;
    double bound = 0.0;  // M of the invariant region [0, M]
    double dt = 0.0;
    std::vector<Snapshot> snapshots;
    std::vector<DiagnosticRow> diagnostics;
};

/// The registered nondecreasing test functions: identity, cubic and the
/// smoothed step at tau0 with width delta = (f+ - f-)/64.
struct EntropyFamily {
    std::vector<EntropyPair> pairs;

    static EntropyFamily registered(const Nonlinearity& F, double tau0, double h, double u_max);
    static double default_tau0(const Nonlinearity& F);
};

enum class InitialGenerator { Constant, SineMix, PhaseCheckerboard };

/// Initial data recipe.
///
/// constant: u0 = value (default beta+). sine_mix: a seeded random cosine
/// series rescaled to span the middle 90% of (alpha-, beta+).
/// phase_checkerboard: periodic blocks of S1(r) (fraction theta of each
/// period) and S3(r), optionally with seeded jitter of the fraction, then a
/// 3-cell moving average. In every case v0 = F(u0).
struct InitialDataSpec {
    InitialGenerator generator = InitialGenerator::PhaseCheckerboard;
    std::uint64_t seed = 0;
    std::optional<double> value;
    std::optional<double> r;
    double theta = 0.5;
    int period = 16;
    double jitter = 0.0;
    int modes = 4;

    bool operator==(const InitialDataSpec&) const = default;
};

InitialGenerator parse_generator(const std::string& name);
std::string generator_name(InitialGenerator g);

std::pair<Field, Field> initial_data(const InitialDataSpec& spec, const Grid& grid,
                                     const Nonlinearity& F);

/// Discrete int |grad v|^2 over cell faces.
double gradient_energy(std::span<const double> v, double dx);

}  // namespace fastlimit
