#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/pde_core.hpp"
#include "fastlimit/trajectory.hpp"

namespace fastlimit {

/// Time discretisation of the diffusion substep.
enum class DiffusionScheme { CrankNicolson, BackwardEuler };

DiffusionScheme parse_diffusion_scheme(const std::string& name);
std::string diffusion_scheme_name(DiffusionScheme s);

struct FastReactionConfig {
    NonlinearitySpec nonlinearity = canonical_affine_spec();
    Grid grid{1024, 1.0};
    double eps = 1e-2;
    double t_end = 0.5;
    double dt_macro = 1e-3;
    InitialDataSpec init;
    /// Simulated time between snapshots; <= 0 keeps every step.
    double snapshot_cadence = 0.0;
    DiffusionScheme diffusion = DiffusionScheme::BackwardEuler;
    /// Smoothed-step location of the registered entropy family (default mid of (f-, f+)).
    std::optional<double> entropy_tau0;
    /// Quadrature step of the entropy tables (default (beta+ - alpha-)/4096).
    std::optional<double> entropy_h;

    /// Throws std::invalid_argument naming the violated invariant.
    void validate() const;
};

struct SimState {
    Field u;
    Field v;
    double t = 0.0;
    double eps = 0.0;
};

/// M = max(V, |u0|_inf, beta+, S3(V)) with V = max(|F(u0)|_inf, |v0|_inf, f+).
/// [0, S3(V)] x [0, V] is invariant under the reaction, so u, v stay in [0, M].
double invariant_bound(const Field& u0, const Field& v0, const Nonlinearity& F);

/// Strang-split integrator for
///   u_t = (v - F(u))/eps,  v_t = Delta v + (F(u) - v)/eps,  Neumann in x.
///
/// A macro step is: reaction over dt/2, diffusion over dt, reaction over dt/2.
/// The reaction keeps u+v fixed in every cell, so it reduces to one scalar
/// implicit Euler equation per cell and per sub-step, solved by safeguarded
/// Newton. Reaction sub-steps are at most eps/4 long.
class FastReactionModel {
public:
    FastReactionModel(Nonlinearity F, const Grid& grid, double eps, double dt, double bound,
                      DiffusionScheme scheme = DiffusionScheme::CrankNicolson);

    const Nonlinearity& nonlinearity() const { return F_; }
    double dt() const { return dt_; }
    double bound() const { return bound_; }

    /// One macro step in place. Throws SolverError on Newton failure or when a
    /// value leaves [-1e-10, M + 1e-10].
    void step(SimState& state) const;
    SimState step(const SimState& state) const;

    /// Pure reaction over a time span tau, in place.
    void react(std::span<double> u, std::span<double> v, double tau) const;
    /// Pure reaction for a single cell.
    void react_cell(double& u, double& v, double tau) const;
    /// Number of implicit Euler sub-steps used for a reaction span tau.
    int reaction_substeps(double tau) const;

    /// Pure diffusion over dt, in place.
    void diffuse(std::span<double> v) const;

private:
    double implicit_euler(double u, double s, double h) const;
    void check_bounds(const SimState& state) const;

    Nonlinearity F_;
    Grid grid_;
    double eps_;
    double dt_;
    double bound_;
    double h_max_;
    DiffusionScheme scheme_;
    std::optional<CrankNicolsonStepper> cn_;
    std::optional<ShiftedLaplacianSolver> be_;
    mutable std::vector<double> scratch_;
    mutable std::vector<double> increment_;
};

/// Runs the configured problem. Diagnostics are recorded after every macro
/// step; snapshots at t = 0, at the configured cadence and at t_end.
Trajectory simulate(const FastReactionConfig& config);

}  // namespace fastlimit
