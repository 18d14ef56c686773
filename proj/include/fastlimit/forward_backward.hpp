#pragma once

#include <optional>

#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/pde_core.hpp"
#include "fastlimit/trajectory.hpp"

namespace fastlimit {

struct ForwardBackwardConfig {
    NonlinearitySpec nonlinearity = canonical_affine_spec();
    Grid grid{1024, 1.0};
    double eps = 1e-2;
    double t_end = 0.5;
    /// Safety factor on the explicit limit 2 eps / Lip(F).
    double c_dt = 0.5;
    /// Optional cap on the time step (the actual step also respects c_dt).
    std::optional<double> dt_max;
    InitialDataSpec init;
    double snapshot_cadence = 0.0;
    std::optional<double> entropy_tau0;
    std::optional<double> entropy_h;

    void validate() const;
};

struct FBState {
    Field u;
    double t = 0.0;
    double eps = 0.0;
};

/// v = (I - eps Delta)^{-1} F(u).
Field derive_v(const Field& u, const Nonlinearity& F, double eps);

/// Upper end of the invariant interval for u: S3(max(|F(u0)|_inf, f+)),
/// never below |u0|_inf.
double fb_invariant_bound(const Field& u0, const Nonlinearity& F);

/// Explicit midpoint integrator for u_t = Delta (I - eps Delta)^{-1} F(u).
class ForwardBackwardModel {
public:
    /// lipschitz is Lip(F) on the invariant interval; it fixes the stability limit.
    ForwardBackwardModel(Nonlinearity F, const Grid& grid, double eps, double lipschitz,
                         double bound);

    const Nonlinearity& nonlinearity() const { return F_; }
    double bound() const { return bound_; }
    /// 2 eps / Lip(F): the largest dt with c_dt = 1.
    double stable_dt() const { return 2.0 * eps_ / lipschitz_; }

    Field derive_v(const Field& u) const;
    /// Delta derive_v(u).
    Field rate(const Field& u) const;

    /// One RK2 step. Rejects dt > stable_dt() (std::invalid_argument) and
    /// throws SolverError when u leaves [-1e-10, M + 1e-10].
    FBState step(const FBState& state, double dt) const;

private:
    Nonlinearity F_;
    Grid grid_;
    double eps_;
    double lipschitz_;
    double bound_;
    ShiftedLaplacianSolver resolvent_;
};

/// Lip(F) used for the stability limit: max |slope| for affine F, max |F'| on
/// [0, bound] for the cubic.
double fb_lipschitz(const Nonlinearity& F, double bound);

/// Runs the configured problem. Snapshots store v = derive_v(u). Diagnostic
/// energies are sum Psi(u) dx; dissip_coupling accumulates eps |u_t|^2.
Trajectory fb_simulate(const ForwardBackwardConfig& config);

}  // namespace fastlimit
