#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "fastlimit/entropy_pair.hpp"
#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/trajectory.hpp"
#include "fastlimit/young_measure.hpp"

namespace fastlimit {

/// int_a^b phi(s) S_i'(s) ds.
///
/// The range is cut at f-, f+, the images of the kinks of F and the kinks of
/// phi. Affine F: exact, S_i' (Phi(q) - Phi(p)) per piece. Cubic F: composite
/// midpoint rule with about (q - p)/h nodes; on a piece ending at a fold the
/// substitution s = p + t^2 (or q - t^2) removes the inverse-square-root
/// singularity of S_i', so the error stays O(h^2).
double integrate_phi_slope(const TestFunction& phi, const Nonlinearity& F, int branch, double a,
                           double b, double h);

/// C1 = 0, C2 = C3 = int_0^{f+} phi (S1' - S2').
std::array<double, 3> lemma32_constants(const TestFunction& phi, const Nonlinearity& F, double h);

struct Lemma32Check {
    std::array<double, 3> constants{};
    std::vector<double> lambda0;
    /// residual[i][k] = Psi(S_i(l_k)) - [int_0^{l_k} phi S_i' + C_i]
    std::array<std::vector<double>, 3> residual;
    std::array<double, 3> max_abs_residual{};
};

/// Residuals on n_lambda points of (f-, f+) (open midpoint grid).
Lemma32Check lemma32_check(const EntropyPair& pair, const Nonlinearity& F, int n_lambda = 32);

/// Sample-count tail masses: tail[i] = F#mu^(i)(tau0, inf), branch1_total = F#mu^(1)(R+).
struct BranchTails {
    std::array<double, 3> tail{};
    double branch1_total = 0.0;
};

BranchTails branch_tails(std::span<const double> u, const Nonlinearity& F, double tau0);

struct IdentityReport {
    std::string source;
    Variant variant = Variant::FastReaction;
    double tau0 = 0.0;
    double lambda0 = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
    double residual = 0.0;
    double tolerance = 0.0;
};

/// calF(tau0) = sum_i w_i(tau0) tail_i + (S1' - S2')(tau0) (1 - branch1_total),
/// w_i = S_i' + 1 (FastReaction) or S_i' (ForwardBackward).
double calF(const BranchTails& tails, double tau0, const Nonlinearity& F, Variant variant);

/// lhs = 1_{lambda0 > tau0} sum_i w_i(tau0) g_i + (S1' - S2')(tau0) (1 - g1), rhs = calF(tau0).
/// Their difference equals
///   sum_i w_i [1_{lambda0>tau0} g_i - tail_i] + (S1' - S2')(branch1_total - g1).
/// Throws std::invalid_argument when tau0 is f- or f+.
IdentityReport theorem_A_residual(const std::array<double, 3>& g, const BranchTails& tails,
                                  double tau0, double lambda0, const Nonlinearity& F,
                                  Variant variant);

/// Same, reading g at the bin of lambda0; throws MeasureError on a masked bin.
IdentityReport theorem_A_residual(const DensityTriple& g, const BranchTails& tails,
                                  double tau0, double lambda0, const Nonlinearity& F,
                                  Variant variant);

/// (1 - atom_mass) sum_i w_i(lambda0) g_i; lhs is the product and rhs is 0.
IdentityReport localized_identity_residual(const std::array<double, 3>& g, double atom_mass,
                                           double lambda0, const Nonlinearity& F, Variant variant);

/// Dissipation terms of the fast-reaction energy identity for one state:
/// gradient = sum over faces (phi(v_{j+1}) - phi(v_j))(v_{j+1} - v_j)/dx,
/// coupling = sum_j (v_j - F(u_j))(phi(v_j) - phi(F(u_j))) dx / eps.
/// Both are nonnegative for nondecreasing phi.
struct EnergyTerms {
    double gradient = 0.0;
    double coupling = 0.0;
};

EnergyTerms fast_reaction_dissipation(std::span<const double> u, std::span<const double> v,
                                      double dx, double eps, const TestFunction& phi,
                                      const Nonlinearity& F);

/// sum_j phi(F(u_j)) (Delta v)_j dx, the rate of sum Psi(u) dx under u_t = Delta v.
double forward_backward_psi_rate(std::span<const double> u, std::span<const double> v, double dx,
                                 const TestFunction& phi, const Nonlinearity& F);

/// Residual per pair of consecutive snapshots of the time-integrated identity
/// (trapezoid in time):
///   fast reaction:  dE + dt (D_k + D_{k+1})/2,  E = sum [Psi(u)+Phi(v)] dx,
///                   D = gradient + coupling;
///   forward-back.:  dE - dt (R_k + R_{k+1})/2,  E = sum Psi(u) dx,
///                   R = forward_backward_psi_rate.
std::vector<double> energy_balance_residual(const Trajectory& traj, const EntropyPair& pair,
                                            const Nonlinearity& F, Variant variant);

}  // namespace fastlimit
