#pragma once

#include <span>
#include <string>
#include <vector>

#include "fastlimit/nonlinearity.hpp"

namespace fastlimit {

enum class TestFunctionKind {
    Constant,      // phi = 1
    Identity,      // phi(x) = x
    Cubic,         // phi(x) = x^3
    SmoothedStep,  // ramp from 0 at tau0 to 1 at tau0 + delta
    SharpStep,     // 1_{[tau0, inf)}
};

/// Test function phi used to build an entropy pair. The smoothed step is the
/// antiderivative of (1/delta) 1_{[tau0, tau0+delta]}, so it is nondecreasing
/// and its derivative is the localising indicator.
struct TestFunction {
    TestFunctionKind kind = TestFunctionKind::Identity;
    double tau0 = 0.0;
    double delta = 0.0;

    static TestFunction constant() { return {TestFunctionKind::Constant}; }
    static TestFunction identity() { return {TestFunctionKind::Identity}; }
    static TestFunction cubic() { return {TestFunctionKind::Cubic}; }
    static TestFunction smoothed_step(double tau0, double delta);
    static TestFunction sharp_step(double tau0) { return {TestFunctionKind::SharpStep, tau0, 0.0}; }

    double operator()(double x) const;
    /// phi'(x); for the sharp step this is 0 away from tau0.
    double derivative(double x) const;
    /// Phi(x) = int_0^x phi, closed form.
    double antiderivative(double x) const;
    /// Points where phi or phi' jumps.
    std::vector<double> kinks() const;
    /// Short identifier used in CSV headers ("id", "cubic", "step", ...).
    std::string name() const;
};

/// Psi(lambda) = int_0^lambda phi(F(tau)) dtau and Phi(lambda) = int_0^lambda phi.
///
/// Psi is tabulated by composite trapezoid with step <= h on [lo, hi]; the
/// table nodes include every point where phi o F is not smooth, so the table
/// is exact whenever phi o F is piecewise linear. Between nodes Psi integrates
/// the linear interpolant, so Psi' >= 0 wherever phi >= 0. The sharp step is
/// evaluated in closed form through the inverse branches instead.
class EntropyPair {
public:
    EntropyPair(TestFunction phi, const Nonlinearity& F, double h, double lo, double hi);
    /// Range [min(0, -pad), u_max] with pad = 0.05 (beta+ - alpha-).
    EntropyPair(TestFunction phi, const Nonlinearity& F, double h, double u_max);

    const TestFunction& phi() const { return phi_; }
    double step() const { return h_; }

    double psi(double lambda) const;
    double Phi(double lambda) const { return phi_.antiderivative(lambda); }

private:
    double integrand(double u) const;
    double psi_sharp(double lambda) const;
    double psi_direct(double a, double b) const;

    TestFunction phi_;
    Nonlinearity F_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> values_;    // phi(F(node))
    std::vector<double> integral_;  // Psi(node)
};

/// Default quadrature step: (beta+ - alpha-) / 4096.
double default_entropy_step(const Nonlinearity& F);

/// sum_j [Psi(u_j) + Phi(v_j)] dx
double total_energy(std::span<const double> u, std::span<const double> v, double dx,
                    const EntropyPair& pair);
/// sum_j Psi(u_j) dx
double total_psi(std::span<const double> u, double dx, const EntropyPair& pair);

}  // namespace fastlimit
