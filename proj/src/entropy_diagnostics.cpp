#include "fastlimit/entropy_diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fastlimit/error.hpp"
#include "fastlimit/pde_core.hpp"

namespace fastlimit {

namespace {

// midpoint rule for int_p^q phi S_i', optionally in the variable t with
// s = anchor +- t^2 when the piece ends at a fold
double midpoint_piece(const TestFunction& phi, const Nonlinearity& F, int branch, double p, double q,
                      double h, int fold_end) {
    const int n = std::max(8, static_cast<int>(std::ceil((q - p) / h)));
    double sum = 0.0;
    if (fold_end == 0) {
        const double w = (q - p) / n;
        for (int k = 0; k < n; ++k) {
            const double s = p + (k + 0.5) * w;
            sum += phi(s) * F.inverse_slope(branch, s);
        }
        return sum * w;
    }
    // fold at p: s = p + t^2; fold at q: s = q - t^2; ds = +-2t dt
    const double T = std::sqrt(q - p);
    const double w = T / n;
    for (int k = 0; k < n; ++k) {
        const double t = (k + 0.5) * w;
        const double s = fold_end < 0 ? p + t * t : q - t * t;
        sum += 2.0 * t * phi(s) * F.inverse_slope(branch, s);
    }
    return sum * w;
}

}  // namespace

double integrate_phi_slope(const TestFunction& phi, const Nonlinearity& F, int branch, double a,
                           double b, double h) {
    if (branch < 1 || branch > 3) throw std::invalid_argument("branch must be 1, 2 or 3");
    if (!(h > 0.0)) throw std::invalid_argument("quadrature step must be positive");
    if (a == b) return 0.0;
    if (a > b) return -integrate_phi_slope(phi, F, branch, b, a, h);

    const auto& t = F.thresholds();
    const bool affine = F.kind() == NonlinearityKind::PiecewiseAffine;
    std::vector<double> cuts{a, b, t.f_minus, t.f_plus};
    for (double k : phi.kinks()) cuts.push_back(k);
    if (affine) {
        for (const auto& bp : F.spec().breakpoints) cuts.push_back(bp.y);
    } else {
        cuts.push_back(0.5 * (t.f_minus + t.f_plus));
    }
    std::vector<double> inside;
    for (double c : cuts)
        if (c >= a && c <= b) inside.push_back(c);
    std::sort(inside.begin(), inside.end());
    inside.erase(std::unique(inside.begin(), inside.end()), inside.end());

    double total = 0.0;
    for (std::size_t k = 0; k + 1 < inside.size(); ++k) {
        const double p = inside[k];
        const double q = inside[k + 1];
        const double mid = 0.5 * (p + q);
        if (F.inverse_slope(branch, mid) == 0.0) continue;
        if (affine) {
            total += F.inverse_slope(branch, mid) * (phi.antiderivative(q) - phi.antiderivative(p));
            continue;
        }
        int fold_end = 0;
        if (q == t.f_plus && (branch == 1 || branch == 2)) fold_end = 1;
        if (p == t.f_minus && (branch == 2 || branch == 3)) fold_end = -1;
        total += midpoint_piece(phi, F, branch, p, q, h, fold_end);
    }
    return total;
}

std::array<double, 3> lemma32_constants(const TestFunction& phi, const Nonlinearity& F, double h) {
    const auto& t = F.thresholds();
    const double c = integrate_phi_slope(phi, F, 1, 0.0, t.f_plus, h) -
                     integrate_phi_slope(phi, F, 2, t.f_minus, t.f_plus, h);
    return {0.0, c, c};
}

Lemma32Check lemma32_check(const EntropyPair& pair, const Nonlinearity& F, int n_lambda) {
    if (n_lambda < 1) throw std::invalid_argument("need at least one lambda0 point");
    const auto& t = F.thresholds();
    const double h = pair.step();
    Lemma32Check out;
    out.constants = lemma32_constants(pair.phi(), F, h);
    for (int k = 0; k < n_lambda; ++k)
        out.lambda0.push_back(t.f_minus + (t.f_plus - t.f_minus) * (k + 0.5) / n_lambda);
    for (int i = 0; i < 3; ++i) {
        for (double l0 : out.lambda0) {
            const double r = pair.psi(F.inverse(i + 1, l0)) -
                             (integrate_phi_slope(pair.phi(), F, i + 1, 0.0, l0, h) + out.constants[i]);
            out.residual[i].push_back(r);
            out.max_abs_residual[i] = std::max(out.max_abs_residual[i], std::abs(r));
        }
    }
    return out;
}

BranchTails branch_tails(std::span<const double> u, const Nonlinearity& F, double tau0) {
    if (u.empty()) throw MeasureError("tail masses of an empty sample list");
    std::array<std::size_t, 3> above{0, 0, 0};
    std::size_t first = 0;
    for (double x : u) {
        const int b = F.branch_of(x);
        if (b == 1) ++first;
        if (F(x) > tau0) ++above[b - 1];
    }
    const double n = static_cast<double>(u.size());
    BranchTails out;
    for (int i = 0; i < 3; ++i) out.tail[i] = static_cast<double>(above[i]) / n;
    out.branch1_total = static_cast<double>(first) / n;
    return out;
}

namespace {

void require_regular(double tau0, const Nonlinearity& F) {
    const auto& t = F.thresholds();
    if (tau0 == t.f_minus || tau0 == t.f_plus)
        throw std::invalid_argument("tau0 must differ from f- and f+");
}

double slope_gap(double tau0, const Nonlinearity& F) {
    return F.inverse_slope(1, tau0) - F.inverse_slope(2, tau0);
}

}  // namespace

double calF(const BranchTails& tails, double tau0, const Nonlinearity& F, Variant variant) {
    require_regular(tau0, F);
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += F.slope_weight(i + 1, tau0, variant) * tails.tail[i];
    return s + slope_gap(tau0, F) * (1.0 - tails.branch1_total);
}

IdentityReport theorem_A_residual(const std::array<double, 3>& g, const BranchTails& tails,
                                  double tau0, double lambda0, const Nonlinearity& F,
                                  Variant variant) {
    require_regular(tau0, F);
    IdentityReport r;
    r.variant = variant;
    r.tau0 = tau0;
    r.lambda0 = lambda0;
    double s = 0.0;
    if (lambda0 > tau0)
        for (int i = 0; i < 3; ++i) s += F.slope_weight(i + 1, tau0, variant) * g[i];
    r.lhs = s + slope_gap(tau0, F) * (1.0 - g[0]);
    r.rhs = calF(tails, tau0, F, variant);
    r.residual = r.lhs - r.rhs;
    return r;
}

IdentityReport theorem_A_residual(const DensityTriple& g, const BranchTails& tails, double tau0,
                                  double lambda0, const Nonlinearity& F, Variant variant) {
    const int k = g.bins.index(lambda0);
    if (!g.occupied[k]) throw MeasureError("lambda0 lies in a masked (unoccupied) bin");
    return theorem_A_residual(g.g[k], tails, tau0, lambda0, F, variant);
}

IdentityReport localized_identity_residual(const std::array<double, 3>& g, double atom_mass,
                                           double lambda0, const Nonlinearity& F, Variant variant) {
    require_regular(lambda0, F);
    IdentityReport r;
    r.variant = variant;
    r.tau0 = lambda0;
    r.lambda0 = lambda0;
    double s = 0.0;
    for (int i = 0; i < 3; ++i) s += F.slope_weight(i + 1, lambda0, variant) * g[i];
    r.lhs = (1.0 - atom_mass) * s;
    r.rhs = 0.0;
    r.residual = r.lhs;
    return r;
}

EnergyTerms fast_reaction_dissipation(std::span<const double> u, std::span<const double> v,
                                      double dx, double eps, const TestFunction& phi,
                                      const Nonlinearity& F) {
    EnergyTerms e;
    for (std::size_t j = 0; j + 1 < v.size(); ++j)
        e.gradient += (phi(v[j + 1]) - phi(v[j])) * (v[j + 1] - v[j]);
    e.gradient /= dx;
    for (std::size_t j = 0; j < u.size(); ++j) {
        const double f = F(u[j]);
        e.coupling += (v[j] - f) * (phi(v[j]) - phi(f));
    }
    e.coupling *= dx / eps;
    return e;
}

double forward_backward_psi_rate(std::span<const double> u, std::span<const double> v, double dx,
                                 const TestFunction& phi, const Nonlinearity& F) {
    std::vector<double> lap(v.size());
    laplacian_neumann(v, dx, lap);
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += phi(F(u[j])) * lap[j];
    return s * dx;
}

std::vector<double> energy_balance_residual(const Trajectory& traj, const EntropyPair& pair,
                                            const Nonlinearity& F, Variant variant) {
    const double dx = traj.grid.dx();
    const auto& phi = pair.phi();
    auto energy = [&](const Snapshot& s) {
        return variant == Variant::FastReaction ? total_energy(s.u, s.v, dx, pair)
                                                : total_psi(s.u, dx, pair);
    };
    auto rate = [&](const Snapshot& s) {
        if (variant == Variant::FastReaction) {
            const auto e = fast_reaction_dissipation(s.u, s.v, dx, traj.eps, phi, F);
            return e.gradient + e.coupling;
        }
        return -forward_backward_psi_rate(s.u, s.v, dx, phi, F);
    };
    std::vector<double> out;
    for (std::size_t k = 0; k + 1 < traj.snapshots.size(); ++k) {
        const auto& a = traj.snapshots[k];
        const auto& b = traj.snapshots[k + 1];
        const double dt = b.t - a.t;
        out.push_back(energy(b) - energy(a) + 0.5 * dt * (rate(a) + rate(b)));
    }
    return out;
}

}  // namespace fastlimit
