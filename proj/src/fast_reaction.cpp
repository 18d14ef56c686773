#include "fastlimit/fast_reaction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fastlimit/entropy_pair.hpp"
#include "fastlimit/error.hpp"

namespace fastlimit {

DiffusionScheme parse_diffusion_scheme(const std::string& name) {
    if (name == "crank_nicolson") return DiffusionScheme::CrankNicolson;
    if (name == "backward_euler") return DiffusionScheme::BackwardEuler;
    throw std::invalid_argument("unknown diffusion scheme '" + name + "'");
}

std::string diffusion_scheme_name(DiffusionScheme s) {
    return s == DiffusionScheme::CrankNicolson ? "crank_nicolson" : "backward_euler";
}

void FastReactionConfig::validate() const {
    Nonlinearity F(nonlinearity);
    if (grid.n_cells < 4) throw std::invalid_argument("grid needs at least 4 cells");
    if (!(grid.length > 0.0)) throw std::invalid_argument("grid length must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(dt_macro > 0.0)) throw std::invalid_argument("dt_macro must be positive");
    if (!(t_end >= dt_macro)) throw std::invalid_argument("t_end must be at least dt_macro");
    if (entropy_h && !(*entropy_h > 0.0)) throw std::invalid_argument("entropy step must be positive");
}

double invariant_bound(const Field& u0, const Field& v0, const Nonlinearity& F) {
    const auto& t = F.thresholds();
    double value = std::max(v0.max_abs(), t.f_plus);
    for (double x : u0.values()) value = std::max(value, std::abs(F(x)));
    // [0, S3(V)] x [0, V] is invariant; S3(V) can exceed V when F(u) < u on I3
    return std::max({value, u0.max_abs(), t.beta_plus, F.inverse(3, value)});
}

FastReactionModel::FastReactionModel(Nonlinearity F, const Grid& grid, double eps, double dt,
                                     double bound, DiffusionScheme scheme)
    : F_(std::move(F)), grid_(grid), eps_(eps), dt_(dt), bound_(bound), scheme_(scheme),
      scratch_(grid.n_cells), increment_(grid.n_cells) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    // Implicit Euler residual G(x) = x - u - (h/eps)(s - x - F(x)) has
    // G' = 1 + (h/eps)(1 + F'). Keep G' >= 1/2 so the root is unique.
    double h = 0.25 * eps;
    double min_slope = 0.0;
    if (F_.kind() == NonlinearityKind::PiecewiseAffine) {
        for (double s : F_.spec().slopes) min_slope = std::min(min_slope, s);
    } else {
        const auto& c = F_.spec().cubic;
        min_slope = std::min(0.0, c[2] - c[1] * c[1] / (3.0 * c[0]));
    }
    const double neg = -(1.0 + min_slope);
    if (neg > 0.0) h = std::min(h, 0.5 * eps / neg);
    h_max_ = h;
    if (scheme_ == DiffusionScheme::CrankNicolson)
        cn_.emplace(grid_, dt_);
    else
        be_.emplace(grid_, dt_);
}

int FastReactionModel::reaction_substeps(double tau) const {
    return std::max(1, static_cast<int>(std::ceil(tau / h_max_ - 1e-12)));
}

double FastReactionModel::implicit_euler(double u, double s, double h) const {
    const double r = h / eps_;
    const double drive = s - u - F_(u);  // v - F(u)
    if (drive == 0.0) return u;
    auto G = [&](double x) { return x - u - r * (s - x - F_(x)); };
    // G(u) = -r drive and G' >= 1/2, so the root lies within 2 r |drive| of u
    double lo = u;
    double hi = u + 2.0 * r * drive;
    if (lo > hi) std::swap(lo, hi);
    double x = u + r * drive / (1.0 + r * (1.0 + F_.derivative(u)));
    if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
    const double tol = 1e-15 * std::max(1.0, std::abs(u));
    for (int it = 0; it < 50; ++it) {
        const double g = G(x);
        if (g == 0.0) return x;
        if (g > 0.0)
            hi = x;
        else
            lo = x;
        if (hi - lo <= tol) return 0.5 * (lo + hi);
        const double dg = 1.0 + r * (1.0 + F_.derivative(x));
        const double newton = g / dg;
        if (std::abs(newton) <= tol) return x - newton;
        double next = x - newton;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        x = next;
    }
    std::ostringstream os;
    os.precision(17);
    os << "reaction Newton did not converge (u=" << u << ", u+v=" << s << ", h=" << h << ")";
    throw SolverError(os.str());
}

void FastReactionModel::react_cell(double& u, double& v, double tau) const {
    const int n = reaction_substeps(tau);
    const double h = tau / n;
    const double s = u + v;
    double x = u;
    for (int k = 0; k < n; ++k) x = implicit_euler(x, s, h);
    u = x;
    v = s - x;
}

void FastReactionModel::react(std::span<double> u, std::span<double> v, double tau) const {
    for (std::size_t j = 0; j < u.size(); ++j) react_cell(u[j], v[j], tau);
}

void FastReactionModel::diffuse(std::span<double> v) const {
    if (cn_) {
        cn_->step(v);
        return;
    }
    // backward Euler in increment form: (I - dt Delta) w = dt Delta v
    laplacian_neumann(v, grid_.dx(), scratch_);
    for (double& r : scratch_) r *= dt_;
    be_->solve(scratch_, increment_);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += increment_[j];
}

void FastReactionModel::check_bounds(const SimState& state) const {
    constexpr double tol = 1e-10;
    for (int j = 0; j < grid_.n_cells; ++j) {
        const double u = state.u[j];
        const double v = state.v[j];
        if (!(u >= -tol && u <= bound_ + tol && v >= -tol && v <= bound_ + tol)) {
            std::ostringstream os;
            os << "state left the invariant region [0, " << bound_ << "] at cell " << j
               << ", t=" << state.t << " (u=" << u << ", v=" << v << ")";
            throw SolverError(os.str());
        }
    }
}

void FastReactionModel::step(SimState& state) const {
    auto u = state.u.values();
    auto v = state.v.values();
    react(u, v, 0.5 * dt_);
    diffuse(v);
    react(u, v, 0.5 * dt_);
    state.t += dt_;
    check_bounds(state);
}

SimState FastReactionModel::step(const SimState& state) const {
    SimState next = state;
    step(next);
    return next;
}

namespace {

struct Instant {
    double mass;
    std::array<double, 3> energy;
    double gradv;
    double coupling;
};

Instant measure(const Field& u, const Field& v, const Nonlinearity& F, double eps,
                const EntropyFamily& family) {
    const double dx = u.grid().dx();
    Instant in{};
    in.mass = u.integral() + v.integral();
    for (std::size_t k = 0; k < 3; ++k)
        in.energy[k] = total_energy(u.values(), v.values(), dx, family.pairs[k]);
    in.gradv = gradient_energy(v.values(), dx);
    double c = 0.0;
    for (int j = 0; j < u.size(); ++j) {
        const double d = F(u[j]) - v[j];
        c += d * d;
    }
    in.coupling = c * dx / eps;
    return in;
}

}  // namespace

Trajectory simulate(const FastReactionConfig& config) {
    config.validate();
    Nonlinearity F(config.nonlinearity);
    const Grid grid = config.grid;
    auto [u0, v0] = initial_data(config.init, grid, F);
    const double M = invariant_bound(u0, v0, F);
    const int n_steps = static_cast<int>(std::ceil(config.t_end / config.dt_macro - 1e-9));
    const double dt = config.t_end / n_steps;

    const double h = config.entropy_h.value_or(default_entropy_step(F));
    const double tau0 = config.entropy_tau0.value_or(EntropyFamily::default_tau0(F));
    const EntropyFamily family = EntropyFamily::registered(F, tau0, h, M);
    FastReactionModel model(F, grid, config.eps, dt, M, config.diffusion);

    Trajectory traj;
    traj.grid = grid;
    traj.eps = config.eps;
    traj.bound = M;
    traj.dt = dt;

    SimState state{std::move(u0), std::move(v0), 0.0, config.eps};
    Instant prev = measure(state.u, state.v, F, config.eps, family);
    traj.diagnostics.push_back({0.0, prev.mass, prev.energy, 0.0, 0.0});
    auto snap = [&] {
        traj.snapshots.push_back({state.t, {state.u.values().begin(), state.u.values().end()},
                                  {state.v.values().begin(), state.v.values().end()}});
    };
    snap();

    const double cadence = config.snapshot_cadence;
    double next_snap = cadence;
    double gradv = 0.0;
    double coupling = 0.0;
    for (int n = 1; n <= n_steps; ++n) {
        model.step(state);
        state.t = (n == n_steps) ? config.t_end : n * dt;
        const Instant now = measure(state.u, state.v, F, config.eps, family);
        gradv += 0.5 * dt * (prev.gradv + now.gradv);
        coupling += 0.5 * dt * (prev.coupling + now.coupling);
        traj.diagnostics.push_back({state.t, now.mass, now.energy, gradv, coupling});
        prev = now;

        const double slack = 1e-9 * dt;
        if (n == n_steps || cadence <= 0.0 || state.t >= next_snap - slack) snap();
        if (cadence > 0.0)
            while (next_snap <= state.t + slack) next_snap += cadence;
    }
    return traj;
}

}  // namespace fastlimit
