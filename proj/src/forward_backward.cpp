#include "fastlimit/forward_backward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fastlimit/entropy_pair.hpp"
#include "fastlimit/error.hpp"

namespace fastlimit {

void ForwardBackwardConfig::validate() const {
    Nonlinearity F(nonlinearity);
    if (grid.n_cells < 4) throw std::invalid_argument("grid needs at least 4 cells");
    if (!(grid.length > 0.0)) throw std::invalid_argument("grid length must be positive");
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(t_end > 0.0)) throw std::invalid_argument("t_end must be positive");
    if (!(c_dt > 0.0 && c_dt <= 1.0)) throw std::invalid_argument("fb.c_dt must lie in (0, 1]");
    if (dt_max && !(*dt_max > 0.0)) throw std::invalid_argument("dt must be positive");
}

Field derive_v(const Field& u, const Nonlinearity& F, double eps) {
    Field f(u.grid());
    for (int j = 0; j < u.size(); ++j) f[j] = F(u[j]);
    return helmholtz_solve(f, eps);
}

double fb_invariant_bound(const Field& u0, const Nonlinearity& F) {
    double m = F.thresholds().f_plus;
    for (double x : u0.values()) m = std::max(m, std::abs(F(x)));
    return std::max(F.inverse(3, m), u0.max_abs());
}

double fb_lipschitz(const Nonlinearity& F, double bound) {
    if (F.kind() == NonlinearityKind::PiecewiseAffine) return F.lipschitz_bound();
    return F.lipschitz_on(0.0, bound);
}

ForwardBackwardModel::ForwardBackwardModel(Nonlinearity F, const Grid& grid, double eps,
                                           double lipschitz, double bound)
    : F_(std::move(F)), grid_(grid), eps_(eps), lipschitz_(lipschitz), bound_(bound),
      resolvent_(grid, eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
    if (!(lipschitz > 0.0)) throw std::invalid_argument("Lipschitz constant must be positive");
}

Field ForwardBackwardModel::derive_v(const Field& u) const {
    Field f(grid_);
    for (int j = 0; j < u.size(); ++j) f[j] = F_(u[j]);
    return resolvent_.solve(f);
}

Field ForwardBackwardModel::rate(const Field& u) const { return laplacian_neumann(derive_v(u)); }

FBState ForwardBackwardModel::step(const FBState& state, double dt) const {
    if (!(dt > 0.0) || dt > stable_dt() * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "time step " << dt << " exceeds the stability limit 2 eps / Lip(F) = " << stable_dt();
        throw std::invalid_argument(os.str());
    }
    const int n = grid_.n_cells;
    const Field k1 = rate(state.u);
    Field mid(grid_);
    for (int j = 0; j < n; ++j) mid[j] = state.u[j] + 0.5 * dt * k1[j];
    const Field k2 = rate(mid);
    FBState next{Field(grid_), state.t + dt, state.eps};
    for (int j = 0; j < n; ++j) next.u[j] = state.u[j] + dt * k2[j];

    constexpr double tol = 1e-10;
    for (int j = 0; j < n; ++j) {
        const double u = next.u[j];
        if (!(u >= -tol && u <= bound_ + tol)) {
            std::ostringstream os;
            os << "u left the invariant region [0, " << bound_ << "] at cell " << j
               << ", t=" << next.t << " (u=" << u << ")";
            throw SolverError(os.str());
        }
    }
    return next;
}

Trajectory fb_simulate(const ForwardBackwardConfig& config) {
    config.validate();
    Nonlinearity F(config.nonlinearity);
    const Grid grid = config.grid;
    Field u0 = initial_data(config.init, grid, F).first;
    const double M = fb_invariant_bound(u0, F);
    ForwardBackwardModel model(F, grid, config.eps, fb_lipschitz(F, M), M);

    double dt_target = config.c_dt * model.stable_dt();
    if (config.dt_max) dt_target = std::min(dt_target, *config.dt_max);
    const int n_steps = std::max(1, static_cast<int>(std::ceil(config.t_end / dt_target - 1e-9)));
    const double dt = config.t_end / n_steps;

    const double h = config.entropy_h.value_or(default_entropy_step(F));
    const double tau0 = config.entropy_tau0.value_or(EntropyFamily::default_tau0(F));
    const EntropyFamily family = EntropyFamily::registered(F, tau0, h, M);
    const double dx = grid.dx();

    Trajectory traj;
    traj.grid = grid;
    traj.eps = config.eps;
    traj.bound = M;
    traj.dt = dt;

    FBState state{std::move(u0), 0.0, config.eps};
    struct Instant {
        double mass;
        std::array<double, 3> energy;
        double gradv;
        double ut;
        Field v;
    };
    auto measure = [&](const Field& u) {
        Instant in{u.integral(), {}, 0.0, 0.0, model.derive_v(u)};
        for (std::size_t k = 0; k < 3; ++k) in.energy[k] = total_psi(u.values(), dx, family.pairs[k]);
        in.gradv = gradient_energy(in.v.values(), dx);
        const Field ut = laplacian_neumann(in.v);
        double s = 0.0;
        for (double x : ut.values()) s += x * x;
        in.ut = config.eps * s * dx;
        return in;
    };
    Instant prev = measure(state.u);
    traj.diagnostics.push_back({0.0, prev.mass, prev.energy, 0.0, 0.0});
    auto snap = [&](const Field& v) {
        traj.snapshots.push_back({state.t, {state.u.values().begin(), state.u.values().end()},
                                  {v.values().begin(), v.values().end()}});
    };
    snap(prev.v);

    const double cadence = config.snapshot_cadence;
    double next_snap = cadence;
    double gradv = 0.0;
    double ut = 0.0;
    for (int n = 1; n <= n_steps; ++n) {
        state = model.step(state, dt);
        state.t = (n == n_steps) ? config.t_end : n * dt;
        Instant now = measure(state.u);
        gradv += 0.5 * dt * (prev.gradv + now.gradv);
        ut += 0.5 * dt * (prev.ut + now.ut);
        traj.diagnostics.push_back({state.t, now.mass, now.energy, gradv, ut});

        const double slack = 1e-9 * dt;
        if (n == n_steps || cadence <= 0.0 || state.t >= next_snap - slack) snap(now.v);
        if (cadence > 0.0)
            while (next_snap <= state.t + slack) next_snap += cadence;
        prev = std::move(now);
    }
    return traj;
}

}  // namespace fastlimit
