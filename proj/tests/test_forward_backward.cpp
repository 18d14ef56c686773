#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fastlimit/error.hpp"
#include "fastlimit/forward_backward.hpp"

using namespace fastlimit;

namespace {

double mass(const Field& u) { return u.integral(); }

Field mode_field(const Grid& g, double c, double a, int k) {
    Field u(g);
    for (int j = 0; j < g.n_cells; ++j) u[j] = c + a * std::cos(k * std::numbers::pi * g.x(j) / g.length);
    return u;
}

double mode_amplitude(const Field& u, double c, int k) {
    const Grid& g = u.grid();
    double num = 0.0, den = 0.0;
    for (int j = 0; j < g.n_cells; ++j) {
        const double phi = std::cos(k * std::numbers::pi * g.x(j) / g.length);
        num += (u[j] - c) * phi;
        den += phi * phi;
    }
    return num / den;
}

ForwardBackwardConfig small_config(double eps) {
    ForwardBackwardConfig c;
    c.grid = Grid(256, 1.0);
    c.eps = eps;
    c.t_end = 0.02;
    c.init.generator = InitialGenerator::PhaseCheckerboard;
    return c;
}

}  // namespace

TEST_CASE("derive_v") {
    const Nonlinearity F = Nonlinearity::canonical_cubic();
    const Grid g(128, 1.0);
    const Field c(g, 0.4);
    const Field vc = derive_v(c, F, 1e-2);
    for (double x : vc.values()) CHECK(std::abs(x - F(0.4)) <= 1e-13);

    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> d(0.0, 2.0);
    Field u(g);
    for (int j = 0; j < g.n_cells; ++j) u[j] = d(rng);
    Field fu(g);
    for (int j = 0; j < g.n_cells; ++j) fu[j] = F(u[j]);
    const Field v = derive_v(u, F, 1e-2);
    CHECK(std::abs(v.mean() - fu.mean()) <= 1e-12);

    const Field smooth = mode_field(g, 1.0, 0.5, 2);
    auto gap = [&](double eps) {
        const Field vs = derive_v(smooth, F, eps);
        double m = 0.0;
        for (int j = 0; j < g.n_cells; ++j) m = std::max(m, std::abs(vs[j] - F(smooth[j])));
        return m;
    };
    const double g1 = gap(1e-3), g2 = gap(2.5e-4), g3 = gap(6.25e-5);
    CHECK(g2 < g1);
    CHECK(g3 < g2);
    CHECK(g2 / g1 < 0.5);
}

TEST_CASE("invariant bound and Lipschitz constant") {
    const Nonlinearity A = Nonlinearity::canonical_affine();
    const Grid g(16, 1.0);
    const Field u(g, 0.5);
    // max(|F(u0)|, f+) = 2 maps to S3(2) = beta+
    CHECK(fb_invariant_bound(u, A) == doctest::Approx(A.thresholds().beta_plus));
    CHECK(fb_lipschitz(A, 2.0) == 4.0);
    const Nonlinearity C = Nonlinearity::canonical_cubic();
    CHECK(fb_lipschitz(C, C.thresholds().beta_plus) == doctest::Approx(2.5));
}

TEST_CASE("constant state is stationary and mass is conserved") {
    for (const Nonlinearity& F : {Nonlinearity::canonical_affine(), Nonlinearity::canonical_cubic()}) {
        const Grid g(128, 1.0);
        const double eps = 1e-2;
        const ForwardBackwardModel model(F, g, eps, fb_lipschitz(F, 3.0), 3.0);
        const FBState s{Field(g, 0.6), 0.0, eps};
        const FBState n = model.step(s, 0.5 * model.stable_dt());
        for (int j = 0; j < g.n_cells; ++j) CHECK(std::abs(n.u[j] - 0.6) <= 1e-12);

        std::mt19937_64 rng(2);
        std::uniform_real_distribution<double> d(0.0, F.thresholds().beta_plus);
        Field u(g);
        for (int j = 0; j < g.n_cells; ++j) u[j] = d(rng);
        FBState r{u, 0.0, eps};
        const double m0 = mass(u);
        for (int k = 0; k < 20; ++k) {
            r = model.step(r, 0.5 * model.stable_dt());
            CHECK(std::abs(mass(r.u) - m0) <= 1e-12);
        }
    }
}

TEST_CASE("single-mode decay matches the linearisation") {
    const Nonlinearity F = Nonlinearity::canonical_affine();
    const Grid g(128, 1.0);
    const double eps = 1e-2;
    const double c = 0.5;  // I1, F'(c) = 2
    const int k = 2;
    const ForwardBackwardModel model(F, g, eps, F.lipschitz_bound(), 3.0);
    FBState s{mode_field(g, c, 0.05, k), 0.0, eps};
    const double a0 = mode_amplitude(s.u, c, k);
    const double dt = 0.25 * model.stable_dt();
    const int n = 20;
    for (int i = 0; i < n; ++i) s = model.step(s, dt);
    const double a1 = mode_amplitude(s.u, c, k);
    const double measured = -std::log(a1 / a0) / (n * dt);
    const double mu = neumann_mode_rate(g, k);
    const double predicted = mu * F.derivative(c) / (1.0 + eps * mu);
    CHECK(std::abs(measured - predicted) <= 0.05 * predicted);
}

TEST_CASE("stability boundary") {
    const Nonlinearity F = Nonlinearity::canonical_affine();
    const Grid g(64, 1.0);
    const double eps = 1e-2;
    const double lip = F.lipschitz_bound();
    const ForwardBackwardModel model(F, g, eps, lip, 3.0);
    CHECK(model.stable_dt() == doctest::Approx(2 * eps / lip));

    const FBState s{mode_field(g, 1.33, 1e-3, g.n_cells - 1), 0.0, eps};
    CHECK_THROWS_AS(model.step(s, 4 * eps / lip), std::invalid_argument);

    // c_dt = 1: highest mode around a constant on the steepest branch does not grow
    FBState r = s;
    const double a0 = std::abs(mode_amplitude(r.u, 1.33, g.n_cells - 1));
    for (int i = 0; i < 50; ++i) r = model.step(r, model.stable_dt());
    CHECK(std::abs(mode_amplitude(r.u, 1.33, g.n_cells - 1)) <= a0 * (1 + 1e-12));
}

TEST_CASE("bound violation raises a solver error") {
    const Nonlinearity F = Nonlinearity::canonical_affine();
    const Grid g(8, 1.0);
    const ForwardBackwardModel model(F, g, 1e-2, 4.0, 1.0);
    const FBState s{Field(g, 1.2), 0.0, 1e-2};
    CHECK_THROWS_AS(model.step(s, 1e-4), SolverError);
}

TEST_CASE("fb_simulate: constant data is flat") {
    ForwardBackwardConfig c = small_config(1e-2);
    c.init.generator = InitialGenerator::Constant;
    c.init.value = 0.7;
    const Trajectory tr = fb_simulate(c);
    for (const auto& row : tr.diagnostics) {
        CHECK(std::abs(row.mass - tr.diagnostics.front().mass) <= 1e-13);
        CHECK(row.dissip_gradv <= 1e-20);
        CHECK(row.dissip_coupling <= 1e-20);
    }
}

TEST_CASE("fb_simulate: Lyapunov functionals are nonincreasing") {
    for (const Nonlinearity& F : {Nonlinearity::canonical_affine(), Nonlinearity::canonical_cubic()}) {
        ForwardBackwardConfig c = small_config(1e-2);
        c.nonlinearity = F.spec();
        c.init.generator = InitialGenerator::SineMix;
        c.init.seed = 5;
        const Trajectory tr = fb_simulate(c);
        const auto& d = tr.diagnostics;
        for (std::size_t n = 1; n < d.size(); ++n) {
            CHECK(std::abs(d[n].mass - d[0].mass) <= 1e-12);
            for (int k = 0; k < 3; ++k) CHECK(d[n].energy[k] - d[n - 1].energy[k] <= 1e-8 * tr.dt);
        }
        for (const auto& snap : tr.snapshots)
            for (double x : snap.u) {
                CHECK(x >= -1e-10);
                CHECK(x <= tr.bound + 1e-10);
            }
    }
}

TEST_CASE("fb_simulate: eps |u_t|^2 is bounded uniformly in eps") {
    ForwardBackwardConfig a = small_config(4e-3);
    ForwardBackwardConfig b = small_config(1e-3);
    a.init.generator = b.init.generator = InitialGenerator::SineMix;
    const double da = fb_simulate(a).diagnostics.back().dissip_coupling;
    const double db = fb_simulate(b).diagnostics.back().dissip_coupling;
    CHECK(da > 0.0);
    CHECK(db > 0.0);
    CHECK(std::max(da, db) <= 10.0 * std::min(da, db));
}
