#include <doctest.h>

#include <cmath>
#include <random>

#include "fastlimit/error.hpp"
#include "fastlimit/young_measure.hpp"

using namespace fastlimit;

namespace {

const Nonlinearity& affine() {
    static const Nonlinearity F = Nonlinearity::canonical_affine();
    return F;
}

// theta at a = S1(r), 1 - theta at b = S3(r), drawn from a fast oscillation
std::vector<double> two_atom_samples(double theta, double r, std::size_t n, std::uint64_t seed) {
    const double a = affine().inverse(1, r);
    const double b = affine().inverse(3, r);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    std::vector<double> u(n);
    const double freq = 997.0;
    for (auto& x : u) {
        const double pos = d(rng);
        const double frac = pos * freq - std::floor(pos * freq);
        x = frac < theta ? a : b;
    }
    return u;
}

Trajectory constant_trajectory(double u, double v, int n_cells, int n_snaps) {
    Trajectory tr;
    tr.grid = Grid(n_cells, 1.0);
    for (int k = 0; k <= n_snaps; ++k)
        tr.snapshots.push_back({k * 0.1, std::vector<double>(n_cells, u), std::vector<double>(n_cells, v)});
    return tr;
}

}  // namespace

TEST_CASE("binning alignment") {
    const auto& t = affine().thresholds();
    const Binning bu = u_axis_binning(affine(), 1.6, 128);
    CHECK(bu.on_edge(t.alpha_plus));
    CHECK(bu.on_edge(t.beta_minus));
    CHECK(bu.lo() <= 0.0);
    CHECK(bu.hi() >= 1.6);
    const Binning bv = value_axis_binning(affine(), 2.5, 128);
    CHECK(bv.on_edge(t.f_minus));
    CHECK(bv.on_edge(t.f_plus));
    // values just below and at an anchor never share a bin
    CHECK(bv.index(t.f_plus) == bv.index(std::nextafter(t.f_plus, 0.0)) + 1);
    CHECK(bv.index(-5.0) == 0);
    CHECK(bv.index(50.0) == bv.size() - 1);
}

TEST_CASE("empirical measure") {
    const Binning b(0.0, 2.0, 64);
    const std::vector<double> same(100, 0.7);
    const auto mu = empirical_measure(same, b);
    CHECK(mu.total_mass == doctest::Approx(1.0));
    int occupied = 0;
    for (double m : mu.mass) occupied += m > 0;
    CHECK(occupied == 1);
    CHECK(mu.mass[b.index(0.7)] == 1.0);
    CHECK_THROWS_AS(empirical_measure(std::vector<double>{}, b), MeasureError);

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> d(0.0, 2.0);
    std::vector<double> x(5000);
    for (auto& s : x) s = d(rng);
    const auto m = empirical_measure(x, b);
    double sum = 0.0;
    for (double w : m.mass) sum += w;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    CHECK(std::abs(m.mean() - sample_mean_variance(x).first) <= 0.5 * b.width() + 1e-12);
}

TEST_CASE("two-atom oscillation oracle") {
    const Binning b = u_axis_binning(affine(), 1.6, 128);
    const std::size_t N = 10000;
    for (double theta : {0.1, 0.3, 0.5}) {
        const auto u = two_atom_samples(theta, 1.75, N, 17);
        const auto mu = empirical_measure(u, b);
        const double a = affine().inverse(1, 1.75);
        CHECK(std::abs(mu.mass[b.index(a)] - theta) <= 3.0 / std::sqrt(double(N)));
        const auto w = phase_weights(u, affine());
        CHECK(std::abs(w[0] - theta) <= 3.0 / std::sqrt(double(N)));
        CHECK(w[1] == 0.0);
        CHECK(w[0] + w[1] + w[2] == 1.0);
    }
}

TEST_CASE("restrictions") {
    const Binning b = u_axis_binning(affine(), 1.6, 128);
    const std::vector<double> atom(10, 0.5);
    const auto mu = empirical_measure(atom, b);
    const auto r1 = restrict(mu, 1, affine());
    CHECK(r1.mass == mu.mass);
    CHECK(restrict(mu, 2, affine()).total_mass == 0.0);
    CHECK(restrict(mu, 3, affine()).total_mass == 0.0);

    const auto u = two_atom_samples(0.3, 1.75, 4000, 1);
    const auto mu2 = empirical_measure(u, b);
    const auto w = phase_weights(u, affine());
    CHECK(restrict(mu2, 1, affine()).total_mass == doctest::Approx(w[0]).epsilon(1e-12));
    CHECK(restrict(mu2, 3, affine()).total_mass == doctest::Approx(w[2]).epsilon(1e-12));

    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> d(0.0, 1.6);
    std::vector<double> x(3000);
    for (auto& s : x) s = d(rng);
    const auto mu3 = empirical_measure(x, b);
    const auto a1 = restrict(mu3, 1, affine());
    const auto a2 = restrict(mu3, 2, affine());
    const auto a3 = restrict(mu3, 3, affine());
    for (int k = 0; k < b.size(); ++k) CHECK(std::abs(a1.mass[k] + a2.mass[k] + a3.mass[k] - mu3.mass[k]) <= 1e-12);
    CHECK(std::abs(a1.total_mass + a2.total_mass + a3.total_mass - 1.0) <= 1e-12);

    const auto bad = empirical_measure(x, Binning(0.0, 2.0, 100));
    CHECK_THROWS_AS(restrict(bad, 1, affine()), MeasureError);
}

TEST_CASE("push-forward") {
    const Binning bv = value_axis_binning(affine(), 2.5, 128);
    const std::vector<double> atom(20, 0.4);
    const auto p = pushforward(atom, affine(), bv);
    CHECK(p.mass[bv.index(affine()(0.4))] == 1.0);

    const auto u = two_atom_samples(0.4, 1.75, 2000, 2);
    const auto q = pushforward(u, affine(), bv);
    int occupied = 0;
    for (double m : q.mass) occupied += m > 0;
    CHECK(occupied == 1);
    CHECK(q.mass[bv.index(1.75)] == doctest::Approx(1.0).epsilon(1e-12));

    // restricted push-forwards add up to the full one
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> d(0.0, 1.6);
    std::vector<double> x(3000), v(3000);
    for (auto& s : x) s = d(rng);
    const auto full = pushforward(x, affine(), bv);
    const auto p1 = pushforward_restricted(x, 1, affine(), bv);
    const auto p2 = pushforward_restricted(x, 2, affine(), bv);
    const auto p3 = pushforward_restricted(x, 3, affine(), bv);
    for (int k = 0; k < bv.size(); ++k)
        CHECK(std::abs(p1.mass[k] + p2.mass[k] + p3.mass[k] - full.mass[k]) <= 1e-12);

    // v close to F(u): histograms differ by at most twice the straggler fraction
    std::uniform_real_distribution<double> noise(-0.1 * bv.width(), 0.1 * bv.width());
    std::size_t stragglers = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        v[i] = affine()(x[i]) + noise(rng);
        stragglers += bv.index(v[i]) != bv.index(affine()(x[i]));
    }
    const auto hv = empirical_measure(v, bv);
    double tv = 0.0;
    for (int k = 0; k < bv.size(); ++k) tv += std::abs(hv.mass[k] - full.mass[k]);
    CHECK(tv <= 2.0 * double(stragglers) / double(x.size()) + 1e-12);
}

TEST_CASE("Radon-Nikodym densities") {
    const Binning bv = value_axis_binning(affine(), 2.5, 128);
    const auto u = two_atom_samples(0.3, 1.75, 5000, 3);
    const auto w = phase_weights(u, affine());
    const auto g = radon_nikodym_densities(u, affine(), bv);
    const int k = bv.index(1.75);
    REQUIRE(g.occupied[k]);
    CHECK(g.g[k][0] == doctest::Approx(w[0]).epsilon(1e-12));
    CHECK(g.g[k][1] == 0.0);
    CHECK(g.g[k][2] == doctest::Approx(w[2]).epsilon(1e-12));

    std::vector<double> mid(50);
    for (std::size_t i = 0; i < mid.size(); ++i) mid[i] = 1.01 + 0.2 * i / mid.size();
    const auto g2 = radon_nikodym_densities(mid, affine(), bv);
    for (int b = 0; b < bv.size(); ++b)
        if (g2.occupied[b]) CHECK(g2.g[b][1] == 1.0);

    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(0.0, 1.6);
    std::vector<double> x(4000);
    for (auto& s : x) s = d(rng);
    const auto g3 = radon_nikodym_densities(x, affine(), bv);
    for (int b = 0; b < bv.size(); ++b) {
        if (!g3.occupied[b]) {
            CHECK(g3.count[b] == 0);
            continue;
        }
        for (double gi : g3.g[b]) CHECK(gi >= 0.0);
        CHECK(std::abs(g3.g[b][0] + g3.g[b][1] + g3.g[b][2] - 1.0) <= 1e-12);
    }
}

TEST_CASE("phase weights") {
    const std::vector<double> high(30, 1.35);
    const auto w = phase_weights(high, affine());
    CHECK(w == std::array<double, 3>{0.0, 0.0, 1.0});
}

TEST_CASE("dirac score") {
    const Binning b(0.0, 1.0, 10);
    EmpiricalMeasure single{b, std::vector<double>(10, 0.0), 1.0};
    single.mass[4] = 1.0;
    CHECK(dirac_score(single) == 1.0);

    EmpiricalMeasure even{b, std::vector<double>(10, 0.0), 1.0};
    even.mass[0] = even.mass[9] = 0.5;
    CHECK(dirac_score(even) == doctest::Approx(0.0).epsilon(1e-12));

    EmpiricalMeasure skew{b, std::vector<double>(10, 0.0), 1.0};
    skew.mass[0] = 0.9;
    skew.mass[9] = 0.1;
    CHECK(dirac_score(skew) == doctest::Approx(0.64).epsilon(1e-12));
}

TEST_CASE("three-atom decomposition") {
    const Binning bv = value_axis_binning(affine(), 2.5, 128);
    const double r = 1.75;
    CellSamples s;
    const std::array<double, 3> weights{0.2, 0.3, 0.5};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < int(std::lround(weights[i] * 1000)); ++k) {
            s.u.push_back(affine().inverse(i + 1, r));
            s.v.push_back(r);
        }
    const double delta = 0.05 * (affine().thresholds().beta_plus - affine().thresholds().alpha_minus);
    const auto d = decompose(s, affine(), delta, bv);
    for (int i = 0; i < 3; ++i) {
        CHECK(d.lambda[i] == doctest::Approx(weights[i]).epsilon(1e-12));
        CHECK(d.atoms[i] == doctest::Approx(affine().inverse(i + 1, r)));
    }
    CHECK(d.lambda[0] + d.lambda[1] + d.lambda[2] == 1.0);
    CHECK(d.fit_residual == 0.0);
    CHECK_FALSE(d.flagged);
    CHECK(d.lambda == phase_weights(s.u, affine()));

    CellSamples two;
    two.u = two_atom_samples(0.4, r, 1000, 5);
    two.v.assign(two.u.size(), r);
    const auto d2 = decompose(two, affine(), delta, bv);
    CHECK(d2.lambda[1] == 0.0);
    CHECK(d2.fit_residual == 0.0);

    CellSamples spread = two;
    for (std::size_t i = 0; i < spread.v.size(); ++i) spread.v[i] = i % 2 ? 1.0 : 2.4;
    CHECK(decompose(spread, affine(), delta, bv).flagged);
}

TEST_CASE("cell sampling") {
    const Trajectory tr = constant_trajectory(0.5, 1.0, 64, 10);
    const auto cells = partition_cells(1.0, 1.0, 2, 4);
    REQUIRE(cells.size() == 8);
    std::size_t total = 0;
    for (const auto& c : cells) {
        const auto s = collect_cell_samples(tr, c, 16);
        for (double x : s.u) CHECK(x == 0.5);
        for (double x : s.v) CHECK(x == 1.0);
        total += s.u.size();
    }
    // t = 0 is excluded; every other snapshot and cell is used exactly once
    CHECK(total == 10u * 64u);
    CHECK_THROWS_AS(collect_cell_samples(tr, cells[0]), MeasureError);

    // disjoint cells partition the full window
    Trajectory rt;
    rt.grid = Grid(64, 1.0);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(0.0, 1.0);
    for (int k = 0; k <= 8; ++k) {
        std::vector<double> u(64);
        for (auto& x : u) x = d(rng);
        rt.snapshots.push_back({k * 0.125, u, u});
    }
    std::vector<double> pooled;
    for (const auto& c : partition_cells(1.0, 1.0, 4, 4)) {
        const auto s = collect_cell_samples(rt, c, 1);
        pooled.insert(pooled.end(), s.u.begin(), s.u.end());
    }
    const auto whole = collect_cell_samples(rt, CellSpec{0.0, 1.0, 0.0, 1.0, 0, 0}, 1);
    std::sort(pooled.begin(), pooled.end());
    auto all = whole.u;
    std::sort(all.begin(), all.end());
    CHECK(pooled == all);
}

TEST_CASE("checkerboard snapshot has two modes in ratio theta") {
    const Grid g(1024, 1.0);
    InitialDataSpec spec;
    spec.r = 1.75;
    spec.theta = 0.25;
    spec.period = 32;
    auto [u0, v0] = initial_data(spec, g, affine());
    Trajectory tr;
    tr.grid = g;
    tr.snapshots.push_back({0.0, {u0.values().begin(), u0.values().end()}, {v0.values().begin(), v0.values().end()}});
    const auto s = collect_cell_samples(tr, CellSpec{-1.0, 0.0, 0.0, 1.0, 0, 0});
    const double mid = 0.5 * (affine().inverse(1, 1.75) + affine().inverse(3, 1.75));
    std::size_t low = 0;
    for (double x : s.u) low += x < mid;
    CHECK(double(low) / s.u.size() == doctest::Approx(0.25).epsilon(0.02));
}
