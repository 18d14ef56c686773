#include "fastlimit/young_measure.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fastlimit/error.hpp"

namespace fastlimit {

Binning::Binning(double lo, double hi, int n) : lo_(lo), width_((hi - lo) / n), n_(n), anchor_(lo) {
    if (n < 1) throw MeasureError("binning needs at least one bin");
    if (!(hi > lo)) throw MeasureError("binning range must be nonempty");
}

double Binning::edge(int k) const { return anchor_ + (k - anchor_index_) * width_; }

int Binning::index(double x) const {
    const double r = std::floor((x - anchor_) / width_);
    if (!(r > -1e9)) return 0;
    if (r > 1e9) return n_ - 1;
    return std::clamp(anchor_index_ + static_cast<int>(r), 0, n_ - 1);
}

bool Binning::on_edge(double x) const {
    const double r = (x - anchor_) / width_;
    return std::abs(r - std::round(r)) <= 1e-9;
}

Binning Binning::aligned(double lo, double hi, double a, double b, int n_target) {
    if (!(lo <= a && a < b && b <= hi)) throw MeasureError("anchors must satisfy lo <= a < b <= hi");
    if (n_target < 1) throw MeasureError("binning needs at least one bin");
    const int k = std::max(1, static_cast<int>(std::lround((b - a) * n_target / (hi - lo))));
    const double w = (b - a) / k;
    const int below = static_cast<int>(std::ceil((a - lo) / w - 1e-9));
    const int above = std::max(k, static_cast<int>(std::ceil((hi - a) / w - 1e-9)));
    Binning out;
    out.width_ = w;
    out.n_ = below + above;
    out.anchor_ = a;
    out.anchor_index_ = below;
    out.lo_ = out.edge(0);
    return out;
}

Binning u_axis_binning(const Nonlinearity& F, double u_max, int n_target) {
    const auto& t = F.thresholds();
    return Binning::aligned(0.0, std::max(u_max, t.beta_minus), t.alpha_plus, t.beta_minus, n_target);
}

Binning value_axis_binning(const Nonlinearity& F, double v_max, int n_target) {
    const auto& t = F.thresholds();
    return Binning::aligned(0.0, std::max(v_max, t.f_plus), t.f_minus, t.f_plus, n_target);
}

double EmpiricalMeasure::mean() const {
    double s = 0.0;
    for (int k = 0; k < bins.size(); ++k) s += bins.center(k) * mass[k];
    return s / total_mass;
}

double EmpiricalMeasure::variance() const {
    const double m = mean();
    double s = 0.0;
    for (int k = 0; k < bins.size(); ++k) {
        const double d = bins.center(k) - m;
        s += d * d * mass[k];
    }
    return s / total_mass;
}

std::vector<CellSpec> partition_cells(double t_end, double length, int nt, int nx) {
    if (nt < 1 || nx < 1) throw MeasureError("cell partition needs at least one window per axis");
    std::vector<CellSpec> cells;
    cells.reserve(static_cast<std::size_t>(nt) * nx);
    for (int i = 0; i < nt; ++i)
        for (int k = 0; k < nx; ++k)
            cells.push_back({t_end * i / nt, t_end * (i + 1) / nt, length * k / nx,
                             length * (k + 1) / nx, i, k});
    return cells;
}

CellSamples collect_cell_samples(const Trajectory& traj, const CellSpec& cell, std::size_t min_samples) {
    const Grid& g = traj.grid;
    const double slack = 1e-12 * std::max(1.0, std::abs(cell.t1));
    int j0 = g.n_cells;
    int j1 = 0;
    for (int j = 0; j < g.n_cells; ++j) {
        const double x = g.x(j);
        if (x >= cell.x0 && x < cell.x1) {
            j0 = std::min(j0, j);
            j1 = std::max(j1, j + 1);
        }
    }
    CellSamples out;
    for (const auto& s : traj.snapshots) {
        if (!(s.t > cell.t0 + slack && s.t <= cell.t1 + slack)) continue;
        for (int j = j0; j < j1; ++j) {
            out.u.push_back(s.u[j]);
            out.v.push_back(s.v[j]);
        }
    }
    if (out.u.size() < min_samples) {
        std::ostringstream os;
        os << "cell (" << cell.t0 << ", " << cell.t1 << "] x [" << cell.x0 << ", " << cell.x1
           << ") holds " << out.u.size() << " samples, fewer than " << min_samples;
        throw MeasureError(os.str());
    }
    return out;
}

EmpiricalMeasure empirical_measure(std::span<const double> samples, const Binning& bins) {
    if (samples.empty()) throw MeasureError("empirical measure of an empty sample list");
    std::vector<std::size_t> count(bins.size(), 0);
    for (double x : samples) ++count[bins.index(x)];
    EmpiricalMeasure mu{bins, std::vector<double>(bins.size()), 0.0};
    const double n = static_cast<double>(samples.size());
    for (int k = 0; k < bins.size(); ++k) {
        mu.mass[k] = static_cast<double>(count[k]) / n;
        mu.total_mass += mu.mass[k];
    }
    return mu;
}

EmpiricalMeasure restrict(const EmpiricalMeasure& mu, int branch, const Nonlinearity& F) {
    const auto& t = F.thresholds();
    if (!mu.bins.on_edge(t.alpha_plus) || !mu.bins.on_edge(t.beta_minus))
        throw MeasureError("restriction needs alpha+ and beta- on bin edges");
    if (branch < 1 || branch > 3) throw MeasureError("branch must be 1, 2 or 3");
    EmpiricalMeasure out{mu.bins, std::vector<double>(mu.mass.size(), 0.0), 0.0};
    for (int k = 0; k < mu.bins.size(); ++k) {
        if (F.branch_of(mu.bins.center(k)) != branch) continue;
        out.mass[k] = mu.mass[k];
        out.total_mass += mu.mass[k];
    }
    return out;
}

EmpiricalMeasure pushforward(std::span<const double> u, const Nonlinearity& F, const Binning& bins) {
    std::vector<double> f(u.size());
    std::transform(u.begin(), u.end(), f.begin(), [&](double x) { return F(x); });
    return empirical_measure(f, bins);
}

EmpiricalMeasure pushforward_restricted(std::span<const double> u, int branch,
                                        const Nonlinearity& F, const Binning& bins) {
    if (u.empty()) throw MeasureError("push-forward of an empty sample list");
    EmpiricalMeasure out{bins, std::vector<double>(bins.size(), 0.0), 0.0};
    std::vector<std::size_t> count(bins.size(), 0);
    for (double x : u)
        if (F.branch_of(x) == branch) ++count[bins.index(F(x))];
    const double n = static_cast<double>(u.size());
    for (int k = 0; k < bins.size(); ++k) {
        out.mass[k] = static_cast<double>(count[k]) / n;
        out.total_mass += out.mass[k];
    }
    return out;
}

DensityTriple radon_nikodym_densities(std::span<const double> u, const Nonlinearity& F,
                                      const Binning& bins) {
    const auto n = static_cast<std::size_t>(bins.size());
    std::vector<std::array<std::size_t, 3>> by_branch(n, {0, 0, 0});
    for (double x : u) ++by_branch[bins.index(F(x))][F.branch_of(x) - 1];
    DensityTriple d{bins, std::vector<std::array<double, 3>>(n, {0.0, 0.0, 0.0}),
                    std::vector<bool>(n, false), std::vector<std::size_t>(n, 0)};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t total = by_branch[k][0] + by_branch[k][1] + by_branch[k][2];
        d.count[k] = total;
        if (total == 0) continue;
        d.occupied[k] = true;
        for (int i = 0; i < 3; ++i)
            d.g[k][i] = static_cast<double>(by_branch[k][i]) / static_cast<double>(total);
    }
    return d;
}

std::array<double, 3> phase_weights(std::span<const double> u, const Nonlinearity& F) {
    if (u.empty()) throw MeasureError("phase weights of an empty sample list");
    std::array<std::size_t, 3> c{0, 0, 0};
    for (double x : u) ++c[F.branch_of(x) - 1];
    const double n = static_cast<double>(u.size());
    if (c[2] == u.size()) return {0.0, 0.0, 1.0};
    const double l1 = static_cast<double>(c[0]) / n;
    const double l2 = static_cast<double>(c[1]) / n;
    return {l1, l2, 1.0 - (l1 + l2)};
}

double dirac_score(const EmpiricalMeasure& mu) {
    const int n = mu.bins.size();
    if (n < 2) return 1.0;
    const double range = mu.bins.center(n - 1) - mu.bins.center(0);
    return std::clamp(1.0 - mu.variance() / (0.25 * range * range), 0.0, 1.0);
}

std::pair<double, double> sample_mean_variance(std::span<const double> x) {
    if (x.empty()) throw MeasureError("statistics of an empty sample list");
    double m = 0.0;
    for (double a : x) m += a;
    m /= static_cast<double>(x.size());
    double s = 0.0;
    for (double a : x) s += (a - m) * (a - m);
    return {m, s / static_cast<double>(x.size())};
}

PhaseDecomposition decompose(const CellSamples& samples, const Nonlinearity& F, double delta,
                             const Binning& value_bins, double dirac_threshold) {
    if (samples.u.empty() || samples.u.size() != samples.v.size())
        throw MeasureError("decompose needs matching nonempty u and v samples");
    PhaseDecomposition d;
    d.dirac_score_v = dirac_score(empirical_measure(samples.v, value_bins));
    d.flagged = d.dirac_score_v < dirac_threshold;
    d.v_bar = sample_mean_variance(samples.v).first;
    for (int i = 0; i < 3; ++i) d.atoms[i] = F.inverse(i + 1, d.v_bar);
    d.lambda = phase_weights(samples.u, F);
    std::size_t far = 0;
    for (double x : samples.u) {
        bool near = false;
        for (double a : d.atoms) near = near || std::abs(x - a) <= delta;
        if (!near) ++far;
    }
    d.fit_residual = static_cast<double>(far) / static_cast<double>(samples.u.size());
    return d;
}

}  // namespace fastlimit
