#include "fastlimit/nonlinearity.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fastlimit/error.hpp"

namespace fastlimit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kContinuityTol = 1e-12;

double cubic_value(const std::array<double, 3>& c, double u) {
    return ((c[0] * u + c[1]) * u + c[2]) * u;
}

double cubic_slope(const std::array<double, 3>& c, double u) {
    return (3.0 * c[0] * u + 2.0 * c[1]) * u + c[2];
}

}  // namespace

NonlinearitySpec canonical_affine_spec() {
    NonlinearitySpec s;
    s.kind = NonlinearityKind::PiecewiseAffine;
    s.breakpoints = {{0.0, 0.0}, {1.0, 2.0}, {1.25, 1.5}};
    s.slopes = {2.0, -2.0, 4.0};
    return s;
}

NonlinearitySpec canonical_cubic_spec() {
    NonlinearitySpec s;
    s.kind = NonlinearityKind::SmoothCubic;
    s.cubic = {1.0, -3.0, 2.5};
    return s;
}

Nonlinearity::Nonlinearity(NonlinearitySpec spec) : spec_(std::move(spec)) {
    if (spec_.kind == NonlinearityKind::PiecewiseAffine) {
        const auto& bp = spec_.breakpoints;
        const auto& s = spec_.slopes;
        if (bp.empty() || bp.size() != s.size())
            throw ShapeError("piecewise affine F needs one slope per breakpoint");
        for (std::size_t j = 0; j < bp.size(); ++j) {
            if (!std::isfinite(bp[j].x) || !std::isfinite(bp[j].y) || !std::isfinite(s[j]))
                throw ShapeError("piecewise affine F has non-finite data");
            if (s[j] == 0.0)
                throw ShapeError("piecewise affine F has a flat segment");
            if (j + 1 < bp.size()) {
                if (!(bp[j + 1].x > bp[j].x))
                    throw ShapeError("breakpoints must be strictly increasing");
                const double end = bp[j].y + s[j] * (bp[j + 1].x - bp[j].x);
                const double scale = std::max({1.0, std::abs(end), std::abs(bp[j + 1].y)});
                if (std::abs(end - bp[j + 1].y) > kContinuityTol * scale) {
                    std::ostringstream os;
                    os << "piecewise affine F is discontinuous at x=" << bp[j + 1].x
                       << " (left value " << end << ", right value " << bp[j + 1].y << ")";
                    throw ShapeError(os.str());
                }
            }
        }
        // sign pattern + ... + - ... - + ... +
        const int m = static_cast<int>(s.size());
        int k = 0;
        while (k < m && s[k] > 0) ++k;
        first_decreasing_ = k;
        while (k < m && s[k] < 0) ++k;
        first_rising_ = k;
        while (k < m && s[k] > 0) ++k;
        if (first_decreasing_ == 0 || first_decreasing_ >= m || first_rising_ >= m || k != m)
            throw ShapeError(
                "F must increase, then decrease, then increase (exactly one local max and min)");

        thr_.alpha_plus = bp[first_decreasing_].x;
        thr_.beta_minus = bp[first_rising_].x;
        thr_.f_plus = bp[first_decreasing_].y;
        thr_.f_minus = bp[first_rising_].y;
        lipschitz_ = 0.0;
        for (double sj : s) lipschitz_ = std::max(lipschitz_, std::abs(sj));
    } else {
        const auto& c = spec_.cubic;
        for (double ci : c)
            if (!std::isfinite(ci)) throw ShapeError("cubic F has non-finite coefficients");
        if (!(c[0] > 0.0)) throw ShapeError("cubic F needs c3 > 0 so that F -> inf");
        // F'(u) = 3 c3 u^2 + 2 c2 u + c1
        const double a = 3.0 * c[0];
        const double b = 2.0 * c[1];
        const double disc = b * b - 4.0 * a * c[2];
        if (!(disc > 0.0))
            throw ShapeError("cubic F is monotone (F' has no two distinct real roots)");
        const double sq = std::sqrt(disc);
        // numerically stable pair of roots
        const double q = -0.5 * (b + std::copysign(sq, b));
        double r1 = q / a;
        double r2 = (q != 0.0) ? c[2] / q : -r1;
        if (r1 > r2) std::swap(r1, r2);
        thr_.alpha_plus = r1;
        thr_.beta_minus = r2;
        thr_.f_plus = cubic_value(c, r1);
        thr_.f_minus = cubic_value(c, r2);
    }

    if (!(thr_.alpha_plus > 0.0))
        throw ShapeError("F must have its local maximum at a positive argument");
    if (std::abs((*this)(0.0)) > kContinuityTol) throw ShapeError("F(0) must be 0");
    if (thr_.f_minus < 0.0) throw ShapeError("F must be nonnegative on [0, inf)");
    if (!(thr_.f_minus < thr_.f_plus)) throw ShapeError("F must have f- < f+");

    thr_.alpha_minus = inverse(1, thr_.f_minus);
    thr_.beta_plus = inverse(3, thr_.f_plus);
    if (spec_.kind == NonlinearityKind::SmoothCubic)
        lipschitz_ = lipschitz_on(0.0, thr_.beta_plus);
}

double Nonlinearity::operator()(double u) const {
    if (spec_.kind == NonlinearityKind::SmoothCubic) return cubic_value(spec_.cubic, u);
    const int k = affine_segment(u);
    const auto& p = spec_.breakpoints[k];
    return p.y + spec_.slopes[k] * (u - p.x);
}

double Nonlinearity::derivative(double u) const {
    if (spec_.kind == NonlinearityKind::SmoothCubic) return cubic_slope(spec_.cubic, u);
    return spec_.slopes[affine_segment(u)];
}

int Nonlinearity::affine_segment(double u) const {
    const auto& bp = spec_.breakpoints;
    const auto it = std::upper_bound(bp.begin(), bp.end(), u,
                                     [](double val, const Breakpoint& b) { return val < b.x; });
    if (it == bp.begin()) return 0;
    return static_cast<int>(std::distance(bp.begin(), it)) - 1;
}

int Nonlinearity::affine_branch_segment(int branch, double lambda) const {
    const auto& bp = spec_.breakpoints;
    const int m = static_cast<int>(bp.size());
    int lo = 0;
    int hi = first_decreasing_;
    if (branch == 2) {
        lo = first_decreasing_;
        hi = first_rising_;
    } else if (branch == 3) {
        lo = first_rising_;
        hi = m;
    }
    for (int k = lo; k < hi - 1; ++k) {
        const double end = bp[k + 1].y;
        if (branch == 2 ? lambda >= end : lambda <= end) return k;
    }
    return hi - 1;
}

double Nonlinearity::solve_monotone(double lambda, double lo, double hi, bool increasing) const {
    const auto& F = *this;
    for (int it = 0; it < 200; ++it) {
        const double mid = lo + 0.5 * (hi - lo);
        if (!(mid > lo && mid < hi)) break;
        const double f = F(mid);
        if (increasing ? (f < lambda) : (f > lambda))
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(F(lo) - lambda) <= std::abs(F(hi) - lambda) ? lo : hi;
}

double Nonlinearity::inverse(int branch, double lambda) const {
    const auto& t = thr_;
    switch (branch) {
        case 1:
            if (lambda >= t.f_plus) return t.alpha_plus;
            break;
        case 2:
            if (lambda <= t.f_minus) return t.beta_minus;
            if (lambda >= t.f_plus) return t.alpha_plus;
            break;
        case 3:
            if (lambda <= t.f_minus) return t.beta_minus;
            break;
        default:
            throw std::invalid_argument("branch must be 1, 2 or 3");
    }

    if (spec_.kind == NonlinearityKind::PiecewiseAffine) {
        const int k = affine_branch_segment(branch, lambda);
        const auto& p = spec_.breakpoints[k];
        double x = p.x + (lambda - p.y) / spec_.slopes[k];
        if (branch == 1) x = std::min(x, t.alpha_plus);
        if (branch == 2) x = std::clamp(x, t.alpha_plus, t.beta_minus);
        if (branch == 3) x = std::max(x, t.beta_minus);
        return x;
    }

    const auto& F = *this;
    if (branch == 2) return solve_monotone(lambda, t.alpha_plus, t.beta_minus, false);
    if (branch == 1) {
        double lo = t.alpha_plus - 1.0;
        while (F(lo) > lambda) lo = t.alpha_plus - 2.0 * (t.alpha_plus - lo);
        return solve_monotone(lambda, lo, t.alpha_plus, true);
    }
    double hi = t.beta_minus + 1.0;
    while (F(hi) < lambda) hi = t.beta_minus + 2.0 * (hi - t.beta_minus);
    return solve_monotone(lambda, t.beta_minus, hi, true);
}

double Nonlinearity::inverse_slope(int branch, double lambda) const {
    const auto& t = thr_;
    switch (branch) {
        case 1:
            if (lambda > t.f_plus) return 0.0;
            break;
        case 2:
            if (lambda < t.f_minus || lambda > t.f_plus) return 0.0;
            break;
        case 3:
            if (lambda < t.f_minus) return 0.0;
            break;
        default:
            throw std::invalid_argument("branch must be 1, 2 or 3");
    }

    if (spec_.kind == NonlinearityKind::PiecewiseAffine)
        return 1.0 / spec_.slopes[affine_branch_segment(branch, lambda)];

    // smooth fold: S_i' is infinite at the branch ends f-, f+
    if (branch == 1 && lambda == t.f_plus) return kInf;
    if (branch == 3 && lambda == t.f_minus) return kInf;
    if (branch == 2 && (lambda == t.f_plus || lambda == t.f_minus)) return -kInf;
    const double d = derivative(inverse(branch, lambda));
    if (branch == 2) return d < 0.0 ? 1.0 / d : -kInf;
    return d > 0.0 ? 1.0 / d : kInf;
}

double Nonlinearity::slope_weight(int branch, double lambda, Variant variant) const {
    const double s = inverse_slope(branch, lambda);
    return variant == Variant::FastReaction ? s + 1.0 : s;
}

int Nonlinearity::branch_of(double u) const {
    if (u <= thr_.alpha_plus) return 1;
    if (u < thr_.beta_minus) return 2;
    return 3;
}

double Nonlinearity::lipschitz_on(double a, double b) const {
    if (a > b) std::swap(a, b);
    if (spec_.kind == NonlinearityKind::PiecewiseAffine) {
        const int ka = affine_segment(a);
        const int kb = affine_segment(b);
        double m = 0.0;
        for (int k = ka; k <= kb; ++k) m = std::max(m, std::abs(spec_.slopes[k]));
        return m;
    }
    const auto& c = spec_.cubic;
    double m = std::max(std::abs(cubic_slope(c, a)), std::abs(cubic_slope(c, b)));
    const double vertex = -c[1] / (3.0 * c[0]);
    if (vertex > a && vertex < b) m = std::max(m, std::abs(cubic_slope(c, vertex)));
    return m;
}

std::vector<double> Nonlinearity::kinks() const {
    std::vector<double> out;
    if (spec_.kind == NonlinearityKind::PiecewiseAffine)
        for (std::size_t j = 1; j < spec_.breakpoints.size(); ++j)
            out.push_back(spec_.breakpoints[j].x);
    return out;
}

std::vector<double> Nonlinearity::slope_breaks() const {
    std::vector<double> out;
    if (spec_.kind == NonlinearityKind::PiecewiseAffine) {
        for (std::size_t j = 1; j < spec_.breakpoints.size(); ++j) {
            const double y = spec_.breakpoints[j].y;
            if (y > thr_.f_minus && y < thr_.f_plus) out.push_back(y);
        }
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

std::vector<double> Nonlinearity::preimages(double lambda) const {
    std::vector<double> out;
    if (lambda <= thr_.f_plus) out.push_back(inverse(1, lambda));
    if (lambda > thr_.f_minus && lambda < thr_.f_plus) out.push_back(inverse(2, lambda));
    if (lambda >= thr_.f_minus) out.push_back(inverse(3, lambda));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

Thresholds analyze(const NonlinearitySpec& spec) { return Nonlinearity(spec).thresholds(); }

namespace {

// Midpoints of the pieces of (f-, f+) on which all S_i' are smooth.
std::vector<double> piece_midpoints(const Nonlinearity& F) {
    const auto& t = F.thresholds();
    std::vector<double> cuts{t.f_minus};
    for (double b : F.slope_breaks()) cuts.push_back(b);
    cuts.push_back(t.f_plus);
    std::vector<double> mids;
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) mids.push_back(0.5 * (cuts[k] + cuts[k + 1]));
    return mids;
}

std::vector<double> open_grid(double a, double b, int n) {
    std::vector<double> out(n);
    for (int k = 0; k < n; ++k) out[k] = a + (b - a) * (k + 0.5) / n;
    return out;
}

}  // namespace

TheoremDVerdict check_theorem_D(const Nonlinearity& F) {
    const auto& t = F.thresholds();
    const bool affine = F.kind() == NonlinearityKind::PiecewiseAffine;

    bool unstable_branch_ok = true;
    const auto probe = affine ? piece_midpoints(F) : open_grid(t.f_minus, t.f_plus, 1024);
    for (double lam : probe)
        if (!(F.inverse_slope(2, lam) + 1.0 > 0.0)) unstable_branch_ok = false;

    std::vector<double> candidates{0.5 * (t.f_minus + t.f_plus)};
    for (double lam : probe) candidates.push_back(lam);

    TheoremDVerdict verdict;
    for (double tau : candidates) {
        const double s1 = F.inverse_slope(1, tau);
        const double s3 = F.inverse_slope(3, tau);
        if (std::abs(s1 - s3) > 1e-12 * std::max({1.0, std::abs(s1), std::abs(s3)})) {
            verdict.witness_tau0 = tau;
            break;
        }
    }
    verdict.holds = unstable_branch_ok && verdict.witness_tau0.has_value();
    return verdict;
}

bool nondegenerate_constant_triple(const std::array<double, 3>& w) {
    const double m = std::max({std::abs(w[0]), std::abs(w[1]), std::abs(w[2])});
    if (m == 0.0) return false;
    return std::abs(w[1] - w[0]) <= 1e-12 * m && std::abs(w[2] - w[0]) <= 1e-12 * m;
}

bool nondegenerate_sampled(const std::vector<std::array<double, 3>>& rows, double rank_tol) {
    Eigen::MatrixXd W(static_cast<Eigen::Index>(rows.size()), 3);
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (int i = 0; i < 3; ++i) W(static_cast<Eigen::Index>(k), i) = rows[k][i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(W, Eigen::ComputeFullV);
    const auto& sigma = svd.singularValues();
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    const Eigen::Matrix3d V = svd.matrixV();
    for (int k = 0; k < 3; ++k) {
        const double sk = k < sigma.size() ? sigma(k) : 0.0;
        if (smax > 0.0 && sk > rank_tol * smax) continue;
        // null direction: must have zero coefficient sum
        if (std::abs(V.col(k).sum()) > 1e-6) return false;
    }
    return true;
}

bool check_nondegeneracy(const Nonlinearity& F, Variant variant) {
    const auto& t = F.thresholds();
    auto weights = [&](double lam) {
        return std::array<double, 3>{F.slope_weight(1, lam, variant),
                                     F.slope_weight(2, lam, variant),
                                     F.slope_weight(3, lam, variant)};
    };
    if (F.kind() == NonlinearityKind::PiecewiseAffine) {
        for (double mid : piece_midpoints(F))
            if (!nondegenerate_constant_triple(weights(mid))) return false;
        return true;
    }
    // analytic slopes: a linear relation on any subinterval extends to all of
    // (f-, f+), so sampling the central part of the interval is enough
    const double w = t.f_plus - t.f_minus;
    std::vector<std::array<double, 3>> rows;
    for (double lam : open_grid(t.f_minus + 0.1 * w, t.f_plus - 0.1 * w, 64))
        rows.push_back(weights(lam));
    return nondegenerate_sampled(rows);
}

}  // namespace fastlimit
