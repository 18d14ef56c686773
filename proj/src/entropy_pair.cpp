#include "fastlimit/entropy_pair.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fastlimit {

TestFunction TestFunction::smoothed_step(double tau0, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("smoothed step needs delta > 0");
    return {TestFunctionKind::SmoothedStep, tau0, delta};
}

double TestFunction::operator()(double x) const {
    switch (kind) {
        case TestFunctionKind::Constant:
            return 1.0;
        case TestFunctionKind::Identity:
            return x;
        case TestFunctionKind::Cubic:
            return x * x * x;
        case TestFunctionKind::SmoothedStep:
            return std::clamp((x - tau0) / delta, 0.0, 1.0);
        case TestFunctionKind::SharpStep:
            return x >= tau0 ? 1.0 : 0.0;
    }
    return 0.0;
}

double TestFunction::derivative(double x) const {
    switch (kind) {
        case TestFunctionKind::Constant:
        case TestFunctionKind::SharpStep:
            return 0.0;
        case TestFunctionKind::Identity:
            return 1.0;
        case TestFunctionKind::Cubic:
            return 3.0 * x * x;
        case TestFunctionKind::SmoothedStep:
            return (x >= tau0 && x <= tau0 + delta) ? 1.0 / delta : 0.0;
    }
    return 0.0;
}

double TestFunction::antiderivative(double x) const {
    switch (kind) {
        case TestFunctionKind::Constant:
            return x;
        case TestFunctionKind::Identity:
            return 0.5 * x * x;
        case TestFunctionKind::Cubic:
            return 0.25 * x * x * x * x;
        case TestFunctionKind::SmoothedStep: {
            auto ramp_integral = [&](double y) {
                if (y <= tau0) return 0.0;
                if (y <= tau0 + delta) return (y - tau0) * (y - tau0) / (2.0 * delta);
                return 0.5 * delta + (y - tau0 - delta);
            };
            return ramp_integral(x) - ramp_integral(0.0);
        }
        case TestFunctionKind::SharpStep:
            return std::max(0.0, x - tau0) - std::max(0.0, -tau0);
    }
    return 0.0;
}

std::vector<double> TestFunction::kinks() const {
    if (kind == TestFunctionKind::SmoothedStep) return {tau0, tau0 + delta};
    if (kind == TestFunctionKind::SharpStep) return {tau0};
    return {};
}

std::string TestFunction::name() const {
    switch (kind) {
        case TestFunctionKind::Constant:
            return "one";
        case TestFunctionKind::Identity:
            return "id";
        case TestFunctionKind::Cubic:
            return "cubic";
        case TestFunctionKind::SmoothedStep:
            return "step";
        case TestFunctionKind::SharpStep:
            return "sharp";
    }
    return "?";
}

double default_entropy_step(const Nonlinearity& F) {
    const auto& t = F.thresholds();
    return (t.beta_plus - t.alpha_minus) / 4096.0;
}

EntropyPair::EntropyPair(TestFunction phi, const Nonlinearity& F, double h, double u_max)
    : EntropyPair(phi, F, h,
                  std::min(0.0, -0.05 * (F.thresholds().beta_plus - F.thresholds().alpha_minus)),
                  u_max) {}

EntropyPair::EntropyPair(TestFunction phi, const Nonlinearity& F, double h, double lo, double hi)
    : phi_(phi), F_(F), h_(h) {
    const auto& t = F.thresholds();
    if (!(h > 0.0) || h > (t.beta_plus - t.alpha_minus) / 256.0)
        throw std::invalid_argument("entropy quadrature step must satisfy 0 < h <= (beta+ - alpha-)/256");
    if (!(hi > lo)) throw std::invalid_argument("entropy table range is empty");
    if (phi_.kind == TestFunctionKind::SharpStep) return;

    const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / h));
    nodes_.reserve(n + 16);
    for (std::size_t k = 0; k <= n; ++k) nodes_.push_back(lo + (hi - lo) * static_cast<double>(k) / n);
    auto add = [&](double x) {
        if (x > lo && x < hi) nodes_.push_back(x);
    };
    add(0.0);
    for (double x : F.kinks()) add(x);
    for (double kappa : phi_.kinks())
        for (double x : F.preimages(kappa)) add(x);
    std::sort(nodes_.begin(), nodes_.end());
    nodes_.erase(std::unique(nodes_.begin(), nodes_.end()), nodes_.end());

    values_.resize(nodes_.size());
    for (std::size_t k = 0; k < nodes_.size(); ++k) values_[k] = integrand(nodes_[k]);

    integral_.assign(nodes_.size(), 0.0);
    // anchor the cumulative sum at u = 0 (a node when lo < 0 < hi)
    std::size_t start = 0;
    if (lo >= 0.0) {
        integral_[0] = psi_direct(0.0, lo);
    } else if (hi <= 0.0) {
        start = nodes_.size() - 1;
        integral_[start] = psi_direct(0.0, hi);
    } else {
        start = static_cast<std::size_t>(
            std::lower_bound(nodes_.begin(), nodes_.end(), 0.0) - nodes_.begin());
    }
    for (std::size_t k = start + 1; k < nodes_.size(); ++k)
        integral_[k] = integral_[k - 1] + 0.5 * (nodes_[k] - nodes_[k - 1]) * (values_[k] + values_[k - 1]);
    for (std::size_t k = start; k-- > 0;)
        integral_[k] = integral_[k + 1] - 0.5 * (nodes_[k + 1] - nodes_[k]) * (values_[k] + values_[k + 1]);
}

double EntropyPair::integrand(double u) const { return phi_(F_(u)); }

double EntropyPair::psi_direct(double a, double b) const {
    if (a == b) return 0.0;
    const auto n = static_cast<int>(std::max(1.0, std::ceil(std::abs(b - a) / h_)));
    const double step = (b - a) / n;
    double s = 0.5 * (integrand(a) + integrand(b));
    for (int k = 1; k < n; ++k) s += integrand(a + k * step);
    return s * step;
}

double EntropyPair::psi_sharp(double lambda) const {
    const auto& F = F_;
    const auto& t = F.thresholds();
    const double tau = phi_.tau0;
    // {u : F(u) >= tau} as a union of closed intervals
    struct Interval {
        double a, b;
    };
    std::vector<Interval> set;
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (tau <= t.f_minus) {
        set.push_back({F.inverse(1, tau), inf});
    } else if (tau <= t.f_plus) {
        set.push_back({F.inverse(1, tau), F.inverse(2, tau)});
        set.push_back({F.inverse(3, tau), inf});
    } else {
        set.push_back({F.inverse(3, tau), inf});
    }
    const double a = std::min(0.0, lambda);
    const double b = std::max(0.0, lambda);
    double len = 0.0;
    for (const auto& iv : set) len += std::max(0.0, std::min(b, iv.b) - std::max(a, iv.a));
    return lambda >= 0.0 ? len : -len;
}

double EntropyPair::psi(double lambda) const {
    if (phi_.kind == TestFunctionKind::SharpStep) return psi_sharp(lambda);
    if (lambda <= nodes_.front()) return integral_.front() + psi_direct(nodes_.front(), lambda);
    if (lambda >= nodes_.back()) return integral_.back() + psi_direct(nodes_.back(), lambda);
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), lambda);
    const auto k = static_cast<std::size_t>(it - nodes_.begin()) - 1;
    const double x0 = nodes_[k];
    const double x1 = nodes_[k + 1];
    const double d = lambda - x0;
    const double g = values_[k] + (values_[k + 1] - values_[k]) * (d / (x1 - x0));
    return integral_[k] + 0.5 * d * (values_[k] + g);
}

double total_energy(std::span<const double> u, std::span<const double> v, double dx,
                    const EntropyPair& pair) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) s += pair.psi(u[j]) + pair.Phi(v[j]);
    return s * dx;
}

double total_psi(std::span<const double> u, double dx, const EntropyPair& pair) {
    double s = 0.0;
    for (double x : u) s += pair.psi(x);
    return s * dx;
}

}  // namespace fastlimit
