#include "fastlimit/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fastlimit {

EntropyFamily EntropyFamily::registered(const Nonlinearity& F, double tau0, double h, double u_max) {
    const auto& t = F.thresholds();
    const double delta = (t.f_plus - t.f_minus) / 64.0;
    EntropyFamily fam;
    fam.pairs.emplace_back(TestFunction::identity(), F, h, u_max);
    fam.pairs.emplace_back(TestFunction::cubic(), F, h, u_max);
    fam.pairs.emplace_back(TestFunction::smoothed_step(tau0, delta), F, h, u_max);
    return fam;
}

double EntropyFamily::default_tau0(const Nonlinearity& F) {
    return 0.5 * (F.thresholds().f_minus + F.thresholds().f_plus);
}

InitialGenerator parse_generator(const std::string& name) {
    if (name == "constant") return InitialGenerator::Constant;
    if (name == "sine_mix") return InitialGenerator::SineMix;
    if (name == "phase_checkerboard") return InitialGenerator::PhaseCheckerboard;
    throw std::invalid_argument("unknown initial data generator '" + name + "'");
}

std::string generator_name(InitialGenerator g) {
    switch (g) {
        case InitialGenerator::Constant:
            return "constant";
        case InitialGenerator::SineMix:
            return "sine_mix";
        case InitialGenerator::PhaseCheckerboard:
            return "phase_checkerboard";
    }
    return "?";
}

namespace {

// uniform on [0,1) from the top 53 bits; independent of the standard
// library's distribution implementation
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> mollify3(const std::vector<double>& raw) {
    const std::size_t n = raw.size();
    std::vector<double> out(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double left = raw[j == 0 ? 0 : j - 1];
        const double right = raw[j + 1 == n ? n - 1 : j + 1];
        out[j] = (left + raw[j] + right) / 3.0;
    }
    return out;
}

}  // namespace

std::pair<Field, Field> initial_data(const InitialDataSpec& spec, const Grid& grid,
                                     const Nonlinearity& F) {
    const auto& t = F.thresholds();
    const int n = grid.n_cells;
    std::vector<double> u(n);
    std::mt19937_64 rng(spec.seed);

    switch (spec.generator) {
        case InitialGenerator::Constant: {
            const double c = spec.value.value_or(t.beta_plus);
            if (!(c >= 0.0)) throw std::invalid_argument("constant initial value must be nonnegative");
            std::fill(u.begin(), u.end(), c);
            break;
        }
        case InitialGenerator::SineMix: {
            if (spec.modes < 1) throw std::invalid_argument("sine_mix needs at least one mode");
            std::vector<double> coef(spec.modes);
            for (auto& c : coef) c = 2.0 * unit(rng) - 1.0;
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int k = 0; k < spec.modes; ++k)
                    s += coef[k] * std::cos((k + 1) * std::numbers::pi * grid.x(j) / grid.length);
                u[j] = s;
            }
            const auto [mn, mx] = std::minmax_element(u.begin(), u.end());
            const double lo = *mn;
            const double hi = *mx;
            const double w = t.beta_plus - t.alpha_minus;
            const double a = t.alpha_minus + 0.05 * w;
            const double b = t.beta_plus - 0.05 * w;
            for (auto& x : u) x = (hi > lo) ? a + (b - a) * (x - lo) / (hi - lo) : 0.5 * (a + b);
            break;
        }
        case InitialGenerator::PhaseCheckerboard: {
            const double r = spec.r.value_or(EntropyFamily::default_tau0(F));
            if (!(r > t.f_minus && r < t.f_plus))
                throw std::invalid_argument("checkerboard level r must lie in (f-, f+)");
            if (spec.period < 2) throw std::invalid_argument("checkerboard period must be >= 2");
            if (!(spec.theta >= 0.0 && spec.theta <= 1.0))
                throw std::invalid_argument("checkerboard fraction theta must lie in [0,1]");
            const double a = F.inverse(1, r);
            const double b = F.inverse(3, r);
            std::vector<double> raw(n);
            for (int start = 0; start < n; start += spec.period) {
                double theta = spec.theta;
                if (spec.jitter > 0.0) theta += spec.jitter * (2.0 * unit(rng) - 1.0);
                theta = std::clamp(theta, 0.0, 1.0);
                const int n1 = static_cast<int>(std::lround(theta * spec.period));
                for (int k = 0; k < spec.period && start + k < n; ++k) raw[start + k] = k < n1 ? a : b;
            }
            u = mollify3(raw);
            break;
        }
    }

    Field u0(grid, u);
    Field v0(grid);
    for (int j = 0; j < n; ++j) v0[j] = F(u0[j]);
    return {std::move(u0), std::move(v0)};
}

double gradient_energy(std::span<const double> v, double dx) {
    double s = 0.0;
    for (std::size_t j = 0; j + 1 < v.size(); ++j) {
        const double g = (v[j + 1] - v[j]) / dx;
        s += g * g;
    }
    return s * dx;
}

}  // namespace fastlimit
