#include "fastlimit/pde_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fastlimit {

Grid::Grid(int n, double L) : n_cells(n), length(L) {
    if (n < 4) throw std::invalid_argument("grid needs at least 4 cells");
    if (!(L > 0.0) || !std::isfinite(L)) throw std::invalid_argument("grid length must be positive");
}

Field::Field(const Grid& grid, double fill) : grid_(grid), values_(grid.n_cells, fill) {}

Field::Field(const Grid& grid, std::vector<double> values) : grid_(grid), values_(std::move(values)) {
    if (static_cast<int>(values_.size()) != grid_.n_cells)
        throw std::invalid_argument("field length does not match grid");
}

double Field::integral() const {
    double s = 0.0;
    for (double f : values_) s += f;
    return s * grid_.dx();
}

double Field::mean() const {
    double s = 0.0;
    for (double f : values_) s += f;
    return s / static_cast<double>(values_.size());
}

double Field::max_abs() const {
    double m = 0.0;
    for (double f : values_) m = std::max(m, std::abs(f));
    return m;
}

TridiagonalSolver::TridiagonalSolver(std::vector<double> lower, std::vector<double> diag,
                                     std::vector<double> upper)
    : lower_(std::move(lower)), upper_scaled_(diag.size()), inv_pivot_(diag.size()) {
    const std::size_t n = diag.size();
    if (n == 0 || lower_.size() != n || upper.size() != n)
        throw std::invalid_argument("tridiagonal bands must have equal nonzero length");
    double pivot = diag[0];
    inv_pivot_[0] = 1.0 / pivot;
    upper_scaled_[0] = upper[0] * inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) {
        pivot = diag[i] - lower_[i] * upper_scaled_[i - 1];
        if (pivot == 0.0) throw std::invalid_argument("singular tridiagonal system");
        inv_pivot_[i] = 1.0 / pivot;
        upper_scaled_[i] = upper[i] * inv_pivot_[i];
    }
}

void TridiagonalSolver::solve(std::span<const double> rhs, std::span<double> out) const {
    const std::size_t n = inv_pivot_.size();
    out[0] = rhs[0] * inv_pivot_[0];
    for (std::size_t i = 1; i < n; ++i) out[i] = (rhs[i] - lower_[i] * out[i - 1]) * inv_pivot_[i];
    for (std::size_t i = n - 1; i-- > 0;) out[i] -= upper_scaled_[i] * out[i + 1];
}

void laplacian_neumann(std::span<const double> f, double dx, std::span<double> out) {
    const std::size_t n = f.size();
    const double inv = 1.0 / (dx * dx);
    out[0] = (f[1] - f[0]) * inv;
    for (std::size_t j = 1; j + 1 < n; ++j) out[j] = ((f[j - 1] - f[j]) + (f[j + 1] - f[j])) * inv;
    out[n - 1] = (f[n - 2] - f[n - 1]) * inv;
}

Field laplacian_neumann(const Field& f) {
    Field out(f.grid());
    laplacian_neumann(f.values(), f.grid().dx(), out.values());
    return out;
}

double neumann_mode_rate(const Grid& grid, int k) {
    const double dx = grid.dx();
    return 2.0 / (dx * dx) * (1.0 - std::cos(k * std::numbers::pi * dx / grid.length));
}

namespace {

TridiagonalSolver shifted_laplacian(const Grid& grid, double a) {
    const int n = grid.n_cells;
    const double r = a / (grid.dx() * grid.dx());
    std::vector<double> lower(n, -r), diag(n, 1.0 + 2.0 * r), upper(n, -r);
    lower[0] = 0.0;
    upper[n - 1] = 0.0;
    diag[0] = 1.0 + r;
    diag[n - 1] = 1.0 + r;
    return TridiagonalSolver(std::move(lower), std::move(diag), std::move(upper));
}

}  // namespace

ShiftedLaplacianSolver::ShiftedLaplacianSolver(const Grid& grid, double a)
    : grid_(grid), a_(a), solver_(shifted_laplacian(grid, a)) {
    if (!(a >= 0.0)) throw std::invalid_argument("shift coefficient must be nonnegative");
}

void ShiftedLaplacianSolver::solve(std::span<const double> rhs, std::span<double> out) const {
    solver_.solve(rhs, out);
}

Field ShiftedLaplacianSolver::solve(const Field& rhs) const {
    Field out(grid_);
    solver_.solve(rhs.values(), out.values());
    return out;
}

Field helmholtz_solve(const Field& f, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("helmholtz_solve needs eps > 0");
    return ShiftedLaplacianSolver(f.grid(), eps).solve(f);
}

CrankNicolsonStepper::CrankNicolsonStepper(const Grid& grid, double dt)
    : grid_(grid), dt_(dt), implicit_(grid, 0.5 * dt), rhs_(grid.n_cells),
      increment_(grid.n_cells) {
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
}

void CrankNicolsonStepper::step(std::span<double> v, std::span<const double> source) const {
    // solve for the increment w = v_new - v: (I - dt/2 Delta) w = dt (Delta v + source);
    // rounding then scales with |w| rather than |v|, which keeps the mean drift tiny
    laplacian_neumann(v, grid_.dx(), rhs_);
    for (std::size_t j = 0; j < rhs_.size(); ++j) {
        if (!source.empty()) rhs_[j] += source[j];
        rhs_[j] *= dt_;
    }
    implicit_.solve(rhs_, increment_);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += increment_[j];
}

Field crank_nicolson_step(const Field& v, double dt, const Field& source) {
    Field out = v;
    CrankNicolsonStepper(v.grid(), dt).step(out.values(), source.values());
    return out;
}

}  // namespace fastlimit
