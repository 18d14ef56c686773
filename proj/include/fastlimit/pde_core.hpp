#pragma once

#include <span>
#include <vector>

namespace fastlimit {

/// Uniform cell-centred grid on (0, L) with n_cells >= 4 cells.
struct Grid {
    int n_cells = 0;
    double length = 1.0;

    Grid() = default;
    Grid(int n, double L);

    double dx() const { return length / n_cells; }
    double x(int j) const { return (j + 0.5) * dx(); }

    bool operator==(const Grid&) const = default;
};

/// Values of a grid function, one per cell.
class Field {
public:
    Field() = default;
    explicit Field(const Grid& grid, double fill = 0.0);
    Field(const Grid& grid, std::vector<double> values);

    const Grid& grid() const { return grid_; }
    int size() const { return static_cast<int>(values_.size()); }

    double& operator[](int j) { return values_[j]; }
    double operator[](int j) const { return values_[j]; }

    std::span<double> values() { return values_; }
    std::span<const double> values() const { return values_; }

    /// sum_j f_j dx
    double integral() const;
    double mean() const;
    double max_abs() const;

    bool operator==(const Field&) const = default;

private:
    Grid grid_;
    std::vector<double> values_;
};

/// Tridiagonal system factorised once (Thomas forward sweep) for repeated
/// solves with different right-hand sides. No pivoting: the matrix must be
/// diagonally dominant.
class TridiagonalSolver {
public:
    TridiagonalSolver(std::vector<double> lower, std::vector<double> diag, std::vector<double> upper);

    int size() const { return static_cast<int>(inv_pivot_.size()); }
    void solve(std::span<const double> rhs, std::span<double> out) const;

private:
    std::vector<double> lower_;
    std::vector<double> upper_scaled_;  // c'_j
    std::vector<double> inv_pivot_;
};

/// (Delta f)_j with mirror ghost cells (zero flux) at both ends.
void laplacian_neumann(std::span<const double> f, double dx, std::span<double> out);
Field laplacian_neumann(const Field& f);

/// Eigenvalue -mu_k of the discrete Neumann Laplacian for the cosine mode
/// cos(k pi x_j / L): mu_k = (2/dx^2)(1 - cos(k pi dx / L)).
double neumann_mode_rate(const Grid& grid, int k);

/// Solver for (I - a Delta) w = rhs with a >= 0 on a fixed grid.
class ShiftedLaplacianSolver {
public:
    ShiftedLaplacianSolver(const Grid& grid, double a);

    const Grid& grid() const { return grid_; }
    double coefficient() const { return a_; }
    void solve(std::span<const double> rhs, std::span<double> out) const;
    Field solve(const Field& rhs) const;

private:
    Grid grid_;
    double a_;
    TridiagonalSolver solver_;
};

/// v with (I - eps Delta) v = f.
Field helmholtz_solve(const Field& f, double eps);

/// Crank-Nicolson step for v_t = Delta v + source with a cached factorisation.
class CrankNicolsonStepper {
public:
    CrankNicolsonStepper(const Grid& grid, double dt);

    double dt() const { return dt_; }
    /// In place; source may be empty (zero source).
    void step(std::span<double> v, std::span<const double> source = {}) const;

private:
    Grid grid_;
    double dt_;
    ShiftedLaplacianSolver implicit_;
    mutable std::vector<double> rhs_;
    mutable std::vector<double> increment_;
};

/// (I - dt/2 Delta) v_new = (I + dt/2 Delta) v + dt source.
Field crank_nicolson_step(const Field& v, double dt, const Field& source);

}  // namespace fastlimit
