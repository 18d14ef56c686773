#pragma once

#include <array>
#include <span>
#include <vector>

#include "fastlimit/nonlinearity.hpp"
#include "fastlimit/trajectory.hpp"

namespace fastlimit {

/// Uniform bins of width w starting at lo. If anchors were requested they lie
/// exactly on bin edges: anchor a_k is edge anchor_index[k].
class Binning {
public:
    Binning() = default;
    Binning(double lo, double hi, int n);

    double lo() const { return lo_; }
    double hi() const { return lo_ + n_ * width_; }
    int size() const { return n_; }
    double width() const { return width_; }
    double edge(int k) const;
    double center(int k) const { return edge(k) + 0.5 * width_; }
    /// Bin of x; values outside the range go to the first or last bin.
    int index(double x) const;

    /// True when x coincides with a bin edge (to 1e-9 bin widths).
    bool on_edge(double x) const;

    /// Bins of width (b - a)/k covering [lo, hi], with a and b on edges and
    /// about n_target bins across [lo, hi]. Requires lo <= a < b <= hi.
    static Binning aligned(double lo, double hi, double a, double b, int n_target);

    bool operator==(const Binning&) const = default;

private:
    double lo_ = 0.0;
    double width_ = 1.0;
    int n_ = 0;
    // anchored binnings index from a so that x < a and x >= a never share a bin
    double anchor_ = 0.0;
    int anchor_index_ = 0;
};

/// u-axis binning over [0, u_max] with alpha+ and beta- on edges.
Binning u_axis_binning(const Nonlinearity& F, double u_max, int n_target);
/// Value-axis binning over [0, v_max] with f- and f+ on edges.
Binning value_axis_binning(const Nonlinearity& F, double v_max, int n_target);

/// Binned measure; mass[k] is the mass in bin k.
struct EmpiricalMeasure {
    Binning bins;
    std::vector<double> mass;
    double total_mass = 0.0;

    /// sum_k center_k mass_k / total_mass
    double mean() const;
    double variance() const;
};

/// Pointwise samples of one space-time cell.
struct CellSamples {
    std::vector<double> u;
    std::vector<double> v;
};

/// Space-time cell: snapshots with t0 < t <= t1 and cells with x0 <= x_j < x1.
/// The initial snapshot belongs to a window only if t0 < 0.
struct CellSpec {
    double t0 = 0.0;
    double t1 = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;
    int t_index = 0;
    int x_index = 0;
};

/// nt x nx cells covering (0, t_end] x [0, L), time-major.
std::vector<CellSpec> partition_cells(double t_end, double length, int nt, int nx);

/// Throws MeasureError when the cell holds fewer than min_samples samples.
CellSamples collect_cell_samples(const Trajectory& traj, const CellSpec& cell,
                                 std::size_t min_samples = 256);

/// Normalised histogram; throws MeasureError on an empty sample list.
EmpiricalMeasure empirical_measure(std::span<const double> samples, const Binning& bins);

/// mu 1_{I_branch}, bin-wise by bin centre. Throws MeasureError unless
/// alpha+ and beta- are bin edges.
EmpiricalMeasure restrict(const EmpiricalMeasure& mu, int branch, const Nonlinearity& F);

/// Histogram of F(u) over the samples.
EmpiricalMeasure pushforward(std::span<const double> u, const Nonlinearity& F, const Binning& bins);

/// Histogram of F(u) over the samples with u in I_branch, normalised by the
/// full sample count.
EmpiricalMeasure pushforward_restricted(std::span<const double> u, int branch,
                                        const Nonlinearity& F, const Binning& bins);

/// Per value-axis bin: fractions of the samples with F(u) in the bin that
/// come from I1, I2, I3. Unoccupied bins are masked and hold zeros.
struct DensityTriple {
    Binning bins;
    std::vector<std::array<double, 3>> g;
    std::vector<bool> occupied;
    std::vector<std::size_t> count;
};

DensityTriple radon_nikodym_densities(std::span<const double> u, const Nonlinearity& F,
                                      const Binning& bins);

/// Fractions of samples in I1, I2, I3; lambda3 = 1 - (lambda1 + lambda2).
std::array<double, 3> phase_weights(std::span<const double> u, const Nonlinearity& F);

/// 1 - variance / (R^2 / 4), R the distance between the outermost bin
/// centres, clipped to [0, 1].
double dirac_score(const EmpiricalMeasure& mu);

struct PhaseDecomposition {
    std::array<double, 3> lambda{};
    double v_bar = 0.0;
    std::array<double, 3> atoms{};
    double fit_residual = 0.0;
    double dirac_score_v = 0.0;
    /// v is not near-Dirac (score below the threshold): atoms are not meaningful.
    bool flagged = false;
};

/// Three-atom fit mu ~ sum lambda_i delta_{S_i(v_bar)}. fit_residual is the
/// fraction of u-samples farther than delta from every atom.
PhaseDecomposition decompose(const CellSamples& samples, const Nonlinearity& F, double delta,
                             const Binning& value_bins, double dirac_threshold = 0.99);

/// Sample mean and (population) variance, two-pass.
std::pair<double, double> sample_mean_variance(std::span<const double> x);

}  // namespace fastlimit
