#pragma once

#include <array>
#include <optional>
#include <vector>

namespace fastlimit {

enum class NonlinearityKind { PiecewiseAffine, SmoothCubic };

/// Which of the two singular limits an identity or condition refers to.
/// FastReaction weights the branch slopes as S_i' + 1, ForwardBackward as S_i'.
enum class Variant { FastReaction, ForwardBackward };

struct Breakpoint {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Breakpoint&) const = default;
};

/// Plain description of F, as read from a run config.
///
/// PiecewiseAffine: segment j starts at breakpoints[j] with slope slopes[j] and
/// runs to the next breakpoint; the last segment runs to +inf and the first
/// one is also extended to -inf. SmoothCubic: F(u) = c3 u^3 + c2 u^2 + c1 u.
struct NonlinearitySpec {
    NonlinearityKind kind = NonlinearityKind::PiecewiseAffine;
    std::vector<Breakpoint> breakpoints;
    std::vector<double> slopes;
    std::array<double, 3> cubic{0.0, 0.0, 0.0};  // c3, c2, c1

    bool operator==(const NonlinearitySpec&) const = default;
};

/// Continuous affine example: 2u on [0,1], 4-2u on [1,5/4], 4u-7/2 beyond.
NonlinearitySpec canonical_affine_spec();
/// F(u) = u^3 - 3u^2 + 2.5u.
NonlinearitySpec canonical_cubic_spec();

/// Branch thresholds. F(alpha_plus) = F(beta_plus) = f_plus and
/// F(alpha_minus) = F(beta_minus) = f_minus.
struct Thresholds {
    double alpha_minus = 0.0;
    double alpha_plus = 0.0;
    double beta_minus = 0.0;
    double beta_plus = 0.0;
    double f_minus = 0.0;
    double f_plus = 0.0;
};

/// A validated nonmonotone F with its three monotone inverse branches.
///
/// Intervals: I1 = (-inf, alpha+], I2 = (alpha+, beta-), I3 = [beta-, inf);
/// J1 = (-inf, f+], J2 = (f-, f+), J3 = [f-, inf). The inverses S_i are
/// extended by constants outside J_i, so S1 <= S2 <= S3 everywhere.
/// Immutable after construction.
class Nonlinearity {
public:
    /// Validates the shape and computes thresholds; throws ShapeError.
    explicit Nonlinearity(NonlinearitySpec spec);

    static Nonlinearity canonical_affine() { return Nonlinearity(canonical_affine_spec()); }
    static Nonlinearity canonical_cubic() { return Nonlinearity(canonical_cubic_spec()); }

    const NonlinearitySpec& spec() const { return spec_; }
    NonlinearityKind kind() const { return spec_.kind; }
    const Thresholds& thresholds() const { return thr_; }

    double operator()(double u) const;
    double derivative(double u) const;

    /// Inverse branch S_i(lambda), i in {1,2,3}.
    double inverse(int branch, double lambda) const;
    /// S_i'(lambda); 0 where S_i is constant-extended, one-sided from inside
    /// J_i at f- and f+ (infinite for a smooth fold).
    double inverse_slope(int branch, double lambda) const;
    /// S_i'(lambda) + 1 (FastReaction) or S_i'(lambda) (ForwardBackward).
    double slope_weight(int branch, double lambda, Variant variant) const;

    /// 1, 2 or 3 according to u in I1, I2, I3.
    int branch_of(double u) const;

    /// max |slope| for affine F; max |F'| on [0, beta+] for the cubic.
    double lipschitz_bound() const { return lipschitz_; }
    /// max |F'| on [a, b].
    double lipschitz_on(double a, double b) const;

    /// Points on the u-axis where F is not smooth (affine breakpoints).
    std::vector<double> kinks() const;
    /// Values in (f-, f+) where some S_i' jumps (images of affine breakpoints).
    std::vector<double> slope_breaks() const;
    /// All u with F(u) = lambda (one to three points, ascending).
    std::vector<double> preimages(double lambda) const;

private:
    double solve_monotone(double lambda, double lo, double hi, bool increasing) const;
    int affine_segment(double u) const;
    int affine_branch_segment(int branch, double lambda) const;

    NonlinearitySpec spec_;
    Thresholds thr_;
    double lipschitz_ = 0.0;
    int first_decreasing_ = -1;  // affine: index of first segment of I2
    int first_rising_ = -1;      // affine: index of first segment of I3
};

/// Thresholds of a spec (throws ShapeError on a monotone or discontinuous F).
Thresholds analyze(const NonlinearitySpec& spec);

struct TheoremDVerdict {
    bool holds = false;
    std::optional<double> witness_tau0;
};

/// S2' + 1 > 0 on (f-, f+) and S1'(tau0) != S3'(tau0) for some tau0 there.
TheoremDVerdict check_theorem_D(const Nonlinearity& F);

/// Nondegeneracy: on every interval R of (f-, f+), sum a_i w_i == 0 on R
/// forces a1 + a2 + a3 = 0, with w_i = S_i' + 1 or S_i'.
bool check_nondegeneracy(const Nonlinearity& F, Variant variant);

/// The constant-slope case: every a with a.w = 0 has sum zero iff w is a
/// nonzero multiple of (1,1,1).
bool nondegenerate_constant_triple(const std::array<double, 3>& w);

/// Sampled case: rows are (w1,w2,w3)(r_k). The null space of the sample matrix
/// (singular values below rank_tol * sigma_max) must lie in {sum a_i = 0}.
bool nondegenerate_sampled(const std::vector<std::array<double, 3>>& rows,
                           double rank_tol = 1e-9);

}  // namespace fastlimit
