#pragma once

// Test-only oracles, independent of the library code paths they check:
//  - central finite differences with Richardson extrapolation, for partial
//    derivatives of scalar fields (tensor-product stencils, orders 2..6)
//  - the weighted sum-of-squares statistic Q(theta) over an explicit
//    rational weight family, used as the differentiation target
//  - direct O(I^2)/O(I^3) assembly of the corrected E[Q^2] from the
//    closed-form partial derivatives
//  - two-sample Kolmogorov-Smirnov distance
//  - a small splitmix64-based generator so test data does not depend on the
//    library's RNG

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "qhet/qmoments.hpp"

namespace qhet::test {

// fields evaluate in extended precision: the stencils difference values that
// vanish to fourth order at the expansion point, so double rounding of the
// field would dominate the sixth-derivative estimates
using ScalarField = std::function<long double(std::span<const double>)>;

/// Partial derivative of f at x, with `vars` = (index, order) pairs (tensor
/// product of central stencils, each O(h^2)).
double fd_partial(const ScalarField& f, std::span<const double> x,
                  std::span<const std::pair<std::size_t, int>> vars, double h);

/// One Richardson step over fd_partial: (4 D(h/2) - D(h)) / 3, error O(h^4).
double fd_partial_richardson(const ScalarField& f, std::span<const double> x,
                             std::span<const std::pair<std::size_t, int>> vars, double h);

/// Inverse-quadratic weight functions f_i(t) = 1 / (a_i + b_i t^2), the
/// explicit family used to exercise the derivative formulas.
struct WeightFamily {
    std::vector<double> a;
    std::vector<double> b;

    std::size_t size() const { return a.size(); }
    double weight(std::size_t i, double t) const { return 1.0 / (a[i] + b[i] * t * t); }

    /// Q(theta) = sum_i f_i(theta_i) (theta_i - mu)^2 with mu the weighted mean.
    long double q_statistic(std::span<const double> theta) const;
    long double q_squared(std::span<const double> theta) const;

    /// Null inputs at common effect theta0 with the given moment profiles.
    std::vector<StudyNullInputs> null_inputs(double theta0,
                                             std::span<const MomentProfile> moments) const;
};

/// E[Q^2] assembled termwise from q2_partial_derivative with explicit loops
/// over ordered pairs and distinct triples.
double expected_q2_direct(std::span<const StudyNullInputs> inputs);

/// E[Q] assembled from numerical derivatives of Q(theta) for the given weight
/// family: (1/2) sum d2 m2 + (1/6) sum d3 m3 + (1/24) sum d4 m4
/// + (1/8) sum_{i!=j} d2d2 m2 m2.
double expected_q_fd(const WeightFamily& fam, double theta0,
                     std::span<const MomentProfile> moments, double h);

/// Two-sample Kolmogorov-Smirnov statistic (consumes and sorts its inputs).
double ks_two_sample(std::vector<double> a, std::vector<double> b);

/// Nearest multiple of h. High-order stencils need exactly representable
/// coordinates: with a power-of-two h and an expansion point on the h-grid,
/// every offset point is exact and no coordinate jitter divides by h^6.
double snap_to_grid(double x, double h);

/// splitmix64, for generating test configurations.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64();
    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);  // inclusive

private:
    std::uint64_t state_;
};

struct MeanVar {
    double mean = 0.0;
    double var = 0.0;  // sample variance
};
MeanVar mean_var(std::span<const double> xs);

}  // namespace qhet::test
