#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qhet {

/// Central moments E[Theta^r], r = 2..6, of an effect estimator about its
/// mean under the null. Validity: positive even moments and Cauchy-Schwarz.
struct MomentProfile {
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    double m5 = 0.0;
    double m6 = 0.0;

    double kurtosis() const { return m4 / (m2 * m2) - 3.0; }
    void validate() const;  // throws std::domain_error on violation
};

/// Null-hypothesis inputs for one study: the weight function and its first
/// two derivatives evaluated at the common effect, plus the moment profile
/// of the study's effect estimator.
struct StudyNullInputs {
    double weight = 0.0;    // w_i > 0
    double dweight = 0.0;   // d f_i / d theta_i at the null
    double d2weight = 0.0;  // d^2 f_i / d theta_i^2 at the null
    MomentProfile moments;
};

/// W = sum of weights and U_i = 1 - w_i / W. sum(U_i) == I - 1 by construction.
struct AggregateWeights {
    double total = 0.0;
    std::vector<double> u;

    static AggregateWeights from(std::span<const StudyNullInputs> inputs);
};

/// The eight summands of the corrected E[Q], kept separate so each can be
/// pinned individually (the expressions are long; transcription slips are the
/// failure mode worth testing for).
struct ExpectedQTerms {
    double quadratic = 0.0;      // sum w U m2          -- the chi-square term
    double third_moment = 0.0;   // sum U^2 f' m3
    double fourth_moment = 0.0;  // sum (-U^2 f'^2 / W + U^2 f'' / 2) m4
    double cross_u_df = 0.0;     // -(sum U f' m2)^2 / W
    double cross_w_df = 0.0;     // -(sum w f' m2)^2 / W^3
    double cross_mixed = 0.0;    // -(sum w m2)(sum (f'^2 - f''/(2W)) m2) / W^3
    double square_df = 0.0;      // sum (1 - 2w/W + 3w^2/W^2) f'^2 m2^2 / W
    double square_d2f = 0.0;     // -sum w^2 f'' m2^2 / (2 W^3)

    double total() const;
};

ExpectedQTerms expected_q_terms(std::span<const StudyNullInputs> inputs);

/// Corrected first moment of Q under the null, accurate to O(1/n).
double expected_q(std::span<const StudyNullInputs> inputs);

/// The seven groups of the corrected E[Q^2]: pure and cross terms of 4th,
/// 5th and 6th degree. Cross sums run over ordered pairs (triples) of
/// distinct indices and are evaluated in O(I) via complete-sum expansions.
struct ExpectedQ2Terms {
    double quartic_pure = 0.0;   // (1/24)  sum_i     d4/di^4        m4_i
    double quartic_cross = 0.0;  // (1/8)   sum_{i!=j} d4/di^2 dj^2  m2_i m2_j
    double quintic_pure = 0.0;   // (1/120) sum_i     d5/di^5        m5_i
    double quintic_cross = 0.0;  // (1/12)  sum_{i!=j} d5/di^3 dj^2  m3_i m2_j
    double sextic_pure = 0.0;    // (1/720) sum_i     d6/di^6        m6_i
    double sextic_cross = 0.0;   // (1/48)  sum_{i!=j} d6/di^4 dj^2  m4_i m2_j
    double sextic_triple = 0.0;  // (1/48)  sum_{i!=j!=k} d6/di^2 dj^2 dk^2 m2 m2 m2

    double total() const;
};

ExpectedQ2Terms expected_q2_terms(std::span<const StudyNullInputs> inputs);

/// Corrected second moment of Q under the null, accurate to O(1/n).
double expected_q2(std::span<const StudyNullInputs> inputs);

/// Closed-form partial derivatives of Q^2 with respect to the study effects,
/// evaluated at the null. Exposed so they can be checked against numerical
/// differentiation of Q^2 independently of the assembled expected_q2.
enum class Q2Derivative {
    d4_iiii,    // d^4 Q^2 / d theta_i^4                     (1 index)
    d4_iijj,    // d^4 Q^2 / d theta_i^2 d theta_j^2         (2 indices)
    d5_iiiii,   // d^5 Q^2 / d theta_i^5                     (1 index)
    d5_iiijj,   // d^5 Q^2 / d theta_i^3 d theta_j^2         (2 indices)
    d6_iiiiii,  // d^6 Q^2 / d theta_i^6                     (1 index)
    d6_iiiijj,  // d^6 Q^2 / d theta_i^4 d theta_j^2         (2 indices)
    d6_iijjkk,  // d^6 Q^2 / d theta_i^2 d theta_j^2 d theta_k^2 (3 indices)
};

double q2_partial_derivative(Q2Derivative kind, std::span<const std::size_t> indices,
                             std::span<const StudyNullInputs> inputs);

}  // namespace qhet
