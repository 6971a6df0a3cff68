#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qhet/probability.hpp"
#include "qhet/qmoments.hpp"
#include "qhet/smd.hpp"

namespace qhet {

/// Which combined-effect estimate anchors the null: the inverse-variance
/// weighted mean (w, the default) or the fixed-weight unbiased mean (A).
enum class CombinedEffect { weighted, unbiased };

struct CochranResult {
    double q_stat = 0.0;
    double g_combined = 0.0;
    double big_w = 0.0;  // total of the data weights
};

/// Q = sum w_i (g_i - g_w)^2 with g_w the weighted mean of the g_i.
CochranResult cochran_q(std::span<const EffectRecord> records);

/// Combined effect with fixed weights 1/A_i (unbiased, independent of the g_i).
double combined_effect_unbiased(std::span<const EffectRecord> records);

/// Per-study weights, weight derivatives and moment profiles with every
/// study's effect set to the common value g0. Throws NumericError if any
/// study has N <= 8 (moment profile does not exist).
std::vector<StudyNullInputs> null_inputs_at(std::span<const EffectRecord> records, double g0);

struct GammaParams {
    double shape = 0.0;
    double scale = 0.0;
};

/// Two-moment gamma fit: shape = m1^2/var, scale = var/m1 with var = m2 - m1^2.
/// Throws NumericError when the implied variance is not positive.
GammaParams gamma_fit(double m1, double m2);

struct QTestReport {
    std::size_t study_count = 0;
    CombinedEffect estimator = CombinedEffect::weighted;
    double q_stat = 0.0;
    double big_w = 0.0;
    double g_combined = 0.0;

    // corrected-null quantities; absent when degraded_small_n
    std::optional<double> eq_corrected;
    std::optional<double> eq2_corrected;
    std::optional<double> gamma_shape;  // absent when gamma_degenerate
    std::optional<double> gamma_scale;

    Probability p_chisq_classic{1.0};
    std::optional<Probability> p_chisq_fdf;
    std::optional<Probability> p_gamma;
    std::optional<Probability> p_bootstrap;

    bool degraded_small_n = false;   // some study has N <= 8: classic test only
    bool gamma_degenerate = false;   // corrected moments gave var <= 0

    std::vector<EffectRecord> per_study;
};

/// Full homogeneity test: Q and combined effect from the data weights, null
/// weights and moments recomputed at the combined effect, corrected E[Q] and
/// E[Q^2], gamma and fractional-df chi-square approximations, and the three
/// p-values. p_bootstrap is left empty (see simlab).
QTestReport run_homogeneity_test(std::span<const StudySummary> studies,
                                 CombinedEffect estimator = CombinedEffect::weighted);

QTestReport run_homogeneity_test(std::vector<EffectRecord> records,
                                 CombinedEffect estimator = CombinedEffect::weighted);

}  // namespace qhet
