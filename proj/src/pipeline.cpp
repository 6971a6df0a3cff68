#include "qhet/pipeline.hpp"

#include <stdexcept>
#include <utility>

#include "qhet/errors.hpp"
#include "qhet/specfun.hpp"

namespace qhet {

CochranResult cochran_q(std::span<const EffectRecord> records) {
    if (records.size() < 2)
        throw std::invalid_argument("cochran_q: at least 2 studies required");
    long double w_sum = 0.0L, wg_sum = 0.0L;
    for (const auto& r : records) {
        w_sum += r.weight;
        wg_sum += static_cast<long double>(r.weight) * r.g;
    }
    const double g_w = static_cast<double>(wg_sum / w_sum);
    long double q = 0.0L;
    for (const auto& r : records) {
        const long double dev = r.g - g_w;
        q += r.weight * dev * dev;
    }
    return {static_cast<double>(q), g_w, static_cast<double>(w_sum)};
}

double combined_effect_unbiased(std::span<const EffectRecord> records) {
    if (records.empty())
        throw std::invalid_argument("combined_effect_unbiased: no studies");
    long double num = 0.0L, den = 0.0L;
    for (const auto& r : records) {
        const long double inv_a = 1.0L / r.a;
        num += inv_a * r.g;
        den += inv_a;
    }
    return static_cast<double>(num / den);
}

std::vector<StudyNullInputs> null_inputs_at(std::span<const EffectRecord> records, double g0) {
    std::vector<StudyNullInputs> inputs;
    inputs.reserve(records.size());
    for (const auto& r : records) {
        const auto wd = weight_derivatives(g0, r.a, r.b);
        StudyNullInputs in;
        in.weight = wd.w;
        in.dweight = wd.dw;
        in.d2weight = wd.d2w;
        in.moments = smd_central_moments(r.n_total(), r.control_fraction(), g0);
        inputs.push_back(in);
    }
    return inputs;
}

GammaParams gamma_fit(double m1, double m2) {
    if (!(m1 > 0.0))
        throw NumericError("gamma_fit: mean must be positive");
    const double var = m2 - m1 * m1;
    if (!(var > 0.0))
        throw NumericError("gamma_fit: second moment implies non-positive variance");
    return {m1 * m1 / var, var / m1};
}

QTestReport run_homogeneity_test(std::vector<EffectRecord> records, CombinedEffect estimator) {
    if (records.size() < 2)
        throw std::invalid_argument("run_homogeneity_test: at least 2 studies required");

    QTestReport rep;
    rep.study_count = records.size();
    rep.estimator = estimator;

    const auto cq = cochran_q(records);
    rep.q_stat = cq.q_stat;
    rep.big_w = cq.big_w;
    rep.g_combined = estimator == CombinedEffect::weighted ? cq.g_combined
                                                           : combined_effect_unbiased(records);
    rep.p_chisq_classic =
        specfun::chi_square_sf(rep.q_stat, static_cast<double>(records.size() - 1));

    bool small_n = false;
    for (const auto& r : records)
        if (r.n_total() <= 8) small_n = true;

    if (small_n) {
        rep.degraded_small_n = true;
    } else {
        const auto inputs = null_inputs_at(records, rep.g_combined);
        const double eq = expected_q(inputs);
        const double eq2 = expected_q2(inputs);
        rep.eq_corrected = eq;
        rep.eq2_corrected = eq2;
        if (eq > 0.0) rep.p_chisq_fdf = specfun::chi_square_sf(rep.q_stat, eq);
        try {
            const auto fit = gamma_fit(eq, eq2);
            rep.gamma_shape = fit.shape;
            rep.gamma_scale = fit.scale;
            rep.p_gamma = specfun::gamma_sf(rep.q_stat, fit.shape, fit.scale);
        } catch (const NumericError&) {
            rep.gamma_degenerate = true;
        }
        if (!rep.p_chisq_fdf.has_value()) rep.gamma_degenerate = true;
    }

    rep.per_study = std::move(records);
    return rep;
}

QTestReport run_homogeneity_test(std::span<const StudySummary> studies,
                                 CombinedEffect estimator) {
    std::vector<EffectRecord> records;
    records.reserve(studies.size());
    for (const auto& s : studies) records.push_back(effect_record(s));
    return run_homogeneity_test(std::move(records), estimator);
}

}  // namespace qhet
