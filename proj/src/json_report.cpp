#include "qhet/json_report.hpp"

#include "qhet/version.hpp"

namespace qhet {

namespace {

nlohmann::json tool_block() {
    return {{"name", kToolName}, {"version", kToolVersion}};
}

nlohmann::json opt(const std::optional<double>& v) {
    if (v.has_value()) return *v;
    return nullptr;
}

nlohmann::json opt(const std::optional<Probability>& v) {
    if (v.has_value()) return v->value();
    return nullptr;
}

}  // namespace

nlohmann::json report_to_json(const QTestReport& report, const std::string& input_path,
                              const std::optional<BootstrapInfo>& bootstrap) {
    nlohmann::json per_study = nlohmann::json::array();
    for (const auto& r : report.per_study) {
        per_study.push_back({
            {"id", r.id},
            {"n_t", r.n_t},
            {"n_c", r.n_c},
            {"g", r.g},
            {"j", r.j},
            {"a", r.a},
            {"b", r.b},
            {"weight", r.weight},
            {"pooled_sd", opt(r.pooled_sd)},
        });
    }

    nlohmann::json j{
        {"schema_version", kReportSchemaVersion},
        {"tool", tool_block()},
        {"kind", "homogeneity_test"},
        {"input", {{"path", input_path}, {"study_count", report.study_count}}},
        {"estimator", report.estimator == CombinedEffect::weighted ? "w" : "A"},
        {"q_stat", report.q_stat},
        {"weight_total", report.big_w},
        {"combined_effect", report.g_combined},
        {"corrected",
         {{"eq", opt(report.eq_corrected)},
          {"eq2", opt(report.eq2_corrected)},
          {"gamma_shape", opt(report.gamma_shape)},
          {"gamma_scale", opt(report.gamma_scale)}}},
        {"p_values",
         {{"chisq_classic", report.p_chisq_classic.value()},
          {"chisq_fdf", opt(report.p_chisq_fdf)},
          {"gamma", opt(report.p_gamma)},
          {"bootstrap", opt(report.p_bootstrap)}}},
        {"flags",
         {{"degraded_small_n", report.degraded_small_n},
          {"gamma_degenerate", report.gamma_degenerate}}},
        {"per_study", per_study},
    };
    if (bootstrap.has_value())
        j["bootstrap"] = {{"reps", bootstrap->reps}, {"seed", bootstrap->seed}};
    else
        j["bootstrap"] = nullptr;
    return j;
}

nlohmann::json sim_result_to_json(const SimConfig& config, const SimResult& result) {
    nlohmann::json sizes = nlohmann::json::array();
    for (const auto& [nt, nc] : config.study_sizes) sizes.push_back({nt, nc});

    nlohmann::json levels = nlohmann::json::array();
    for (const auto& lv : result.achieved_levels)
        levels.push_back({{"method", to_string(lv.method)},
                          {"alpha", lv.alpha},
                          {"rate", lv.rate},
                          {"mc_se", lv.mc_se}});

    return nlohmann::json{
        {"schema_version", kReportSchemaVersion},
        {"tool", tool_block()},
        {"kind", "simulation"},
        {"config",
         {{"study_sizes", sizes},
          {"delta", config.delta},
          {"tau2", config.tau2},
          {"reps", config.reps},
          {"seed", config.seed},
          {"alpha_levels", config.alpha_levels},
          {"estimator", config.estimator == CombinedEffect::weighted ? "w" : "A"},
          {"delta_known", config.delta_known}}},
        {"achieved_levels", levels},
        {"moments",
         {{"q_mean", result.q_mean},
          {"q2_mean", result.q2_mean},
          {"q_var", result.q_var},
          {"formula_eq", result.formula_eq},
          {"formula_eq2", result.formula_eq2}}},
        {"degenerate_reps", result.degenerate_reps},
    };
}

}  // namespace qhet
