#pragma once

#include <array>
#include <optional>
#include <string>

#include "qhet/qmoments.hpp"

namespace qhet {

/// Raw two-arm summary data for one study.
struct StudySummary {
    std::string id;
    int n_t = 0;
    double mean_t = 0.0;
    double sd_t = 0.0;
    int n_c = 0;
    double mean_c = 0.0;
    double sd_c = 0.0;

    int n_total() const { return n_t + n_c; }
    double control_fraction() const { return static_cast<double>(n_c) / n_total(); }
    void validate() const;  // arm sizes >= 2, positive SDs
};

/// Per-study derived quantities for the standardized mean difference:
/// bias-corrected estimate g, bias factor j, the variance model
/// Var[g] = a + b * delta^2, and the inverse-variance weight at g.
/// pooled_sd is absent for records built from a bare effect estimate.
struct EffectRecord {
    std::string id;
    int n_t = 0;
    int n_c = 0;
    double g = 0.0;
    double j = 0.0;
    double a = 0.0;
    double b = 0.0;
    double weight = 0.0;
    std::optional<double> pooled_sd;

    int n_total() const { return n_t + n_c; }
    double control_fraction() const { return static_cast<double>(n_c) / n_total(); }
};

/// Small-sample bias factor J = Gamma((N-2)/2) / (sqrt((N-2)/2) Gamma((N-3)/2)).
/// Requires N >= 5; J is in (0,1) and tends to 1 as N grows.
double bias_correction_j(int n_total);

EffectRecord effect_record(const StudySummary& study);

/// Record from a bare effect estimate (simulation path): the variance-model
/// constants depend only on the arm sizes.
EffectRecord effect_record_from_g(std::string id, int n_t, int n_c, double g);

struct WeightDerivatives {
    double w = 0.0;
    double dw = 0.0;
    double d2w = 0.0;
};

/// w = 1/(a + b g^2) and its first two derivatives in g.
WeightDerivatives weight_derivatives(double g, double a, double b);

/// Parameters of the scaled noncentral-t law followed by the SMD estimate:
/// sqrt(N q (1-q)) * g / J  ~  t_{N-2}(ncp).
struct NoncentralTParams {
    double df = 0.0;     // N - 2
    double ncp = 0.0;    // sqrt(N q (1-q)) * delta
    double scale = 0.0;  // J / sqrt(N q (1-q))

    static NoncentralTParams for_study(int n_total, double q, double delta);
};

/// E[t^r] about zero for t ~ noncentral t(df, ncp). Exists only for r < df.
double noncentral_t_raw_moment(double df, double ncp, int order);

/// Size-only constants of one study, precomputed so that weights and moment
/// profiles can be evaluated repeatedly at different null effects without
/// touching the gamma function again (the simulation loop's hot path).
class NullMomentModel {
public:
    NullMomentModel(int n_total, double q);

    double a() const { return a_; }
    double b() const { return b_; }
    double j() const { return j_; }

    WeightDerivatives weights_at(double g0) const { return weight_derivatives(g0, a_, b_); }
    MomentProfile moments_at(double g0) const;

private:
    double q_;
    double j_;
    double a_;
    double b_;
    double sqrt_nq1q_;               // sqrt(N q (1-q))
    double scale_;                   // j / sqrt_nq1q
    std::array<double, 7> t_ratio_;  // ((N-2)/2)^{r/2} G((N-2-r)/2)/G((N-2)/2)
};

/// Central moments m2..m6 of the SMD estimate about delta. Requires N > 8
/// (the sixth moment of t_{N-2} must exist) and 0 < q < 1.
MomentProfile smd_central_moments(int n_total, double q, double delta);

}  // namespace qhet
