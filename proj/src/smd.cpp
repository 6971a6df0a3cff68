#include "qhet/smd.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

#include "qhet/errors.hpp"
#include "qhet/specfun.hpp"

namespace qhet {

namespace {

// C(n, k) for n <= 6
constexpr int kChoose[7][7] = {
    {1, 0, 0, 0, 0, 0, 0},     {1, 1, 0, 0, 0, 0, 0},    {1, 2, 1, 0, 0, 0, 0},
    {1, 3, 3, 1, 0, 0, 0},     {1, 4, 6, 4, 1, 0, 0},    {1, 5, 10, 10, 5, 1, 0},
    {1, 6, 15, 20, 15, 6, 1},
};

// (2j)! / (2^j j!) = 1, 1, 3, 15 for j = 0..3
constexpr double kDoubleFactor[4] = {1.0, 1.0, 3.0, 15.0};

// sum_{j=0}^{floor(r/2)} C(r,2j) (2j)!/(2^j j!) gamma^{r-2j}
double hermite_like_sum(int r, double gamma) {
    double s = 0.0;
    for (int j = 0; 2 * j <= r; ++j)
        s += kChoose[r][2 * j] * kDoubleFactor[j] * std::pow(gamma, r - 2 * j);
    return s;
}

}  // namespace

void StudySummary::validate() const {
    if (n_t < 2 || n_c < 2)
        throw DataError("study '" + id + "': both arm sizes must be >= 2");
    if (!(sd_t > 0.0) || !(sd_c > 0.0))
        throw DataError("study '" + id + "': arm SDs must be positive");
}

double bias_correction_j(int n_total) {
    if (n_total < 5)
        throw std::domain_error("bias_correction_j: total sample size must be >= 5");
    const double n = n_total;
    return std::exp(specfun::ln_gamma((n - 2.0) / 2.0) - specfun::ln_gamma((n - 3.0) / 2.0)) /
           std::sqrt((n - 2.0) / 2.0);
}

namespace {

// A and B of the variance model Var[g] = A + B delta^2.
std::pair<double, double> variance_model(int n_total, double q, double j) {
    if (n_total <= 4)
        throw std::domain_error("variance model undefined for N <= 4");
    const double n = n_total;
    const double a = (n - 2.0) * j * j / ((n - 4.0) * n * q * (1.0 - q));
    const double b = (n - 2.0) * j * j / (n - 4.0) - 1.0;
    return {a, b};
}

}  // namespace

EffectRecord effect_record(const StudySummary& study) {
    study.validate();
    const int n = study.n_total();
    const double sp2 = ((study.n_t - 1) * study.sd_t * study.sd_t +
                        (study.n_c - 1) * study.sd_c * study.sd_c) /
                       (n - 2);
    if (!(sp2 > 0.0))
        throw DataError("study '" + study.id + "': pooled SD is zero");
    const double sp = std::sqrt(sp2);

    EffectRecord rec;
    rec.id = study.id;
    rec.n_t = study.n_t;
    rec.n_c = study.n_c;
    rec.j = bias_correction_j(n);
    rec.g = rec.j * (study.mean_t - study.mean_c) / sp;
    const auto [a, b] = variance_model(n, study.control_fraction(), rec.j);
    rec.a = a;
    rec.b = b;
    rec.weight = 1.0 / (a + b * rec.g * rec.g);
    rec.pooled_sd = sp;
    return rec;
}

EffectRecord effect_record_from_g(std::string id, int n_t, int n_c, double g) {
    if (n_t < 2 || n_c < 2)
        throw DataError("study '" + id + "': both arm sizes must be >= 2");
    EffectRecord rec;
    rec.id = std::move(id);
    rec.n_t = n_t;
    rec.n_c = n_c;
    rec.j = bias_correction_j(n_t + n_c);
    rec.g = g;
    const auto [a, b] = variance_model(n_t + n_c, rec.control_fraction(), rec.j);
    rec.a = a;
    rec.b = b;
    rec.weight = 1.0 / (a + b * g * g);
    return rec;
}

WeightDerivatives weight_derivatives(double g, double a, double b) {
    if (!(a > 0.0)) throw std::domain_error("weight_derivatives: a must be > 0");
    WeightDerivatives wd;
    wd.w = 1.0 / (a + b * g * g);
    wd.dw = -2.0 * b * g * wd.w * wd.w;
    wd.d2w = -2.0 * b * wd.w * wd.w + 8.0 * b * b * g * g * wd.w * wd.w * wd.w;
    return wd;
}

NoncentralTParams NoncentralTParams::for_study(int n_total, double q, double delta) {
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("NoncentralTParams: q must be in (0,1)");
    NoncentralTParams p;
    p.df = n_total - 2.0;
    const double root = std::sqrt(n_total * q * (1.0 - q));
    p.ncp = root * delta;
    p.scale = bias_correction_j(n_total) / root;
    return p;
}

double noncentral_t_raw_moment(double df, double ncp, int order) {
    if (order < 1 || order > 6)
        throw std::domain_error("noncentral_t_raw_moment: order must be in 1..6");
    if (!(order < df))
        throw std::domain_error("noncentral_t_raw_moment: moment exists only for order < df");
    const double ratio =
        std::exp(specfun::ln_gamma((df - order) / 2.0) - specfun::ln_gamma(df / 2.0));
    return std::pow(df / 2.0, order / 2.0) * ratio * hermite_like_sum(order, ncp);
}

NullMomentModel::NullMomentModel(int n_total, double q) : q_(q) {
    if (n_total <= 8)
        throw NumericError("moment profile requires N > 8 (sixth moment of t must exist)");
    if (!(q > 0.0 && q < 1.0))
        throw std::domain_error("NullMomentModel: q must be in (0,1)");
    j_ = bias_correction_j(n_total);
    const auto [a, b] = variance_model(n_total, q, j_);
    a_ = a;
    b_ = b;
    sqrt_nq1q_ = std::sqrt(n_total * q * (1.0 - q));
    scale_ = j_ / sqrt_nq1q_;
    const double df = n_total - 2.0;
    const double lg_half_df = specfun::ln_gamma(df / 2.0);
    t_ratio_[0] = 1.0;
    for (int r = 1; r <= 6; ++r)
        t_ratio_[r] = std::pow(df / 2.0, r / 2.0) *
                      std::exp(specfun::ln_gamma((df - r) / 2.0) - lg_half_df);
}

MomentProfile NullMomentModel::moments_at(double g0) const {
    const double gamma = sqrt_nq1q_ * g0;

    // raw moments of t_{N-2}(gamma) about zero, r = 0..6
    double raw[7];
    raw[0] = 1.0;
    for (int r = 1; r <= 6; ++r) raw[r] = t_ratio_[r] * hermite_like_sum(r, gamma);
    const double mu_t = raw[1];

    // central moments by binomial expansion about mu_t; alternating signs, so
    // accumulate in extended precision
    double central[7];
    double mu_pow[7];
    mu_pow[0] = 1.0;
    for (int k = 1; k <= 6; ++k) mu_pow[k] = mu_pow[k - 1] * mu_t;
    for (int r = 2; r <= 6; ++r) {
        long double s = 0.0L;
        for (int k = 0; k <= r; ++k) {
            const long double term =
                static_cast<long double>(kChoose[r][k]) * mu_pow[k] * raw[r - k];
            s += (k % 2 == 0) ? term : -term;
        }
        central[r] = static_cast<double>(s);
    }

    MomentProfile m;
    const double s2 = scale_ * scale_, s3 = s2 * scale_;
    m.m2 = s2 * central[2];
    m.m3 = s3 * central[3];
    m.m4 = s2 * s2 * central[4];
    m.m5 = s2 * s3 * central[5];
    m.m6 = s3 * s3 * central[6];
    m.validate();
    return m;
}

MomentProfile smd_central_moments(int n_total, double q, double delta) {
    return NullMomentModel(n_total, q).moments_at(delta);
}

}  // namespace qhet
