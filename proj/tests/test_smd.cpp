#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qhet/csv.hpp"
#include "qhet/errors.hpp"
#include "qhet/rng.hpp"
#include "qhet/simlab.hpp"
#include "qhet/smd.hpp"

using namespace qhet;
using qhet::test::TestRng;

namespace {
const std::string kLightCsv = std::string(QHET_DATA_DIR) + "/light_therapy.csv";
}

TEST_CASE("bias_correction_j: values and limits") {
    // independent route: gamma-ratio via std::lgamma
    auto ref = [](int n) {
        return std::exp(std::lgamma((n - 2.0) / 2.0) - std::lgamma((n - 3.0) / 2.0)) /
               std::sqrt((n - 2.0) / 2.0);
    };
    // the two lgamma evaluations carry ~|ln Gamma| * eps of absolute error
    // each, which the exponential turns into relative error of the ratio
    for (int n : {5, 8, 12, 28, 50, 200, 1000})
        CHECK(bias_correction_j(n) == doctest::Approx(ref(n)).epsilon(5e-12));

    CHECK(std::fabs(bias_correction_j(28) - 0.97074) < 1e-4);
    // the classic 1 - 3/(4(N-2)-1) approximation is close but not equal
    CHECK(std::fabs(bias_correction_j(28) - (1.0 - 3.0 / (4.0 * 26.0 - 1.0))) < 1e-3);
    CHECK(std::fabs(bias_correction_j(1000000) - 1.0) < 1e-5);
    for (int n : {5, 30, 400}) {
        CHECK(bias_correction_j(n) > 0.0);
        CHECK(bias_correction_j(n) < 1.0);
    }
    CHECK_THROWS_AS(bias_correction_j(4), std::domain_error);
}

TEST_CASE("effect_record: worked-example studies") {
    StudySummary reading{"Reading 1982", 18, 1.60, 1.30, 20, 2.30, 2.00};
    const auto rec = effect_record(reading);
    CHECK(std::fabs(rec.g - (-0.402)) < 0.002);
    CHECK(rec.weight == doctest::Approx(1.0 / (rec.a + rec.b * rec.g * rec.g)).epsilon(1e-14));
    CHECK(rec.j > 0.0);
    CHECK(rec.j < 1.0);

    // Holsboer 1994 carries 23.2% of the light-therapy weight, with g = 0.80
    const auto light = parse_csv(kLightCsv);
    std::vector<EffectRecord> recs;
    double w_total = 0.0;
    for (const auto& s : light.studies) {
        recs.push_back(effect_record(s));
        w_total += recs.back().weight;
    }
    CHECK(std::fabs(recs[0].g - 0.80) < 0.005);
    CHECK(std::fabs(100.0 * recs[0].weight / w_total - 23.2) < 0.2);
}

TEST_CASE("effect_record: degenerate and trivial inputs") {
    StudySummary equal{"equal", 12, 5.0, 1.5, 12, 5.0, 2.0};
    const auto rec = effect_record(equal);
    CHECK(rec.g == 0.0);
    CHECK(rec.weight == doctest::Approx(1.0 / rec.a).epsilon(1e-14));

    StudySummary zero_sd{"zero", 10, 5.0, 0.0, 10, 4.0, 0.0};
    CHECK_THROWS_AS(effect_record(zero_sd), DataError);
    StudySummary tiny{"tiny", 1, 5.0, 1.0, 10, 4.0, 1.0};
    CHECK_THROWS_AS(effect_record(tiny), DataError);
}

TEST_CASE("weight_derivatives: closed forms and finite differences") {
    const auto flat = weight_derivatives(0.7, 0.1, 0.0);
    CHECK(flat.w == doctest::Approx(10.0));
    CHECK(flat.dw == 0.0);
    CHECK(flat.d2w == 0.0);

    const auto at_zero = weight_derivatives(0.0, 0.25, 0.8);
    CHECK(at_zero.w == doctest::Approx(4.0));
    CHECK(at_zero.dw == 0.0);
    CHECK(at_zero.d2w == doctest::Approx(-2.0 * 0.8 / (0.25 * 0.25)).epsilon(1e-13));

    TestRng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        const double g = rng.uniform(-2.0, 2.0);
        const double a = rng.uniform(0.05, 1.0);
        const double b = rng.uniform(0.0, 1.5);
        const auto wd = weight_derivatives(g, a, b);
        const double h = 1e-3;
        auto w = [&](double x) { return 1.0 / (a + b * x * x); };
        const double fd1 = (w(g + h) - w(g - h)) / (2.0 * h);
        const double fd1b = (w(g + h / 2) - w(g - h / 2)) / h;
        const double d1 = (4.0 * fd1b - fd1) / 3.0;
        const double fd2 = (w(g + h) - 2.0 * w(g) + w(g - h)) / (h * h);
        const double fd2b = (w(g + h / 2) - 2.0 * w(g) + w(g - h / 2)) / (h * h / 4.0);
        const double d2 = (4.0 * fd2b - fd2) / 3.0;
        CHECK(std::fabs(wd.dw - d1) <= 1e-6 * std::max(1.0, std::fabs(d1)));
        CHECK(std::fabs(wd.d2w - d2) <= 1e-6 * std::max(1.0, std::fabs(d2)));
    }
    CHECK_THROWS_AS(weight_derivatives(0.1, 0.0, 1.0), std::domain_error);
}

TEST_CASE("noncentral_t_raw_moment: symmetric anchors") {
    CHECK(noncentral_t_raw_moment(24.0, 0.0, 1) == 0.0);
    CHECK(noncentral_t_raw_moment(24.0, 0.0, 2) == doctest::Approx(24.0 / 22.0).epsilon(1e-12));
    CHECK(noncentral_t_raw_moment(24.0, 0.0, 3) == 0.0);

    // first moment is mu_t = sqrt(df/2) Gamma((df-1)/2)/Gamma(df/2) * ncp
    const double df = 26.0, ncp = 1.3;
    const double mu_t = std::sqrt(df / 2.0) *
                        std::exp(std::lgamma((df - 1.0) / 2.0) - std::lgamma(df / 2.0)) * ncp;
    CHECK(noncentral_t_raw_moment(df, ncp, 1) == doctest::Approx(mu_t).epsilon(1e-12));

    CHECK_THROWS_AS(noncentral_t_raw_moment(5.0, 0.0, 6), std::domain_error);
    CHECK_THROWS_AS(noncentral_t_raw_moment(30.0, 0.0, 7), std::domain_error);
}

TEST_CASE("smd_central_moments: m2 identity with the variance model") {
    // m2 == A + B delta^2 (both sides derive from the same t-moments)
    for (int n : {10, 20, 30, 100}) {
        for (double q : {0.25, 0.5, 0.75}) {
            for (double delta : {0.0, 0.2, 0.5, 1.0, 2.0}) {
                const auto m = smd_central_moments(n, q, delta);
                const double j = bias_correction_j(n);
                const double a = (n - 2.0) * j * j / ((n - 4.0) * n * q * (1.0 - q));
                const double b = (n - 2.0) * j * j / (n - 4.0) - 1.0;
                const double var = a + b * delta * delta;
                CHECK(std::fabs(m.m2 - var) <= 1e-10 * var);
            }
        }
    }
}

TEST_CASE("smd_central_moments: symmetry and existence") {
    const auto m = smd_central_moments(20, 0.5, 0.0);
    CHECK(m.m3 == 0.0);
    CHECK(m.m5 == 0.0);
    CHECK(m.m2 > 0.0);
    CHECK(m.m4 > m.m2 * m.m2);
    CHECK_THROWS_AS(smd_central_moments(8, 0.5, 0.1), NumericError);
    CHECK_NOTHROW(smd_central_moments(9, 0.5, 0.1));
    CHECK_THROWS_AS(smd_central_moments(20, 0.0, 0.1), std::domain_error);
}

TEST_CASE("smd_central_moments: order conditions under size doubling") {
    // m2 N, m4 N^2, m6 N^3 approach constants; m3 N^2 and m5 N^3 stay bounded
    const double q = 0.5, delta = 0.5;
    std::vector<double> c2, c3, c4, c5, c6;
    for (int n : {50, 100, 200, 400}) {
        const auto m = smd_central_moments(n, q, delta);
        c2.push_back(m.m2 * n);
        c3.push_back(std::fabs(m.m3) * n * n);
        c4.push_back(m.m4 * n * n);
        c5.push_back(std::fabs(m.m5) * n * n * n);
        c6.push_back(m.m6 * n * n * n);
    }
    for (std::size_t k = 1; k < c2.size(); ++k) {
        CHECK(std::fabs(c2[k] / c2[k - 1] - 1.0) < 0.1);
        CHECK(std::fabs(c4[k] / c4[k - 1] - 1.0) < 0.15);
        CHECK(std::fabs(c6[k] / c6[k - 1] - 1.0) < 0.2);
        CHECK(c3[k] < 4.0 * c3[0] + 1.0);
        CHECK(c5[k] < 4.0 * c5[0] + 1.0);
    }
}

TEST_CASE("smd_central_moments: normal limit at large N") {
    const auto m = smd_central_moments(10000, 0.5, 0.5);
    CHECK(std::fabs(m.m4 / (m.m2 * m.m2) - 3.0) < 0.02 * 3.0);
    CHECK(std::fabs(m.m6 / (m.m2 * m.m2 * m.m2) - 15.0) < 0.05 * 15.0);
}

TEST_CASE("smd_central_moments: Monte Carlo cross-check at N=200") {
    // m3, excess m4, m5 against 10^6 simulated estimates
    const int n_t = 100, n_c = 100;
    const double delta = 0.5;
    const auto m = smd_central_moments(n_t + n_c, 0.5, delta);

    const std::size_t reps = 1000000;
    Philox rng(20240817, 0);
    long double s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0;
    std::vector<double> draws(reps);
    for (std::size_t i = 0; i < reps; ++i) draws[i] = sample_study_g(n_t, n_c, delta, rng);
    for (double g : draws) s1 += g;
    const double mean = static_cast<double>(s1 / reps);
    for (double g : draws) {
        const long double d = g - delta;  // central about the true delta
        s2 += d * d;
        s3 += d * d * d;
        s4 += d * d * d * d;
        s5 += d * d * d * d * d;
    }
    const double m2_hat = static_cast<double>(s2 / reps);
    const double m3_hat = static_cast<double>(s3 / reps);
    const double m4_hat = static_cast<double>(s4 / reps);
    const double m5_hat = static_cast<double>(s5 / reps);

    // unbiasedness: mean within 3 standard errors of delta
    const double se_mean = std::sqrt(m2_hat / reps);
    CHECK(std::fabs(mean - delta) < 3.0 * se_mean);

    CHECK(std::fabs(m.m2 - m2_hat) < 0.15 * std::fabs(m2_hat));
    CHECK(std::fabs(m.m3 - m3_hat) < 0.15 * std::fabs(m3_hat));
    CHECK(std::fabs((m.m4 - 3.0 * m.m2 * m.m2) - (m4_hat - 3.0 * m2_hat * m2_hat)) <
          0.15 * std::fabs(m4_hat - 3.0 * m2_hat * m2_hat));
    CHECK(std::fabs(m.m5 - m5_hat) < 0.15 * std::fabs(m5_hat));
}

TEST_CASE("NoncentralTParams and NullMomentModel agree with the one-shot path") {
    const auto p = NoncentralTParams::for_study(28, 0.5, 0.8);
    CHECK(p.df == doctest::Approx(26.0));
    CHECK(p.ncp == doctest::Approx(std::sqrt(28.0 * 0.25) * 0.8).epsilon(1e-14));
    CHECK(p.scale ==
          doctest::Approx(bias_correction_j(28) / std::sqrt(28.0 * 0.25)).epsilon(1e-14));

    const NullMomentModel model(28, 0.5);
    for (double g0 : {-0.4, 0.0, 0.8, 1.7}) {
        const auto a = model.moments_at(g0);
        const auto b = smd_central_moments(28, 0.5, g0);
        CHECK(a.m2 == doctest::Approx(b.m2).epsilon(1e-14));
        CHECK(a.m6 == doctest::Approx(b.m6).epsilon(1e-14));
    }
}
