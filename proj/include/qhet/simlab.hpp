#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qhet/pipeline.hpp"
#include "qhet/probability.hpp"
#include "qhet/rng.hpp"
#include "qhet/smd.hpp"

namespace qhet {

/// One SMD estimate simulated from first principles: normal arm means and
/// chi-square arm variances with unit sigma, pooled, then bias-corrected.
double sample_study_g(int n_t, int n_c, double delta, Philox& rng);

/// The same law sampled through the scaled noncentral-t representation.
double sample_study_g_noncentral_t(int n_t, int n_c, double delta_i, Philox& rng);

enum class SimMethod {
    chisq_classic,    // chi-square, I-1 df
    gamma_estimated,  // two-moment gamma at the estimated null effect
    gamma_known,      // two-moment gamma at the true delta
    chisq_fdf,        // chi-square with E[Q] df at the estimated null effect
};

const char* to_string(SimMethod m);

struct SimConfig {
    std::vector<std::pair<int, int>> study_sizes;  // (n_t, n_c) per study
    double delta = 0.0;
    double tau2 = 0.0;  // random-effects variance; 0 simulates the null
    std::uint64_t reps = 100000;
    std::uint64_t seed = 0;
    std::vector<double> alpha_levels = {0.05, 0.10};
    CombinedEffect estimator = CombinedEffect::weighted;
    bool delta_known = false;  // also evaluate the gamma test at the true delta
    unsigned threads = 0;      // 0: QHET_THREADS env var, else hardware default

    void validate() const;
};

struct LevelEstimate {
    SimMethod method;
    double alpha = 0.0;
    double rate = 0.0;   // achieved rejection proportion
    double mc_se = 0.0;  // sqrt(rate (1-rate) / reps)
};

struct SimResult {
    std::vector<LevelEstimate> achieved_levels;
    double q_mean = 0.0;
    double q2_mean = 0.0;
    double q_var = 0.0;  // sample variance of Q
    double formula_eq = 0.0;   // corrected E[Q] at the true delta
    double formula_eq2 = 0.0;  // corrected E[Q^2] at the true delta
    std::uint64_t degenerate_reps = 0;  // reps where a corrected fit failed
    std::uint64_t reps = 0;
    std::uint64_t seed = 0;
};

/// Monte Carlo study of the homogeneity test. Replications use independent
/// counter-based substreams keyed by (seed, replication index) and an
/// order-fixed block reduction, so results are identical for any thread count.
SimResult simulate(const SimConfig& config);

/// Null-calibrated p-value for an observed dataset: simulate `reps`
/// meta-analyses with the observed sizes and delta = g_w, and return the
/// fraction with Q at least as large as observed.
Probability bootstrap_p_value(std::span<const StudySummary> studies, std::uint64_t reps,
                              std::uint64_t seed, unsigned threads = 0);

/// Threads actually used for a requested count (QHET_THREADS env fallback).
unsigned resolve_thread_count(unsigned requested);

}  // namespace qhet
