#include "qhet/simlab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>

#include "qhet/errors.hpp"
#include "qhet/specfun.hpp"

namespace qhet {

namespace {

double sample_g_with_j(int n_t, int n_c, double delta, double j, Philox& rng) {
    const double z_t = rng.next_normal();
    const double z_c = rng.next_normal();
    const double v_t = rng.next_chi_square(n_t - 1.0);
    const double v_c = rng.next_chi_square(n_c - 1.0);
    const double xbar_t = delta + z_t / std::sqrt(static_cast<double>(n_t));
    const double xbar_c = z_c / std::sqrt(static_cast<double>(n_c));
    const double sp = std::sqrt((v_t + v_c) / (n_t + n_c - 2.0));
    return j * (xbar_t - xbar_c) / sp;
}

double sample_g_nct_with_j(int n_total, double q, double delta_i, double j, Philox& rng) {
    const double root = std::sqrt(n_total * q * (1.0 - q));
    const double ncp = root * delta_i;
    const double z = rng.next_normal();
    const double v = rng.next_chi_square(n_total - 2.0);
    const double t = (z + ncp) / std::sqrt(v / (n_total - 2.0));
    return j * t / root;
}

struct StudySetup {
    int n_t = 0, n_c = 0;
    double j = 0.0;
    double a = 0.0, b = 0.0;
    NullMomentModel model;

    StudySetup(int nt, int nc)
        : n_t(nt),
          n_c(nc),
          model(nt + nc, static_cast<double>(nc) / (nt + nc)) {
        j = model.j();
        a = model.a();
        b = model.b();
    }
};

struct BlockAccum {
    std::vector<std::uint32_t> reject;  // method-major, then alpha
    long double q_sum = 0.0L;
    long double q2_sum = 0.0L;
    std::uint32_t degenerate = 0;
};

constexpr std::uint64_t kBlockSize = 1024;

void run_workers(unsigned threads, std::uint64_t n_blocks, const std::function<void(std::uint64_t)>& work) {
    std::atomic<std::uint64_t> next{0};
    auto runner = [&] {
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            work(b);
        }
    };
    if (threads <= 1) {
        runner();
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(runner);
    for (auto& th : pool) th.join();
}

}  // namespace

double sample_study_g(int n_t, int n_c, double delta, Philox& rng) {
    if (n_t < 2 || n_c < 2)
        throw std::domain_error("sample_study_g: arm sizes must be >= 2");
    return sample_g_with_j(n_t, n_c, delta, bias_correction_j(n_t + n_c), rng);
}

double sample_study_g_noncentral_t(int n_t, int n_c, double delta_i, Philox& rng) {
    if (n_t < 2 || n_c < 2)
        throw std::domain_error("sample_study_g_noncentral_t: arm sizes must be >= 2");
    const int n = n_t + n_c;
    const double q = static_cast<double>(n_c) / n;
    return sample_g_nct_with_j(n, q, delta_i, bias_correction_j(n), rng);
}

const char* to_string(SimMethod m) {
    switch (m) {
        case SimMethod::chisq_classic: return "chisq_classic";
        case SimMethod::gamma_estimated: return "gamma_estimated";
        case SimMethod::gamma_known: return "gamma_known";
        case SimMethod::chisq_fdf: return "chisq_fdf";
    }
    return "?";
}

void SimConfig::validate() const {
    if (study_sizes.size() < 2)
        throw std::invalid_argument("SimConfig: at least 2 studies required");
    for (const auto& [nt, nc] : study_sizes)
        if (nt < 2 || nc < 2)
            throw std::invalid_argument("SimConfig: arm sizes must be >= 2");
    if (reps < 1) throw std::invalid_argument("SimConfig: reps must be >= 1");
    if (!(tau2 >= 0.0)) throw std::invalid_argument("SimConfig: tau2 must be >= 0");
    if (alpha_levels.empty())
        throw std::invalid_argument("SimConfig: at least one alpha level required");
    for (double a : alpha_levels)
        if (!(a > 0.0 && a < 1.0))
            throw std::invalid_argument("SimConfig: alpha levels must be in (0,1)");
}

unsigned resolve_thread_count(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QHET_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

SimResult simulate(const SimConfig& config) {
    config.validate();

    std::vector<StudySetup> studies;
    studies.reserve(config.study_sizes.size());
    for (const auto& [nt, nc] : config.study_sizes) studies.emplace_back(nt, nc);
    const std::size_t n_studies = studies.size();

    // corrected moments at the true delta (data-independent)
    std::vector<StudyNullInputs> known_inputs;
    known_inputs.reserve(n_studies);
    for (const auto& s : studies) {
        const auto wd = s.model.weights_at(config.delta);
        known_inputs.push_back({wd.w, wd.dw, wd.d2w, s.model.moments_at(config.delta)});
    }
    const double formula_eq = expected_q(known_inputs);
    const double formula_eq2 = expected_q2(known_inputs);

    GammaParams known_fit{};
    if (config.delta_known) known_fit = gamma_fit(formula_eq, formula_eq2);

    std::vector<SimMethod> methods = {SimMethod::chisq_classic, SimMethod::gamma_estimated,
                                      SimMethod::chisq_fdf};
    if (config.delta_known) methods.push_back(SimMethod::gamma_known);
    const std::size_t n_alphas = config.alpha_levels.size();
    const std::size_t n_cells = methods.size() * n_alphas;

    const std::uint64_t n_blocks = (config.reps + kBlockSize - 1) / kBlockSize;
    std::vector<BlockAccum> blocks(n_blocks);

    const double sqrt_tau = std::sqrt(config.tau2);
    const bool random_effects = config.tau2 > 0.0;
    const double df_classic = static_cast<double>(n_studies - 1);

    auto work = [&](std::uint64_t block) {
        BlockAccum acc;
        acc.reject.assign(n_cells, 0);
        std::vector<double> g(n_studies), w(n_studies);
        std::vector<StudyNullInputs> inputs(n_studies);
        const std::uint64_t lo = block * kBlockSize;
        const std::uint64_t hi = std::min(config.reps, lo + kBlockSize);

        for (std::uint64_t rep = lo; rep < hi; ++rep) {
            Philox rng(config.seed, rep);

            long double w_sum = 0.0L, wg_sum = 0.0L, inv_a_sum = 0.0L, inv_a_g_sum = 0.0L;
            for (std::size_t i = 0; i < n_studies; ++i) {
                const auto& s = studies[i];
                if (random_effects) {
                    const double delta_i = config.delta + sqrt_tau * rng.next_normal();
                    g[i] = sample_g_nct_with_j(s.n_t + s.n_c,
                                               static_cast<double>(s.n_c) / (s.n_t + s.n_c),
                                               delta_i, s.j, rng);
                } else {
                    g[i] = sample_g_with_j(s.n_t, s.n_c, config.delta, s.j, rng);
                }
                w[i] = 1.0 / (s.a + s.b * g[i] * g[i]);
                w_sum += w[i];
                wg_sum += w[i] * g[i];
                inv_a_sum += 1.0 / s.a;
                inv_a_g_sum += g[i] / s.a;
            }
            const double g_w = static_cast<double>(wg_sum / w_sum);
            long double q_acc = 0.0L;
            for (std::size_t i = 0; i < n_studies; ++i) {
                const long double dev = g[i] - g_w;
                q_acc += w[i] * dev * dev;
            }
            const double q_stat = static_cast<double>(q_acc);
            acc.q_sum += q_stat;
            acc.q2_sum += static_cast<long double>(q_stat) * q_stat;

            const double g_est = config.estimator == CombinedEffect::weighted
                                     ? g_w
                                     : static_cast<double>(inv_a_g_sum / inv_a_sum);

            const double p_classic = specfun::chi_square_sf(q_stat, df_classic).value();
            double p_gamma_est = 2.0, p_fdf = 2.0, p_gamma_known = 2.0;  // 2 = never rejects

            bool fit_failed = false;
            for (std::size_t i = 0; i < n_studies; ++i) {
                const auto wd = studies[i].model.weights_at(g_est);
                inputs[i] = {wd.w, wd.dw, wd.d2w, studies[i].model.moments_at(g_est)};
            }
            const double eq = expected_q(inputs);
            if (eq > 0.0) {
                p_fdf = specfun::chi_square_sf(q_stat, eq).value();
                const double eq2 = expected_q2(inputs);
                if (eq2 > eq * eq) {
                    const auto fit = gamma_fit(eq, eq2);
                    p_gamma_est = specfun::gamma_sf(q_stat, fit.shape, fit.scale).value();
                } else {
                    fit_failed = true;
                }
            } else {
                fit_failed = true;
            }
            if (fit_failed) ++acc.degenerate;

            if (config.delta_known)
                p_gamma_known =
                    specfun::gamma_sf(q_stat, known_fit.shape, known_fit.scale).value();

            for (std::size_t m = 0; m < methods.size(); ++m) {
                double p = 2.0;
                switch (methods[m]) {
                    case SimMethod::chisq_classic: p = p_classic; break;
                    case SimMethod::gamma_estimated: p = p_gamma_est; break;
                    case SimMethod::chisq_fdf: p = p_fdf; break;
                    case SimMethod::gamma_known: p = p_gamma_known; break;
                }
                for (std::size_t a = 0; a < n_alphas; ++a)
                    if (p < config.alpha_levels[a]) ++acc.reject[m * n_alphas + a];
            }
        }
        blocks[block] = std::move(acc);
    };

    const unsigned threads = resolve_thread_count(config.threads);
    run_workers(threads, n_blocks, work);

    // order-fixed reduction over blocks
    std::vector<std::uint64_t> counts(n_cells, 0);
    long double q_sum = 0.0L, q2_sum = 0.0L;
    std::uint64_t degenerate = 0;
    for (const auto& blk : blocks) {
        for (std::size_t c = 0; c < n_cells; ++c) counts[c] += blk.reject[c];
        q_sum += blk.q_sum;
        q2_sum += blk.q2_sum;
        degenerate += blk.degenerate;
    }

    SimResult res;
    res.reps = config.reps;
    res.seed = config.seed;
    res.degenerate_reps = degenerate;
    res.formula_eq = formula_eq;
    res.formula_eq2 = formula_eq2;
    const long double reps_ld = static_cast<long double>(config.reps);
    res.q_mean = static_cast<double>(q_sum / reps_ld);
    res.q2_mean = static_cast<double>(q2_sum / reps_ld);
    res.q_var = config.reps > 1
                    ? static_cast<double>((q2_sum - q_sum * q_sum / reps_ld) / (reps_ld - 1.0L))
                    : 0.0;
    for (std::size_t m = 0; m < methods.size(); ++m)
        for (std::size_t a = 0; a < n_alphas; ++a) {
            const double rate =
                static_cast<double>(counts[m * n_alphas + a]) / static_cast<double>(config.reps);
            res.achieved_levels.push_back(
                {methods[m], config.alpha_levels[a], rate,
                 std::sqrt(rate * (1.0 - rate) / static_cast<double>(config.reps))});
        }
    return res;
}

Probability bootstrap_p_value(std::span<const StudySummary> studies, std::uint64_t reps,
                              std::uint64_t seed, unsigned threads) {
    if (studies.size() < 2)
        throw std::invalid_argument("bootstrap_p_value: at least 2 studies required");
    if (reps < 1) throw std::invalid_argument("bootstrap_p_value: reps must be >= 1");

    std::vector<EffectRecord> records;
    records.reserve(studies.size());
    for (const auto& s : studies) records.push_back(effect_record(s));
    const auto observed = cochran_q(records);

    struct Arm {
        int n_t, n_c;
        double j, a, b;
    };
    std::vector<Arm> arms;
    arms.reserve(records.size());
    for (const auto& r : records) arms.push_back({r.n_t, r.n_c, r.j, r.a, r.b});

    const std::uint64_t n_blocks = (reps + kBlockSize - 1) / kBlockSize;
    std::vector<std::uint64_t> hits(n_blocks, 0);

    auto work = [&](std::uint64_t block) {
        std::uint64_t count = 0;
        std::vector<double> g(arms.size()), w(arms.size());
        const std::uint64_t lo = block * kBlockSize;
        const std::uint64_t hi = std::min(reps, lo + kBlockSize);
        for (std::uint64_t rep = lo; rep < hi; ++rep) {
            Philox rng(seed, rep);
            long double w_sum = 0.0L, wg_sum = 0.0L;
            for (std::size_t i = 0; i < arms.size(); ++i) {
                g[i] = sample_g_with_j(arms[i].n_t, arms[i].n_c, observed.g_combined, arms[i].j,
                                       rng);
                w[i] = 1.0 / (arms[i].a + arms[i].b * g[i] * g[i]);
                w_sum += w[i];
                wg_sum += w[i] * g[i];
            }
            const double g_w = static_cast<double>(wg_sum / w_sum);
            long double q_acc = 0.0L;
            for (std::size_t i = 0; i < arms.size(); ++i) {
                const long double dev = g[i] - g_w;
                q_acc += w[i] * dev * dev;
            }
            if (static_cast<double>(q_acc) >= observed.q_stat) ++count;
        }
        hits[block] = count;
    };

    run_workers(resolve_thread_count(threads), n_blocks, work);

    std::uint64_t total = 0;
    for (std::uint64_t h : hits) total += h;
    return Probability(static_cast<double>(total) / static_cast<double>(reps));
}

}  // namespace qhet
