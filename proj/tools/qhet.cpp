#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qhet/csv.hpp"
#include "qhet/errors.hpp"
#include "qhet/json_report.hpp"
#include "qhet/pipeline.hpp"
#include "qhet/simlab.hpp"
#include "qhet/version.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

std::string fmt(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt_opt(const std::optional<double>& v, int decimals) {
    return v.has_value() ? fmt(*v, decimals) : std::string("n/a");
}

std::string fmt_opt(const std::optional<qhet::Probability>& v, int decimals) {
    return v.has_value() ? fmt(v->value(), decimals) : std::string("n/a");
}

void print_report_text(const qhet::QTestReport& rep,
                       const std::optional<qhet::BootstrapInfo>& boot) {
    std::cout << "Homogeneity test for the standardized mean difference\n";
    std::cout << "  studies:            " << rep.study_count << "\n";
    std::cout << "  Q:                  " << fmt(rep.q_stat, 2) << "\n";
    std::cout << "  total weight W:     " << fmt(rep.big_w, 2) << "\n";
    std::cout << "  combined effect:    " << fmt(rep.g_combined, 4) << "  (estimator "
              << (rep.estimator == qhet::CombinedEffect::weighted ? "w" : "A") << ")\n";
    if (rep.degraded_small_n) {
        std::cout << "  [degraded: some study has N <= 8; corrected moments unavailable]\n";
    } else {
        std::cout << "  E[Q] corrected:     " << fmt_opt(rep.eq_corrected, 2) << "\n";
        std::cout << "  E[Q^2] corrected:   " << fmt_opt(rep.eq2_corrected, 2) << "\n";
        std::cout << "  gamma shape/scale:  " << fmt_opt(rep.gamma_shape, 2) << " / "
                  << fmt_opt(rep.gamma_scale, 2);
        if (rep.gamma_degenerate) std::cout << "  [degenerate fit]";
        std::cout << "\n";
    }
    std::cout << "  p (chi-square, I-1 df):   " << fmt(rep.p_chisq_classic.value(), 3) << "\n";
    std::cout << "  p (chi-square, E[Q] df):  " << fmt_opt(rep.p_chisq_fdf, 3) << "\n";
    std::cout << "  p (gamma):                " << fmt_opt(rep.p_gamma, 3) << "\n";
    if (rep.p_bootstrap.has_value()) {
        std::cout << "  p (bootstrap";
        if (boot.has_value()) std::cout << ", " << boot->reps << " reps, seed " << boot->seed;
        std::cout << "):  " << fmt(rep.p_bootstrap->value(), 3) << "\n";
    }
    std::cout << "  per study:\n";
    for (const auto& r : rep.per_study) {
        std::cout << "    " << r.id << ": g=" << fmt(r.g, 3)
                  << " weight=" << fmt(100.0 * r.weight / rep.big_w, 1) << "%\n";
    }
}

void print_sim_text(const qhet::SimConfig& cfg, const qhet::SimResult& res) {
    std::cout << "Simulation: " << cfg.study_sizes.size() << " studies, delta=" << cfg.delta
              << ", tau2=" << cfg.tau2 << ", reps=" << res.reps << ", seed=" << res.seed << "\n";
    std::cout << "  sizes (n_t/n_c):";
    for (const auto& [nt, nc] : cfg.study_sizes) std::cout << " " << nt << "/" << nc;
    std::cout << "\n";
    std::cout << "  achieved rejection rates:\n";
    for (const auto& lv : res.achieved_levels) {
        std::cout << "    " << qhet::to_string(lv.method) << " @ alpha=" << fmt(lv.alpha, 3)
                  << ": " << fmt(lv.rate, 4) << "  (mc se " << fmt(lv.mc_se, 5) << ")\n";
    }
    std::cout << "  Q moments: mean=" << fmt(res.q_mean, 3) << "  mean sq=" << fmt(res.q2_mean, 2)
              << "  var=" << fmt(res.q_var, 3) << "\n";
    std::cout << "  formula moments at true delta: E[Q]=" << fmt(res.formula_eq, 3)
              << "  E[Q^2]=" << fmt(res.formula_eq2, 2) << "\n";
    if (res.degenerate_reps > 0)
        std::cout << "  degenerate replications: " << res.degenerate_reps << "\n";
}

std::vector<std::pair<int, int>> make_sizes(const std::vector<int>& totals, double q) {
    std::vector<std::pair<int, int>> sizes;
    sizes.reserve(totals.size());
    for (int n : totals) {
        const int n_c = static_cast<int>(std::lround(n * q));
        const int n_t = n - n_c;
        sizes.emplace_back(n_t, n_c);
    }
    return sizes;
}

int run(int argc, char** argv) {
    CLI::App app{"Cochran-Q homogeneity testing with moment-corrected null distributions"};
    app.set_version_flag("--version", std::string(qhet::kToolVersion));
    app.require_subcommand(1);

    // --- test ---
    auto* test_cmd = app.add_subcommand("test", "Run the homogeneity test on a study CSV");
    std::string csv_path;
    std::string estimator_flag = "w";
    std::uint64_t boot_reps = 0;
    std::uint64_t seed = 1;
    bool as_json = false;
    unsigned threads = 0;
    test_cmd->add_option("csv", csv_path, "input CSV file")->required();
    test_cmd->add_option("--estimator", estimator_flag, "combined-effect estimator")
        ->check(CLI::IsMember({"w", "A"}));
    test_cmd->add_option("--bootstrap", boot_reps, "also compute a bootstrap p-value (reps)");
    test_cmd->add_option("--seed", seed, "seed for the bootstrap (default 1, echoed in output)");
    test_cmd->add_flag("--json", as_json, "emit the machine-readable report");
    test_cmd->add_option("--threads", threads, "worker threads (default: QHET_THREADS or all)");

    // --- simulate ---
    auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study of the test");
    int n_studies = 0;
    int n_total = 0;
    double q = 0.5;
    std::string sizes_flag;
    int repeat = 1;
    qhet::SimConfig cfg;
    std::string sim_estimator = "w";
    std::string levels_flag = "0.05,0.10";
    bool sim_json = false;
    sim_cmd->add_option("--studies", n_studies, "number of studies (equal-size shorthand)");
    sim_cmd->add_option("--n", n_total, "total size N of each study (with --studies)");
    sim_cmd->add_option("--q", q, "control-arm fraction of each study")->capture_default_str();
    sim_cmd->add_option("--sizes", sizes_flag, "comma-separated study totals, e.g. \"24,32,36\"");
    sim_cmd->add_option("--repeat", repeat, "repeat the --sizes list this many times")->capture_default_str();
    sim_cmd->add_option("--delta", cfg.delta, "true standardized mean difference")->capture_default_str();
    sim_cmd->add_option("--tau2", cfg.tau2, "random-effects variance (0 = null)")->capture_default_str();
    sim_cmd->add_option("--reps", cfg.reps, "replications")->capture_default_str();
    sim_cmd->add_option("--seed", cfg.seed, "RNG seed (echoed in output)")->capture_default_str();
    sim_cmd->add_option("--levels", levels_flag, "comma-separated alpha levels")->capture_default_str();
    sim_cmd->add_option("--estimator", sim_estimator, "combined-effect estimator")
        ->check(CLI::IsMember({"w", "A"}));
    sim_cmd->add_flag("--delta-known", cfg.delta_known,
                      "also evaluate the gamma test at the true delta");
    sim_cmd->add_flag("--json", sim_json, "emit the machine-readable result");
    sim_cmd->add_option("--threads", cfg.threads,
                        "worker threads (default: QHET_THREADS or all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return kExitUsage;
    }

    if (test_cmd->parsed()) {
        const auto dataset = qhet::parse_csv(csv_path);
        if (dataset.studies.size() < 2)
            throw qhet::DataError(csv_path + ": at least 2 studies required for the test");
        const auto estimator = estimator_flag == "w" ? qhet::CombinedEffect::weighted
                                                     : qhet::CombinedEffect::unbiased;
        auto report = qhet::run_homogeneity_test(dataset.studies, estimator);
        std::optional<qhet::BootstrapInfo> boot;
        if (boot_reps > 0) {
            report.p_bootstrap =
                qhet::bootstrap_p_value(dataset.studies, boot_reps, seed, threads);
            boot = qhet::BootstrapInfo{boot_reps, seed};
        }
        if (as_json)
            std::cout << qhet::report_to_json(report, csv_path, boot).dump(2) << "\n";
        else
            print_report_text(report, boot);
        return 0;
    }

    // simulate
    if (!sizes_flag.empty() && n_studies > 0)
        throw CLI::ValidationError("--sizes and --studies are mutually exclusive");
    if (!(q > 0.0 && q < 1.0)) throw CLI::ValidationError("--q must be in (0,1)");
    std::vector<int> totals;
    if (!sizes_flag.empty()) {
        std::size_t pos = 0;
        while (pos <= sizes_flag.size()) {
            const std::size_t comma = sizes_flag.find(',', pos);
            const std::string tok = sizes_flag.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (!tok.empty()) totals.push_back(std::stoi(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (totals.empty()) throw CLI::ValidationError("--sizes: no sizes given");
        if (repeat < 1) throw CLI::ValidationError("--repeat must be >= 1");
        std::vector<int> repeated;
        for (int r = 0; r < repeat; ++r) repeated.insert(repeated.end(), totals.begin(), totals.end());
        totals = std::move(repeated);
    } else {
        if (n_studies < 2 || n_total < 4)
            throw CLI::ValidationError("simulate needs --sizes or (--studies >= 2 and --n >= 4)");
        totals.assign(static_cast<std::size_t>(n_studies), n_total);
    }
    cfg.study_sizes = make_sizes(totals, q);
    cfg.estimator = sim_estimator == "w" ? qhet::CombinedEffect::weighted
                                         : qhet::CombinedEffect::unbiased;
    cfg.alpha_levels.clear();
    {
        std::size_t pos = 0;
        while (pos <= levels_flag.size()) {
            const std::size_t comma = levels_flag.find(',', pos);
            const std::string tok = levels_flag.substr(
                pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (!tok.empty()) cfg.alpha_levels.push_back(std::stod(tok));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }

    const auto result = qhet::simulate(cfg);
    if (sim_json)
        std::cout << qhet::sim_result_to_json(cfg, result).dump(2) << "\n";
    else
        print_sim_text(cfg, result);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const qhet::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const qhet::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::domain_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
}
