// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exits nonzero if any fail.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "clreserve/chain_ladder.hpp"
#include "clreserve/claims.hpp"
#include "clreserve/claims_csv.hpp"
#include "clreserve/csv.hpp"
#include "clreserve/errors.hpp"
#include "clreserve/fnn.hpp"
#include "clreserve/mack.hpp"
#include "clreserve/parallel.hpp"
#include "clreserve/pipeline.hpp"
#include "clreserve/rbns.hpp"
#include "clreserve/simulator.hpp"
#include "clreserve/train.hpp"
#include "clreserve/triangle.hpp"

namespace fs = std::filesystem;
using namespace clreserve;
using Clock = std::chrono::steady_clock;

namespace {

struct Criterion {
    int number;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<Criterion> g_results;
std::vector<BalanceRecord> g_balance_records;
std::mutex g_balance_mutex;

void record_balance(const PipelineResult& res) {
    std::lock_guard<std::mutex> lock(g_balance_mutex);
    g_balance_records.insert(g_balance_records.end(), res.steps.begin(), res.steps.end());
}

template <typename Fn>
void run_criterion(int number, const std::string& name, Fn&& fn) {
    Criterion c;
    c.number = number;
    c.name = name;
    auto start = Clock::now();
    try {
        c.pass = fn(c.detail);
    } catch (const std::exception& e) {
        c.pass = false;
        c.detail = std::string("exception: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    std::cerr << "  ... criterion " << number << " done in " << c.seconds << " s\n";
    g_results.push_back(c);
}

double rel_diff(double a, double b) {
    double denom = std::max(std::abs(a), std::abs(b));
    return denom == 0.0 ? 0.0 : std::abs(a - b) / denom;
}

// ---- 1: grossing-up equivalence --------------------------------------------

bool grossing_up_equivalence(std::string& detail) {
    std::mt19937_64 rng(0xC1A551CULL);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::uniform_int_distribution<int> pick_i(3, 12);
        int I = pick_i(rng);
        std::uniform_int_distribution<int> pick_j(2, I - 1);
        int J = pick_j(rng);
        std::lognormal_distribution<double> cell(4.0, 1.0);
        std::vector<std::vector<double>> rows(static_cast<size_t>(I));
        for (int i = 1; i <= I; ++i)
            for (int j = 0; j <= std::min(J, I - i); ++j)
                rows[static_cast<size_t>(i - 1)].push_back(cell(rng));
        Triangle tri(I, J, std::move(rows));
        GrossingUpCheck check = verify_grossing_up(tri);
        worst = std::max({worst, check.max_ultimate_rel_diff, check.max_factor_rel_diff});
    }
    detail = "1000 trapezoids, max rel diff " + csv::format_double(worst);
    return worst < 1e-12;
}

// ---- 2: hand-worked 3x3 fixture ---------------------------------------------

bool hand_worked_fixture(std::string& detail) {
    Triangle tri = make_triangle(3, 2,
                                 {{{1, 0}, 100.0},
                                  {{1, 1}, 150.0},
                                  {{1, 2}, 180.0},
                                  {{2, 0}, 110.0},
                                  {{2, 1}, 160.0},
                                  {{3, 0}, 120.0}});
    DevFactors f = estimate_cl_factors(tri);
    std::vector<double> ult = cl_forecast(tri, f);
    ReserveSummary res = cl_reserves(tri, ult);
    MackEstimates mack = mack_uncertainty(tri);

    double sigma2_expected = 100.0 / (42.0 * 42.0) + 110.0 * 25.0 / (231.0 * 231.0);
    double worst = std::max({rel_diff(f.at(0), 31.0 / 21.0), rel_diff(f.at(1), 1.2),
                             rel_diff(ult[1], 192.0), rel_diff(ult[2], 7440.0 / 35.0),
                             rel_diff(res.total, 4360.0 / 35.0),
                             rel_diff(mack.sigma2[0], sigma2_expected)});
    detail = "max rel error " + csv::format_double(worst) + " (factors, ultimates, reserve, sigma^2)";
    return worst < 1e-9;
}

// ---- 3: RBNS degenerate-cohort equivalence ----------------------------------

bool rbns_degenerate_equivalence(std::string& detail) {
    std::mt19937_64 seed_rng(0xDE6E7ULL);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        SimConfig cfg;
        cfg.num_accident_periods = 4 + static_cast<int>(seed_rng() % 4);
        cfg.num_dev_periods = 2 + static_cast<int>(seed_rng() % (cfg.num_accident_periods - 2));
        cfg.expected_claims_per_period = 60;
        cfg.reporting_delay_probs = {1.0}; // every delay zero
        cfg.severity_scale = 30.0;
        cfg.severity_sigma = 0.8;
        cfg.dev_factor_profile.assign(static_cast<size_t>(cfg.num_dev_periods), 1.3);
        cfg.dev_noise_sigma = 0.2;
        cfg.seed = seed_rng();
        Portfolio p = censor_to_valuation(simulate(cfg));

        RbnsResult rbns = rbns_ptu(p);
        Triangle tri = aggregate(p);
        PtuResult agg = estimate_ptu(tri);
        ReserveSummary agg_res = cl_reserves(tri, agg.ultimates);

        for (size_t j = 0; j < rbns.factors.size(); ++j)
            worst = std::max(worst, rel_diff(rbns.factors[j], agg.factors.values[j]));
        for (size_t i = 0; i < rbns.reserve_by_period.size(); ++i)
            worst = std::max(worst, rel_diff(rbns.reserve_by_period[i], agg_res.by_period[i]));
        worst = std::max(worst, rel_diff(rbns.total_reserve, agg_res.total));
    }
    detail = "100 zero-delay portfolios, max rel diff " + csv::format_double(worst);
    return worst < 1e-12;
}

// ---- 5: gradient check -------------------------------------------------------

bool gradient_check(std::string& detail) {
    std::mt19937_64 rng(0x6AD5ULL);
    const double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        int dim = 2 + static_cast<int>(rng() % 3);
        std::vector<int> sizes{dim, 3 + static_cast<int>(rng() % 3), 3, 1};
        FnnModel m = FnnModel::seeded(sizes, rng());

        std::normal_distribution<double> feat(0.0, 1.0);
        std::lognormal_distribution<double> target(0.3, 0.4);
        Dataset data;
        data.dim = dim;
        std::vector<double> x(static_cast<size_t>(dim));
        for (size_t r = 0; r < 8; ++r) {
            for (auto& v : x)
                v = feat(rng);
            data.push_row(x.data(), target(rng), static_cast<uint32_t>(r));
        }
        std::vector<size_t> rows{0, 1, 2, 3, 4, 5, 6, 7};

        FnnGradient ws(m);
        std::vector<double> grad;
        ws.loss(m, data.x.data(), data.y.data(), rows, &grad);
        for (size_t k = 0; k < m.num_params(); ++k) {
            double saved = m.params()[k];
            m.params()[k] = saved + h;
            double up = ws.loss(m, data.x.data(), data.y.data(), rows, nullptr);
            m.params()[k] = saved - h;
            double down = ws.loss(m, data.x.data(), data.y.data(), rows, nullptr);
            m.params()[k] = saved;
            double numeric = (up - down) / (2.0 * h);
            double err = std::abs(grad[k] - numeric) /
                         std::max({std::abs(grad[k]), std::abs(numeric), 1.0});
            worst = std::max(worst, err);
        }
    }
    detail = "20 models, worst per-parameter rel error " + csv::format_double(worst);
    return worst < 1e-5;
}

// ---- 6: parameter counts -----------------------------------------------------

bool parameter_counts(std::string& detail) {
    size_t five = FnnModel(std::vector<int>{5, 20, 15, 10, 1}).num_params();
    size_t seven = FnnModel(std::vector<int>{7, 20, 15, 10, 1}).num_params();
    detail = "input 5 -> " + std::to_string(five) + " weights, input 7 -> " + std::to_string(seven);
    return five == 606 && seven == 646;
}

// ---- 7: pipeline consistency on uninformative data ---------------------------

PipelineConfig acceptance_pipeline_config(uint64_t master_seed, int batch, int epochs,
                                          int patience) {
    PipelineConfig cfg;
    cfg.n_seeds = 10;
    cfg.master_seed = master_seed;
    cfg.parallel_fits = false; // outer loop parallelizes across master seeds
    cfg.train.batch_size = batch;
    cfg.train.max_epochs = epochs;
    cfg.train.early_stop_patience = patience;
    return cfg;
}

bool uninformative_consistency(std::string& detail) {
    SimConfig sim;
    sim.num_accident_periods = 6;
    sim.num_dev_periods = 2;
    sim.expected_claims_per_period = 3600;
    sim.reporting_delay_probs = {0.85, 0.1, 0.05};
    sim.severity_scale = 20.0;
    sim.severity_sigma = 0.8;
    sim.dev_factor_profile = {1.5, 1.2};
    sim.dev_noise_sigma = 0.15;
    sim.seed = 2001;
    Portfolio p = censor_to_valuation(simulate(sim));
    if (p.claims.size() < 20000) {
        detail = "portfolio too small: " + std::to_string(p.claims.size());
        return false;
    }

    auto start = Clock::now();
    std::array<PipelineResult, 10> results;
    parallel_for_index(10, [&](size_t s) {
        results[s] = run_pipeline(p, acceptance_pipeline_config(9000 + s, 512, 60, 15));
    });
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    int hits = 0;
    std::string ratios;
    for (const auto& res : results) {
        record_balance(res);
        double rel = std::abs(res.total_reserve - res.cl_benchmark.total_reserve) /
                     std::abs(res.cl_benchmark.total_reserve);
        if (rel < 0.10)
            ++hits;
        ratios += (ratios.empty() ? "" : " ") + csv::format_double(std::round(rel * 1000) / 10);
    }
    detail = std::to_string(p.claims.size()) + " claims, |FNN/CL-1|% per seed: " + ratios + "; " +
             std::to_string(hits) + "/10 within 10% in " + csv::format_double(seconds) + " s";
    return hits >= 9 && seconds < 300.0;
}

// ---- 8: signal exploitation on informative data ------------------------------

bool informative_signal(std::string& detail) {
    SimConfig sim;
    sim.num_accident_periods = 6;
    sim.num_dev_periods = 3;
    sim.expected_claims_per_period = 1400;
    sim.reporting_delay_probs = {0.8, 0.12, 0.05, 0.03};
    sim.severity_scale = 20.0;
    sim.severity_sigma = 0.8;
    sim.dev_factor_profile = {1.8, 1.5, 1.3};
    sim.dev_noise_sigma = 0.1;
    sim.status_effect = true;
    sim.open_at_report_prob = 0.65;
    sim.close_prob_base = 0.3;
    sim.close_prob_slope = 0.2;
    sim.seed = 2002;
    Portfolio square = informative_scenario(sim);
    Portfolio censored = censor_to_valuation(square);

    auto start = Clock::now();
    std::array<PipelineResult, 10> results;
    parallel_for_index(10, [&](size_t s) {
        results[s] = run_pipeline(censored, acceptance_pipeline_config(9100 + s, 256, 80, 20));
    });
    double seconds = std::chrono::duration<double>(Clock::now() - start).count();

    int hits = 0;
    double cl_rmse = 0.0;
    std::string rmses;
    for (const auto& res : results) {
        record_balance(res);
        EvaluationReport rep = evaluate(res, square);
        cl_rmse = rep.total.cl_ind_rmse;
        if (rep.total.fnn_ind_rmse < rep.total.cl_ind_rmse)
            ++hits;
        rmses += (rmses.empty() ? "" : " ") +
                 csv::format_double(std::round(rep.total.fnn_ind_rmse * 100) / 100);
    }
    detail = std::to_string(censored.claims.size()) + " claims, CL ind RMSE " +
             csv::format_double(std::round(cl_rmse * 100) / 100) + ", FNN per seed: " + rmses +
             "; " + std::to_string(hits) + "/10 better in " + csv::format_double(seconds) + " s";
    return hits >= 9 && seconds < 600.0;
}

// ---- 9: bias propagation probe ------------------------------------------------

bool bias_propagation(std::string& detail) {
    SimConfig sim;
    sim.num_accident_periods = 5;
    sim.num_dev_periods = 2;
    sim.expected_claims_per_period = 1300;
    sim.reporting_delay_probs = {0.85, 0.1, 0.05};
    sim.severity_scale = 20.0;
    sim.severity_sigma = 0.8;
    sim.dev_factor_profile = {1.6, 1.25};
    sim.dev_noise_sigma = 0.12;
    sim.status_effect = true;
    sim.open_at_report_prob = 0.6;
    sim.seed = 2003;
    Portfolio square = simulate(sim);

    std::array<double, 10> diffs{};
    std::array<std::array<PipelineResult, 2>, 10> results;
    parallel_for_index(10, [&](size_t s) {
        PipelineConfig cfg = acceptance_pipeline_config(9200 + s, 256, 60, 15);
        results[s][0] = run_pipeline(square, cfg);
        results[s][1] = run_pipeline_oracle_targets(square, cfg);
    });
    int hits = 0;
    std::string report;
    for (size_t s = 0; s < 10; ++s) {
        record_balance(results[s][0]);
        record_balance(results[s][1]);
        double rec = results[s][0].total_reserve;
        double ora = results[s][1].total_reserve;
        diffs[s] = std::abs(rec - ora) / std::max(std::abs(rec), std::abs(ora));
        if (diffs[s] < 0.05)
            ++hits;
        report += (report.empty() ? "" : " ") + csv::format_double(std::round(diffs[s] * 1000) / 10);
    }
    detail = "recursive vs oracle-target reserve gap % per seed: " + report + "; " +
             std::to_string(hits) + "/10 below 5%";
    return hits >= 8;
}

// ---- 4: balance identity (over every acceptance pipeline run) ----------------

bool balance_identity(std::string& detail) {
    if (g_balance_records.empty()) {
        detail = "no pipeline runs recorded";
        return false;
    }
    double worst = 0.0;
    for (const auto& rec : g_balance_records)
        worst = std::max(worst, rec.rel_gap());
    detail = std::to_string(g_balance_records.size()) + " recursion steps, worst rel gap " +
             csv::format_double(worst);
    return worst < 1e-10;
}

// ---- 10: determinism of CLI runs ----------------------------------------------

int run_command(const std::string& args, std::string* output = nullptr) {
    std::string cmd = std::string(CLRESERVE_BIN) + " " + args + " 2>&1";
    std::array<char, 4096> buf{};
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe)
        return -1;
    std::string out;
    while (fgets(buf.data(), buf.size(), pipe))
        out += buf.data();
    if (output)
        *output = out;
    int status = pclose(pipe);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool replay_matches(const fs::path& out_dir, const fs::path& replay_dir, std::string& detail) {
    nlohmann::json manifest;
    {
        std::ifstream in(out_dir / "manifest.json");
        if (!in) {
            detail = "missing manifest in " + out_dir.string();
            return false;
        }
        in >> manifest;
    }
    std::string args = manifest.at("subcommand").get<std::string>();
    for (const auto& a : manifest.at("args"))
        args += " " + a.get<std::string>();
    std::string log;
    if (run_command(args + " --out " + replay_dir.string(), &log) != 0) {
        detail = "replay failed: " + log;
        return false;
    }
    for (const auto& name : manifest.at("outputs")) {
        std::string file = name.get<std::string>();
        if (file.size() < 4 || file.substr(file.size() - 4) != ".csv")
            continue;
        if (slurp(out_dir / file) != slurp(replay_dir / file)) {
            detail = "byte mismatch in " + file + " for " +
                     manifest.at("subcommand").get<std::string>();
            return false;
        }
    }
    return true;
}

bool determinism(std::string& detail) {
    fs::path root = fs::temp_directory_path() / "clreserve_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);

    {
        std::ofstream sim(root / "sim.json");
        sim << R"({"num_accident_periods": 5, "num_dev_periods": 2,
                   "expected_claims_per_period": 250,
                   "reporting_delay_probs": [0.85, 0.1, 0.05],
                   "severity_scale": 20.0, "severity_sigma": 0.7,
                   "dev_factor_profile": [1.5, 1.2], "dev_noise_sigma": 0.12,
                   "seed": 33})";
    }
    {
        std::ofstream tri(root / "tri.csv");
        tri << "accident_period,dev_period,cumulative_payment\n"
               "1,0,100\n1,1,150\n1,2,180\n2,0,110\n2,1,160\n3,0,120\n";
    }
    {
        std::ofstream pipe(root / "pipe.json");
        pipe << R"({"n_seeds": 2, "master_seed": 4, "hidden": [8, 6],
                    "train": {"batch_size": 128, "max_epochs": 20, "early_stop_patience": 8}})";
    }

    struct Step {
        std::string name;
        std::string args;
    };
    std::vector<Step> steps{
        {"simulate", "simulate --config " + (root / "sim.json").string() + " --seed 33"},
        {"cl", "cl --triangle " + (root / "tri.csv").string()},
        {"rbns", "rbns --claims " + (root / "simulate" / "claims.csv").string()},
        {"individual", "individual --claims " + (root / "simulate" / "claims.csv").string() +
                           " --config " + (root / "pipe.json").string()},
        {"evaluate", "evaluate --claims " + (root / "simulate" / "claims.csv").string() +
                         " --predictions " + (root / "individual" / "predictions.csv").string()},
    };
    for (const auto& step : steps) {
        std::string log;
        if (run_command(step.args + " --out " + (root / step.name).string(), &log) != 0) {
            detail = step.name + " failed: " + log;
            return false;
        }
        if (!replay_matches(root / step.name, root / (step.name + "_replay"), detail))
            return false;
    }
    detail = "5 subcommands re-run from their manifests, all CSV outputs byte-identical";
    return true;
}

} // namespace

int main() {
    std::cerr << "running acceptance suite...\n";

    run_criterion(1, "grossing-up equivalence on 1000 random trapezoids", grossing_up_equivalence);
    run_criterion(2, "hand-worked 3x3 fixture", hand_worked_fixture);
    run_criterion(3, "RBNS degenerate-cohort equivalence", rbns_degenerate_equivalence);
    run_criterion(5, "analytic vs finite-difference gradients", gradient_check);
    run_criterion(6, "FNN parameter counts 606/646", parameter_counts);
    run_criterion(7, "pipeline consistency on uninformative data", uninformative_consistency);
    run_criterion(8, "signal exploitation on informative data", informative_signal);
    run_criterion(9, "bias propagation probe (recursive vs oracle targets)", bias_propagation);
    run_criterion(4, "balance identity across all pipeline runs", balance_identity);
    run_criterion(10, "CLI determinism via manifest replay", determinism);

    std::sort(g_results.begin(), g_results.end(),
              [](const Criterion& a, const Criterion& b) { return a.number < b.number; });

    int failed = 0;
    for (const auto& c : g_results) {
        std::printf("[%s] criterion %2d: %s — %s (%.1f s)\n", c.pass ? "PASS" : "FAIL", c.number,
                    c.name.c_str(), c.detail.c_str(), c.seconds);
        if (!c.pass)
            ++failed;
    }
    std::printf("%d/%zu acceptance criteria passed\n", static_cast<int>(g_results.size()) - failed,
                g_results.size());
    return failed == 0 ? 0 : 1;
}
