#include <catch2/catch.hpp>

#include <filesystem>
#include <map>

#include "clreserve/chain_ladder.hpp"
#include "clreserve/claims_csv.hpp"
#include "clreserve/rbns.hpp"
#include "clreserve/simulator.hpp"
#include "helpers.hpp"

using namespace clreserve;
using testutil::rel_diff;

namespace {

SimConfig base_config() {
    SimConfig cfg;
    cfg.num_accident_periods = 5;
    cfg.num_dev_periods = 2;
    cfg.expected_claims_per_period = 400;
    cfg.reporting_delay_probs = {0.8, 0.15, 0.05};
    cfg.severity_scale = 50.0;
    cfg.severity_sigma = 0.8;
    cfg.dev_factor_profile = {1.6, 1.25};
    cfg.dev_noise_sigma = 0.1;
    cfg.seed = 11;
    return cfg;
}

} // namespace

TEST_CASE("config validation") {
    SimConfig cfg = base_config();
    cfg.reporting_delay_probs = {0.5, 0.4}; // sums to 0.9
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = base_config();
    cfg.dev_factor_profile = {1.5};
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = base_config();
    cfg.num_accident_periods = 2;
    CHECK_THROWS_AS(cfg.validate(), validation_error);
    cfg = base_config();
    cfg.dev_factor_profile = {1.5, -0.2};
    CHECK_THROWS_AS(cfg.validate(), validation_error);
}

TEST_CASE("same seed reproduces the portfolio exactly") {
    SimConfig cfg = base_config();
    Portfolio a = simulate(cfg);
    Portfolio b = simulate(cfg);
    CHECK(portfolio_to_csv(a) == portfolio_to_csv(b));
    cfg.seed = 12;
    Portfolio c = simulate(cfg);
    CHECK(portfolio_to_csv(a) != portfolio_to_csv(c));
}

TEST_CASE("empirical factors converge to the configured profile") {
    SimConfig cfg = base_config();
    cfg.num_accident_periods = 4;
    cfg.expected_claims_per_period = 12500; // 50k claims in total
    cfg.reporting_delay_probs = {1.0};
    cfg.dev_noise_sigma = 0.1;
    cfg.seed = 21;
    Portfolio p = simulate(cfg);
    size_t total = p.claims.size();
    CHECK(total > 40000);
    DevFactors f = estimate_cl_factors(aggregate(censor_to_valuation(p)));
    for (int j = 0; j < 2; ++j) {
        INFO("lag " << j);
        CHECK(rel_diff(f.at(j), cfg.dev_factor_profile[j]) < 0.01);
    }
}

TEST_CASE("zero development noise reproduces the profile exactly") {
    SimConfig cfg = base_config();
    cfg.dev_noise_sigma = 0.0;
    cfg.reporting_delay_probs = {1.0};
    Portfolio p = simulate(cfg);
    DevFactors f = estimate_cl_factors(aggregate(censor_to_valuation(p)));
    for (int j = 0; j < 2; ++j)
        CHECK(rel_diff(f.at(j), cfg.dev_factor_profile[j]) < 1e-12);
}

TEST_CASE("point-mass delay at zero puts every claim in every cohort") {
    SimConfig cfg = base_config();
    cfg.reporting_delay_probs = {1.0};
    Portfolio p = simulate(cfg);
    for (const auto& c : p.claims)
        CHECK(c.reporting_delay_periods == 0);
    Portfolio censored = censor_to_valuation(p);
    RbnsResult rbns = rbns_ptu(censored);
    PtuResult agg = estimate_ptu(aggregate(censored));
    for (size_t j = 0; j < rbns.factors.size(); ++j)
        CHECK(rel_diff(rbns.factors[j], agg.factors.values[j]) < 1e-12);
}

TEST_CASE("generated squares pass loader validation with masking") {
    namespace fs = std::filesystem;
    SimConfig cfg = base_config();
    cfg.with_incurred = true;
    Portfolio p = simulate(cfg);
    p.validate();

    fs::path path = fs::temp_directory_path() / "clreserve_test_sim.csv";
    save_portfolio_csv(p, path.string(), {"seed=" + std::to_string(cfg.seed)});
    Portfolio loaded = load_portfolio_csv(path.string());
    CHECK(loaded.evaluation_square);
    CHECK(loaded.claims.size() == p.claims.size());

    Portfolio censored = censor_to_valuation(loaded);
    save_portfolio_csv(censored, path.string());
    Portfolio loaded2 = load_portfolio_csv(path.string());
    CHECK_FALSE(loaded2.evaluation_square);
    loaded2.validate();
    fs::remove(path);
}

TEST_CASE("informative scenario needs the status effect") {
    SimConfig cfg = base_config();
    CHECK_THROWS_AS(informative_scenario(cfg), validation_error);
    cfg.status_effect = true;
    cfg.dev_factor_profile = {1.0, 1.0};
    CHECK_THROWS_AS(informative_scenario(cfg), validation_error);
    cfg.dev_factor_profile = {1.8, 1.4};
    Portfolio p = informative_scenario(cfg);
    CHECK(p.claims.size() > 100);
}

TEST_CASE("status effect keeps closed claims flat") {
    SimConfig cfg = base_config();
    cfg.status_effect = true;
    cfg.reopen_prob = 0.0;
    Portfolio p = simulate(cfg);
    int checked = 0;
    for (const auto& c : p.claims) {
        for (int l = c.reporting_delay_periods; l < 2; ++l) {
            if (!c.is_open(l)) {
                CHECK(c.payment(l + 1) == c.payment(l));
                ++checked;
            }
        }
    }
    CHECK(checked > 50);
}

TEST_CASE("conditional mean oracle matches Monte Carlo grouping") {
    SimConfig cfg = base_config();
    cfg.num_accident_periods = 4;
    cfg.num_dev_periods = 3;
    cfg.dev_factor_profile = {1.9, 1.4, 1.2};
    cfg.status_effect = true;
    cfg.expected_claims_per_period = 8000;
    cfg.dev_noise_sigma = 0.15;
    cfg.reporting_delay_probs = {1.0};
    cfg.seed = 99;
    Portfolio p = simulate(cfg);

    for (int lag : {0, 1}) {
        for (bool open : {false, true}) {
            double sum_ratio = 0.0;
            size_t n = 0;
            for (const auto& c : p.claims) {
                if (c.is_open(lag) != open)
                    continue;
                sum_ratio += c.payment(3) / c.payment(lag);
                ++n;
            }
            REQUIRE(n > 500);
            double expect = conditional_mean_ultimate_factor(cfg, lag, open);
            INFO("lag " << lag << " open " << open << " n " << n);
            CHECK(rel_diff(sum_ratio / static_cast<double>(n), expect) < 0.05);
        }
    }
}

TEST_CASE("status effect off reduces the oracle to the plain profile") {
    SimConfig cfg = base_config();
    double expect = cfg.dev_factor_profile[0] * cfg.dev_factor_profile[1];
    CHECK(rel_diff(conditional_mean_ultimate_factor(cfg, 0, true), expect) < 1e-12);
    CHECK(rel_diff(conditional_mean_ultimate_factor(cfg, 0, false), expect) < 1e-12);
}

TEST_CASE("incurred sequences surround the true ultimate") {
    SimConfig cfg = base_config();
    cfg.with_incurred = true;
    cfg.incurred_noise = false;
    Portfolio exact = simulate(cfg);
    for (const auto& c : exact.claims)
        for (int l = c.reporting_delay_periods; l <= 2; ++l)
            CHECK(c.incurred_at(l) == Approx(c.payment(2)));

    cfg.incurred_noise = true;
    Portfolio noisy = simulate(cfg);
    for (const auto& c : noisy.claims)
        CHECK(c.incurred_at(2) == Approx(c.payment(2))); // exact at the final lag
}

TEST_CASE("delay distribution thins recent accident periods") {
    SimConfig cfg = base_config();
    cfg.reporting_delay_probs = {0.5, 0.3, 0.2};
    Portfolio p = simulate(cfg);
    std::map<int, std::map<int, size_t>> count; // period -> delay -> n
    for (const auto& c : p.claims) {
        CHECK(c.accident_period + c.reporting_delay_periods <= 5);
        ++count[c.accident_period][c.reporting_delay_periods];
    }
    // The most recent period can only contain immediately reported claims.
    CHECK(count[5].size() == 1);
    CHECK(count[5].count(0) == 1);
    // Older periods carry every delay.
    CHECK(count[1].size() == 3);
}
