// clreserve: batch frontend for aggregate chain-ladder reserving, RBNS
// reported-claims reserving, the recursive individual-claims pipeline and
// the synthetic claims generator. Every command writes a manifest.json so
// runs can be replayed; outputs are byte-identical per (inputs, seed, build).

#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "clreserve/chain_ladder.hpp"
#include "clreserve/claims.hpp"
#include "clreserve/claims_csv.hpp"
#include "clreserve/csv.hpp"
#include "clreserve/errors.hpp"
#include "clreserve/mack.hpp"
#include "clreserve/pipeline.hpp"
#include "clreserve/rbns.hpp"
#include "clreserve/simulator.hpp"
#include "clreserve/svg.hpp"
#include "clreserve/triangle.hpp"
#include "clreserve/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace clreserve;

namespace {

std::string default_out_dir() {
    const char* env = std::getenv("CLRESERVE_OUT_DIR");
    return env && *env ? std::string(env) : std::string(".");
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw validation_error("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw validation_error("cannot parse JSON in " + path + ": " + e.what());
    }
    return j;
}

struct OutputSet {
    fs::path dir;
    std::vector<std::string> files;

    explicit OutputSet(const std::string& out_dir) : dir(out_dir) {
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec)
            throw validation_error("cannot create output directory " + out_dir + ": " + ec.message());
    }

    void write(const std::string& name, const std::string& content) {
        csv::write_file((dir / name).string(), content);
        files.push_back(name);
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

    // args exclude --out so a replay can redirect its outputs.
    void manifest(const std::string& subcommand, const std::vector<std::string>& args,
                  const json& extra = json::object()) {
        json m{{"tool", kToolName},
               {"version", kToolVersion},
               {"subcommand", subcommand},
               {"args", args},
               {"out_dir", dir.string()},
               {"outputs", files}};
        for (auto it = extra.begin(); it != extra.end(); ++it)
            m[it.key()] = it.value();
        write_json("manifest.json", m);
    }
};

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const std::string& config_path, uint64_t seed_override, bool has_seed,
                 const std::string& out_dir) {
    SimConfig cfg = SimConfig::from_json(load_json_file(config_path));
    if (has_seed)
        cfg.seed = seed_override;
    cfg.validate();
    Portfolio p = simulate(cfg);

    OutputSet out(out_dir);
    out.write("claims.csv",
              portfolio_to_csv(p, {"seed=" + std::to_string(cfg.seed)}));
    out.manifest("simulate",
                 {"--config", config_path, "--seed", std::to_string(cfg.seed)},
                 {{"config_echo", cfg.to_json()}, {"claims", p.claims.size()}});
    std::cout << "simulated " << p.claims.size() << " claims -> "
              << (out.dir / "claims.csv").string() << "\n";
    return 0;
}

// ---- cl ---------------------------------------------------------------------

int cmd_cl(const std::string& triangle_path, const std::string& method,
           const std::string& out_dir) {
    if (method != "forward" && method != "ptu")
        throw validation_error("unknown method '" + method + "' (use forward or ptu)");
    Triangle tri = load_triangle_csv(triangle_path);
    DevFactors f = estimate_cl_factors(tri);
    PtuResult ptu = estimate_ptu(tri);
    const std::vector<double>& ultimates =
        method == "ptu" ? ptu.ultimates : cl_forecast(tri, f);
    ReserveSummary reserves = cl_reserves(tri, ultimates);

    OutputSet out(out_dir);
    {
        std::string s = "dev_period,cl_factor,ptu_factor\n";
        json rows = json::array();
        for (int j = 0; j < f.count(); ++j) {
            s += std::to_string(j) + ',' + csv::format_double(f.at(j)) + ',' +
                 csv::format_double(ptu.factors.at(j)) + '\n';
            rows.push_back({{"dev_period", j},
                            {"cl_factor", f.at(j)},
                            {"ptu_factor", ptu.factors.at(j)}});
        }
        out.write("cl_factors.csv", s);
        out.write_json("cl_factors.json", rows);
    }
    {
        std::string s = "accident_period,ultimate,reserve\n";
        json rows = json::array();
        double ult_total = 0.0;
        for (int i = 1; i <= tri.num_accident_periods(); ++i) {
            double u = ultimates[static_cast<size_t>(i - 1)];
            double r = reserves.by_period[static_cast<size_t>(i - 1)];
            ult_total += u;
            s += std::to_string(i) + ',' + csv::format_double(u) + ',' + csv::format_double(r) +
                 '\n';
            rows.push_back({{"accident_period", i}, {"ultimate", u}, {"reserve", r}});
        }
        s += "total," + csv::format_double(ult_total) + ',' + csv::format_double(reserves.total) +
             '\n';
        out.write("cl_ultimates.csv", s);
        out.write_json("cl_ultimates.json",
                       {{"rows", rows}, {"total_reserve", reserves.total}});
    }
    try {
        MackEstimates mack = mack_uncertainty(tri);
        std::string s = "dev_period,sigma2\n";
        for (size_t j = 0; j < mack.sigma2.size(); ++j)
            s += std::to_string(j) + ',' + csv::format_double(mack.sigma2[j]) + '\n';
        out.write("mack_sigma2.csv", s);

        std::string m = "accident_period,msep,rmsep\n";
        json rows = json::array();
        for (int i = 1; i <= tri.num_accident_periods(); ++i) {
            double msep = mack.msep_by_period[static_cast<size_t>(i - 1)];
            m += std::to_string(i) + ',' + csv::format_double(msep) + ',' +
                 csv::format_double(std::sqrt(msep)) + '\n';
            rows.push_back({{"accident_period", i}, {"msep", msep}});
        }
        m += "total," + csv::format_double(mack.msep_total) + ',' +
             csv::format_double(mack.rmsep_total()) + '\n';
        out.write("mack_msep.csv", m);
        out.write_json("mack.json", {{"sigma2", mack.sigma2},
                                     {"rows", rows},
                                     {"msep_total", mack.msep_total},
                                     {"rmsep_total", mack.rmsep_total()}});
    } catch (const validation_error& e) {
        std::cerr << "warning: skipping Mack uncertainty: " << e.what() << "\n";
    }
    out.manifest("cl", {"--triangle", triangle_path, "--method", method});
    std::cout << "total reserve (" << method << "): " << csv::format_double(reserves.total)
              << "\n";
    return 0;
}

// ---- rbns -------------------------------------------------------------------

std::string rbns_claims_csv(const Portfolio& p, const RbnsResult& r) {
    std::string s = "claim_id,accident_period,prediction,paid_to_date,reserve\n";
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        double paid = c.payment(p.valuation_horizon(c));
        s += c.claim_id + ',' + std::to_string(c.accident_period) + ',' +
             csv::format_double(r.claim_ultimates[k]) + ',' + csv::format_double(paid) + ',' +
             csv::format_double(r.claim_ultimates[k] - paid) + '\n';
    }
    return s;
}

int cmd_rbns(const std::string& claims_path, const std::string& out_dir) {
    Portfolio p = load_portfolio_csv(claims_path);
    RbnsResult r = rbns_ptu(p);

    OutputSet out(out_dir);
    {
        std::string s = "dev_period,rbns_ptu_factor\n";
        for (size_t j = 0; j < r.factors.size(); ++j)
            s += std::to_string(j) + ',' + csv::format_double(r.factors[j]) + '\n';
        out.write("rbns_factors.csv", s);
        out.write_json("rbns_factors.json", r.factors);
    }
    out.write("rbns_claims.csv", rbns_claims_csv(p, r));
    {
        std::string s = "accident_period,reserve\n";
        for (size_t i = 0; i < r.reserve_by_period.size(); ++i)
            s += std::to_string(i + 1) + ',' + csv::format_double(r.reserve_by_period[i]) + '\n';
        s += "total," + csv::format_double(r.total_reserve) + '\n';
        out.write("rbns_reserves.csv", s);
        out.write_json("rbns_reserves.json", {{"by_period", r.reserve_by_period},
                                              {"total", r.total_reserve}});
    }
    out.manifest("rbns", {"--claims", claims_path});
    std::cout << "RBNS total reserve: " << csv::format_double(r.total_reserve) << "\n";
    return 0;
}

// ---- individual ---------------------------------------------------------------

void write_charts(OutputSet& out, const Portfolio& p, const PipelineResult& res) {
    const int I = p.num_accident_periods;
    const int J = p.num_dev_periods;

    // Reserves per accident period, split by claim status at valuation.
    svg::BarChart by_period;
    by_period.title = "Reserves by accident period and valuation status";
    by_period.series_labels = {"true OLL", "RBNS CL", "FNN"};
    by_period.group_labels.reserve(static_cast<size_t>(I) * 2);
    by_period.values.assign(static_cast<size_t>(I) * 2, {0.0, 0.0, 0.0});
    for (int i = 1; i <= I; ++i) {
        by_period.group_labels.push_back(std::to_string(i) + " closed");
        by_period.group_labels.push_back(std::to_string(i) + " open");
    }
    svg::BarChart by_month;
    by_month.title = "Reserves by accident month";
    by_month.series_labels = by_period.series_labels;
    for (int m = 1; m <= 12; ++m)
        by_month.group_labels.push_back(std::to_string(m));
    by_month.values.assign(12, {0.0, 0.0, 0.0});

    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        double paid = c.payment(p.valuation_horizon(c));
        double truth = c.payment(J) - paid;
        double cl = res.cl_benchmark.claim_ultimates[k] - paid;
        double fnn = res.claim_ultimates[k] - paid;
        size_t pg = static_cast<size_t>(c.accident_period - 1) * 2 +
                    (c.is_open(p.valuation_horizon(c)) ? 1 : 0);
        size_t mg = static_cast<size_t>(c.accident_month - 1);
        by_period.values[pg][0] += truth;
        by_period.values[pg][1] += cl;
        by_period.values[pg][2] += fnn;
        by_month.values[mg][0] += truth;
        by_month.values[mg][1] += cl;
        by_month.values[mg][2] += fnn;
    }
    out.write("reserves_by_period.svg", svg::render(by_period));
    out.write("reserves_by_month.svg", svg::render(by_month));
}

int cmd_individual(const std::string& claims_path, const std::string& config_path,
                   uint64_t seed_override, bool has_seed, bool oracle_targets, bool no_incurred,
                   const std::string& out_dir) {
    Portfolio p = load_portfolio_csv(claims_path);
    PipelineConfig cfg;
    if (!config_path.empty())
        cfg = PipelineConfig::from_json(load_json_file(config_path));
    else
        cfg.features.use_incurred = p.has_incurred();
    if (no_incurred)
        cfg.features.use_incurred = false;
    if (has_seed)
        cfg.master_seed = seed_override;
    cfg.validate();

    PipelineResult res = oracle_targets ? run_pipeline_oracle_targets(p, cfg)
                                        : run_pipeline(p, cfg);
    for (const auto& s : res.steps)
        if (s.degenerate_targets)
            std::cerr << "warning: degenerate cohort at lag " << s.lag
                      << " (all targets zero); predictor collapsed to zero\n";

    OutputSet out(out_dir);
    out.write("predictions.csv", predictions_to_csv(p, res));
    out.write("reserves.csv", reserves_to_csv(res));
    out.write("balance.csv", balance_to_csv(res));
    if (p.evaluation_square) {
        EvaluationReport rep = evaluate(res, p);
        out.write("evaluation.csv", evaluation_to_csv(rep));
        out.write_json("evaluation.json", evaluation_to_json(rep));
        write_charts(out, p, res);
    }

    std::vector<std::string> args{"--claims", claims_path};
    if (!config_path.empty()) {
        args.push_back("--config");
        args.push_back(config_path);
    }
    args.push_back("--seed");
    args.push_back(std::to_string(cfg.master_seed));
    if (oracle_targets)
        args.push_back("--oracle-targets");
    if (no_incurred)
        args.push_back("--no-incurred");
    out.manifest("individual", args, {{"config_echo", cfg.to_json()}});
    std::cout << "FNN total reserve: " << csv::format_double(res.total_reserve)
              << " (RBNS CL: " << csv::format_double(res.cl_benchmark.total_reserve) << ")\n";
    return 0;
}

// ---- evaluate -----------------------------------------------------------------

int cmd_evaluate(const std::string& claims_path, const std::string& predictions_path,
                 const std::string& out_dir) {
    Portfolio p = load_portfolio_csv(claims_path);
    if (!p.evaluation_square)
        throw validation_error("evaluation unavailable: claims file has no full square");

    csv::Table t = csv::read_file(predictions_path);
    csv::require_columns(t, {"claim_id", "accident_period", "prediction"}, predictions_path);
    std::map<std::string, double> by_id;
    for (size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        std::string ctx = predictions_path + " row " + std::to_string(r + 2);
        by_id[row[0]] = csv::parse_double(row[2], ctx);
    }

    PipelineResult res;
    res.cl_benchmark = rbns_ptu(p);
    res.claim_ultimates.assign(p.claims.size(), 0.0);
    res.reserve_by_period.assign(static_cast<size_t>(p.num_accident_periods), 0.0);
    for (size_t k = 0; k < p.claims.size(); ++k) {
        const auto& c = p.claims[k];
        auto it = by_id.find(c.claim_id);
        if (it == by_id.end())
            throw validation_error("predictions file has no row for claim " + c.claim_id);
        res.claim_ultimates[k] = it->second;
        double reserve = it->second - c.payment(p.valuation_horizon(c));
        res.reserve_by_period[static_cast<size_t>(c.accident_period - 1)] += reserve;
        res.total_reserve += reserve;
    }

    EvaluationReport rep = evaluate(res, p);
    OutputSet out(out_dir);
    out.write("evaluation.csv", evaluation_to_csv(rep));
    out.write_json("evaluation.json", evaluation_to_json(rep));
    out.manifest("evaluate", {"--claims", claims_path, "--predictions", predictions_path});
    std::cout << "FNN error: " << csv::format_double(rep.total.fnn_error)
              << " (CL error: " << csv::format_double(rep.total.cl_error) << ")\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chain-ladder and individual claims reserving toolkit"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();
    app.add_option("--out", out_dir, "Output directory (or CLRESERVE_OUT_DIR)")
        ->capture_default_str();

    // simulate
    auto* sim = app.add_subcommand("simulate", "Generate a synthetic claims portfolio");
    std::string sim_config;
    uint64_t seed = 0;
    sim->add_option("--config", sim_config, "Simulation config JSON")->required();
    auto* sim_seed = sim->add_option("--seed", seed, "Override the config seed");

    // cl
    auto* cl = app.add_subcommand("cl", "Aggregate chain-ladder on a triangle CSV");
    std::string triangle_path;
    std::string method = "forward";
    cl->add_option("--triangle", triangle_path, "Triangle CSV")->required();
    cl->add_option("--method", method, "Ultimate estimation path: forward or ptu")
        ->capture_default_str();

    // rbns
    auto* rbns = app.add_subcommand("rbns", "Reported-claims PtU reserving on a claims CSV");
    std::string claims_path;
    rbns->add_option("--claims", claims_path, "Claims CSV")->required();

    // individual
    auto* ind = app.add_subcommand("individual", "Recursive individual-claims pipeline");
    std::string ind_claims, ind_config;
    bool oracle_targets = false, no_incurred = false;
    ind->add_option("--claims", ind_claims, "Claims CSV")->required();
    ind->add_option("--config", ind_config, "Pipeline config JSON");
    auto* ind_seed = ind->add_option("--seed", seed, "Override the master seed");
    ind->add_flag("--oracle-targets", oracle_targets,
                  "Train on true ultimates instead of recursive estimates (square data only)");
    ind->add_flag("--no-incurred", no_incurred, "Drop incurred features");

    // evaluate
    auto* ev = app.add_subcommand("evaluate", "Score a predictions file against a known square");
    std::string ev_claims, ev_predictions;
    ev->add_option("--claims", ev_claims, "Claims CSV with full square")->required();
    ev->add_option("--predictions", ev_predictions, "Predictions CSV")->required();

    // Parent options (--out) may follow the subcommand.
    for (CLI::App* sub : {sim, cl, rbns, ind, ev})
        sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed())
            return cmd_simulate(sim_config, seed, !sim_seed->empty(), out_dir);
        if (cl->parsed())
            return cmd_cl(triangle_path, method, out_dir);
        if (rbns->parsed())
            return cmd_rbns(claims_path, out_dir);
        if (ind->parsed())
            return cmd_individual(ind_claims, ind_config, seed, !ind_seed->empty(),
                                  oracle_targets, no_incurred, out_dir);
        if (ev->parsed())
            return cmd_evaluate(ev_claims, ev_predictions, out_dir);
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const numeric_error& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
