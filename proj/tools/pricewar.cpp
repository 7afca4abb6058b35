#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "pricewar/config_io.hpp"
#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/lda.hpp"
#include "pricewar/metrics.hpp"
#include "pricewar/parallel.hpp"
#include "pricewar/pipeline.hpp"
#include "pricewar/simulator.hpp"
#include "pricewar/tournament.hpp"

namespace fs = std::filesystem;
using namespace pricewar;

namespace {

struct Common {
    std::optional<std::uint64_t> seed;
    int threads = default_threads();
    std::string config;
    std::string out = "out";
};

void add_common(CLI::App* cmd, Common& c, bool config_required) {
    cmd->add_option("--seed", c.seed, "Master seed (overrides the config file)");
    cmd->add_option("--threads", c.threads, "Worker threads (<= 0 for all cores)")->capture_default_str();
    auto* opt = cmd->add_option("--config", c.config, "JSON config file");
    if (config_required) opt->required();
    cmd->add_option("--out", c.out, "Output directory")->capture_default_str();
}

Json config_or_empty(const std::string& path) { return path.empty() ? Json::object() : load_json(path); }

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || item.key() == a;
        if (!ok) throw ConfigError("unknown key '" + item.key() + "' in " + what);
    }
}

void write_json(const fs::path& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << j.dump(2) << '\n';
}

// Output validation: every emitted table is read back and checked before exit 0.
void check_distribution_rows(const lda::PreferenceMatrix& pref) {
    for (int b1 = 0; b1 < pref.own_arity(); ++b1)
        for (int k = 0; k < pref.opp_arity(); ++k) {
            double s = 0.0;
            for (double v : pref.row(b1, k)) s += v;
            if (std::abs(s - 1.0) > 1e-9) throw std::runtime_error("emitted preference row does not sum to 1");
        }
}

void check_distribution_rows(const lda::StrategyDistribution& theta) {
    for (int d = 0; d < theta.num_docs(); ++d) {
        double s = 0.0;
        for (double v : theta.row(d)) s += v;
        if (std::abs(s - 1.0) > 1e-9) throw std::runtime_error("emitted strategy row does not sum to 1");
    }
}

void verify_header(const fs::path& path, const std::vector<std::string>& header) {
    if (read_csv(path).header != header) throw std::runtime_error("emitted file '" + path.string() + "' has a bad header");
}

// ---------------------------------------------------------------------------

struct SimulateConfig {
    MarketConfig market;
    PolicySettings policies;
    std::string policy1 = "random";
    std::string policy2 = "random";
};

SimulateConfig simulate_from_json(const Json& j) {
    check_keys(j, {"market", "policies", "policy1", "policy2"}, "simulate config");
    SimulateConfig c;
    if (j.contains("market")) c.market = market_from_json(j.at("market"));
    if (j.contains("policies")) c.policies = policy_settings_from_json(j.at("policies"));
    if (j.contains("policy1")) c.policy1 = j.at("policy1").get<std::string>();
    if (j.contains("policy2")) c.policy2 = j.at("policy2").get<std::string>();
    return c;
}

Json simulate_to_json(const SimulateConfig& c) {
    return Json{{"market", to_json(c.market)}, {"policies", to_json(c.policies)}, {"policy1", c.policy1},
                {"policy2", c.policy2}};
}

void cmd_simulate(const Common& common) {
    SimulateConfig c = simulate_from_json(load_json(common.config));
    if (common.seed) c.market.seed = *common.seed;
    c.market.validate();
    auto first = make_policy(c.policy1, c.policies, c.market, 0, c.market.seed, common.threads);
    auto second = make_policy(c.policy2, c.policies, c.market, 1, c.market.seed, common.threads);
    const GameResult game = run_game(c.market, *first, *second, SimOptions{common.threads});

    const fs::path out(common.out);
    fs::create_directories(out);
    write_records(out / "records_company1.csv", game.records[0]);
    write_records(out / "records_company2.csv", game.records[1]);
    write_trajectory(out / "trajectory.csv", game.trajectory);
    write_json(out / "config_used.json", simulate_to_json(c));
    write_json(out / "summary.json", Json{{"final_share", {game.final_share[0], game.final_share[1]}},
                                          {"coerced", {game.coerced[0], game.coerced[1]}},
                                          {"rounds", c.market.rounds}});

    for (const char* name : {"records_company1.csv", "records_company2.csv"}) read_records(out / name);
    verify_header(out / "trajectory.csv", {"round", "share1", "share2"});
    std::printf("final share %s / %s\n", format_double(game.final_share[0]).c_str(),
                format_double(game.final_share[1]).c_str());
}

// ---------------------------------------------------------------------------

struct InferArgs {
    std::string records;
    std::string assignments;
    int preference_group = -1;
    int demand_min = 1;
    int demand_max = 100;
};

void cmd_infer(const Common& common, const InferArgs& args) {
    const Json j = config_or_empty(common.config);
    lda::LdaConfig config = lda_from_json(j);
    if (common.seed) config.seed = *common.seed;
    config.validate();

    const auto records = read_records(args.records);
    if (records.empty()) throw DataError(args.records + ": no records");

    std::map<int, int> doc_of;  // customer id -> document
    std::vector<int> doc_ids;   // document -> id written to strategy.csv
    if (!args.assignments.empty()) {
        if (args.preference_group < 0) throw ConfigError("--assignments requires --preference-group");
        int groups = 0;
        for (const auto& a : pipeline::read_assignments(args.assignments))
            if (a.preference_group == args.preference_group) {
                doc_of[a.customer] = a.strategy_group;
                groups = std::max(groups, a.strategy_group + 1);
            }
        if (doc_of.empty()) throw DataError("no users assigned to preference group " + std::to_string(args.preference_group));
        for (int g = 0; g < groups; ++g) doc_ids.push_back(g);
    } else {
        for (const auto& r : records) doc_of.emplace(r.customer, 0);
        for (auto& [customer, doc] : doc_of) {
            doc = static_cast<int>(doc_ids.size());
            doc_ids.push_back(customer);
        }
    }
    for (const auto& r : records) {
        if (!doc_of.count(r.customer))
            throw DataError("customer " + std::to_string(r.customer) + " has no assignment");
        if (r.own_award >= config.own_arity)
            throw DataError("own award " + std::to_string(r.own_award) + " exceeds own_arity");
    }

    const auto demand = lda::DemandDistribution::uniform(args.demand_min, args.demand_max);
    Rng rng = make_stream(config.seed, {0x1a7});
    const auto lda_records = lda::to_lda_records(records, [&](int c) { return doc_of.at(c); }, config.acc, &demand, rng);
    const auto result = lda::run_inference(lda_records, static_cast<int>(doc_ids.size()), config, &demand, common.threads);

    const fs::path out(common.out);
    fs::create_directories(out);
    lda::write_preference(out / "preference.csv", result.estimates.pref);
    lda::write_strategy(out / "strategy.csv", result.estimates.theta, doc_ids);
    lda::write_diagnostics(out / "diagnostics.csv", result.diagnostics);
    write_json(out / "config_used.json", to_json(config));

    check_distribution_rows(lda::read_preference(out / "preference.csv"));
    check_distribution_rows(lda::read_strategy(out / "strategy.csv").first);
    verify_header(out / "diagnostics.csv", {"chain", "sweep", "log_joint"});
    std::printf("%zu records, %zu documents, %d chains\n", records.size(), doc_ids.size(), config.chains);
}

// ---------------------------------------------------------------------------

struct PreprocessArgs {
    std::string input;
    std::int64_t merchant = 0;
    int preference_groups = 4;
    int strategy_groups = 10;
    std::optional<std::string> split_date;
};

void cmd_preprocess(const Common& common, PreprocessArgs args) {
    pipeline::PipelineConfig config;
    if (!common.config.empty()) {
        const Json j = load_json(common.config);
        check_keys(j, {"preference_groups", "strategy_groups", "seed", "split_date", "kmeans_iterations"},
                   "preprocess config");
        config.preference_groups = j.value("preference_groups", config.preference_groups);
        config.strategy_groups = j.value("strategy_groups", config.strategy_groups);
        config.seed = j.value("seed", config.seed);
        config.kmeans_iterations = j.value("kmeans_iterations", config.kmeans_iterations);
        if (j.contains("split_date") && !args.split_date) args.split_date = j.at("split_date").get<std::string>();
    }
    config.focal_merchant = args.merchant;
    if (args.preference_groups > 0) config.preference_groups = args.preference_groups;
    if (args.strategy_groups > 0) config.strategy_groups = args.strategy_groups;
    if (common.seed) config.seed = *common.seed;
    if (args.split_date) {
        config.split_date = pipeline::parse_date(*args.split_date);
        if (!config.split_date) throw ConfigError("split date must be yyyymmdd");
    }

    const auto log = pipeline::read_coupon_log(args.input);
    const auto result = pipeline::preprocess(log, config);
    const fs::path out(common.out);
    pipeline::write_outputs(out, result, config.split_date.has_value());

    for (const auto& w : result.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::size_t users = 0;
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        const auto recs = read_records(out / ("records_pg" + std::to_string(g) + ".csv"));
        for (const auto& r : recs)
            if (!r.demand || r.count > *r.demand) throw std::runtime_error("emitted record violates count <= demand");
    }
    users = pipeline::read_assignments(out / "assignments.csv").size();
    std::printf("%zu focal users in %d preference groups, %zu users excluded, %zu rows quarantined\n", users,
                config.preference_groups, result.excluded_users, result.quarantine.size());
}

// ---------------------------------------------------------------------------

void cmd_tournament(const Common& common) {
    TournamentConfig config = tournament_from_json(load_json(common.config));
    if (common.seed)
        for (std::size_t i = 0; i < config.seeds.size(); ++i) config.seeds[i] = *common.seed + i;
    const auto results = run_tournament(config, common.threads);
    const fs::path out(common.out);
    write_tournament(out, config, results);
    write_json(out / "config_used.json", to_json(config));
    verify_header(out / "tournament.csv",
                  {"row_policy", "col_policy", "mean_share", "stderr", "seeds", "coerced_row", "coerced_col"});
    for (const auto& r : results)
        std::printf("%-8s vs %-8s  %.4f +- %.4f\n", r.row.c_str(), r.col.c_str(), r.mean, r.stderr_);
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
    std::string preference;
    std::string strategy;
    std::string test;
    std::string assignments;
    std::string exposure;
    int preference_group = -1;
    int demand_min = 1;
    int demand_max = 100;
};

void cmd_evaluate(const Common& common, const EvaluateArgs& args) {
    const auto pref = lda::read_preference(args.preference);
    const auto [theta, ids] = lda::read_strategy(args.strategy);
    std::map<int, int> row_of_id;
    for (std::size_t i = 0; i < ids.size(); ++i) row_of_id[ids[i]] = static_cast<int>(i);

    const fs::path out(common.out);
    fs::create_directories(out);

    if (!args.test.empty()) {
        std::map<int, int> doc_of;
        if (!args.assignments.empty()) {
            if (args.preference_group < 0) throw ConfigError("--assignments requires --preference-group");
            for (const auto& a : pipeline::read_assignments(args.assignments))
                if (a.preference_group == args.preference_group) doc_of[a.customer] = a.strategy_group;
        }
        const auto records = read_records(args.test);
        if (records.empty()) throw DataError(args.test + ": no test records");
        const auto demand = lda::DemandDistribution::uniform(args.demand_min, args.demand_max);
        Rng rng = make_stream(common.seed.value_or(1), {0xe7a1});
        const auto lda_records = lda::to_lda_records(
            records,
            [&](int customer) {
                const int id = args.assignments.empty() ? customer : doc_of.count(customer) ? doc_of.at(customer) : -1;
                const auto it = row_of_id.find(id);
                if (it == row_of_id.end()) throw DataError("no strategy estimate for customer " + std::to_string(customer));
                return it->second;
            },
            pref.acc(), &demand, rng);
        const std::vector<NllRow> rows{{"lda", lda_nll(pref, theta, lda_records)},
                                       {"uniform", uniform_nll(pref.acc(), lda_records)}};
        write_nll_report(out / "nll_report.csv", rows);
        verify_header(out / "nll_report.csv", {"predictor", "samples", "nll", "floored"});
        for (const auto& r : rows)
            std::printf("nll %-8s %s\n", r.predictor.c_str(), format_double(r.result.nll).c_str());
    }

    if (!args.exposure.empty()) {
        if (args.preference_group < 0) throw ConfigError("--exposure requires --preference-group");
        const auto exposure = pipeline::read_exposure(args.exposure, args.preference_group);
        if (theta.opp_arity() != pipeline::kLevels)
            throw DataError("strategy estimates must cover " + std::to_string(pipeline::kLevels) + " coupon levels");
        std::vector<int> groups;
        std::vector<double> weights;
        for (std::size_t s = 0; s < exposure.size(); ++s) {
            double total = 0;
            for (auto v : exposure[s]) total += static_cast<double>(v);
            if (total > 0 && row_of_id.count(static_cast<int>(s))) {
                groups.push_back(static_cast<int>(s));
                weights.push_back(total);
            }
        }
        if (groups.empty()) throw DataError("no strategy group has opponent exposure");
        lda::StrategyDistribution truth(static_cast<int>(groups.size()), pipeline::kLevels);
        lda::StrategyDistribution est(static_cast<int>(groups.size()), pipeline::kLevels);
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (int l = 0; l < pipeline::kLevels; ++l) {
                truth.at(static_cast<int>(i), l) = static_cast<double>(exposure[groups[i]][l]) / weights[i];
                est.at(static_cast<int>(i), l) = theta.at(row_of_id.at(groups[i]), l);
            }
        }
        const auto report = strategy_distance_report(est, truth, groups, weights);
        write_w1_report(out / "w1_report.csv", report);
        verify_header(out / "w1_report.csv", {"group", "lda", "uniform", "overall"});
        std::printf("w1 lda %s uniform %s overall %s\n", format_double(report.mean.lda).c_str(),
                    format_double(report.mean.uniform).c_str(), format_double(report.mean.overall).c_str());
    }
    if (args.test.empty() && args.exposure.empty()) throw ConfigError("evaluate needs --test and/or --exposure");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Price-war market simulator, preference/strategy inference and award policies"};
    app.require_subcommand(1);

    Common common;
    const std::string market_defaults = to_json(MarketConfig{}).dump(2);
    const std::string policy_defaults = to_json(PolicySettings{}).dump(2);

    auto* sim = app.add_subcommand("simulate", "Play one game and write both companies' records");
    add_common(sim, common, true);
    sim->footer("Config keys (defaults):\n{\"market\": " + market_defaults + ",\n \"policies\": " + policy_defaults +
                ",\n \"policy1\": \"random\", \"policy2\": \"random\"}");

    InferArgs infer_args;
    auto* infer = app.add_subcommand("infer", "Estimate preference and strategy distributions from records");
    add_common(infer, common, false);
    infer->add_option("--records", infer_args.records, "Record CSV")->required()->check(CLI::ExistingFile);
    infer->add_option("--assignments", infer_args.assignments, "assignments.csv: estimate per strategy group")
        ->check(CLI::ExistingFile);
    infer->add_option("--preference-group", infer_args.preference_group, "Preference group of the record file");
    infer->add_option("--demand-min", infer_args.demand_min, "Lower end of demand imputation")->capture_default_str();
    infer->add_option("--demand-max", infer_args.demand_max, "Upper end of demand imputation")->capture_default_str();
    infer->footer("Config keys (defaults):\n" + to_json(lda::LdaConfig{}).dump(2));

    PreprocessArgs pre_args;
    auto* pre = app.add_subcommand("preprocess", "Cluster an offline coupon log and emit records");
    add_common(pre, common, false);
    pre->add_option("--input", pre_args.input, "Raw coupon CSV")->required()->check(CLI::ExistingFile);
    pre->add_option("--merchant", pre_args.merchant, "Focal merchant id")->required();
    pre->add_option("--preference-groups", pre_args.preference_groups, "Stage-one cluster count");
    pre->add_option("--strategy-groups", pre_args.strategy_groups, "Stage-two cluster count per group");
    pre->add_option("--split-date", pre_args.split_date, "yyyymmdd; later rows go to the test split");
    pre->footer(
        "Config keys (defaults):\n{\"preference_groups\": 4, \"strategy_groups\": 10, \"seed\": 1, "
        "\"kmeans_iterations\": 100, \"split_date\": null}");
    pre_args.preference_groups = 0;
    pre_args.strategy_groups = 0;

    auto* tour = app.add_subcommand("tournament", "Play a matrix of policy pairings over several seeds");
    add_common(tour, common, true);
    tour->footer("Config keys (defaults):\n{\"market\": " + market_defaults + ",\n \"policies\": " + policy_defaults +
                 ",\n \"cells\": [[\"random\", \"random\"]], \"seeds\": [1, ..., 10]}\n"
                 "--seed S replaces the seed list with S, S+1, ...");

    EvaluateArgs eval_args;
    auto* eval = app.add_subcommand("evaluate", "NLL and strategy-distance reports for inferred estimates");
    add_common(eval, common, false);
    eval->add_option("--preference", eval_args.preference, "preference.csv")->required()->check(CLI::ExistingFile);
    eval->add_option("--strategy", eval_args.strategy, "strategy.csv")->required()->check(CLI::ExistingFile);
    eval->add_option("--test", eval_args.test, "Held-out record CSV")->check(CLI::ExistingFile);
    eval->add_option("--assignments", eval_args.assignments, "assignments.csv")->check(CLI::ExistingFile);
    eval->add_option("--exposure", eval_args.exposure, "exposure.csv")->check(CLI::ExistingFile);
    eval->add_option("--preference-group", eval_args.preference_group, "Preference group evaluated");
    eval->add_option("--demand-min", eval_args.demand_min, "Lower end of demand imputation")->capture_default_str();
    eval->add_option("--demand-max", eval_args.demand_max, "Upper end of demand imputation")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) cmd_simulate(common);
        else if (*infer) cmd_infer(common, infer_args);
        else if (*pre) cmd_preprocess(common, pre_args);
        else if (*tour) cmd_tournament(common);
        else if (*eval) cmd_evaluate(common, eval_args);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 3;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 4;
    }
    return 0;
}
