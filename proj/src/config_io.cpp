#include "pricewar/config_io.hpp"

#include <fstream>
#include <set>

#include "pricewar/error.hpp"

namespace pricewar {
namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const char* what) {
    if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
    const std::set<std::string> keys(allowed.begin(), allowed.end());
    for (const auto& item : j.items())
        if (!keys.count(item.key()))
            throw ConfigError(std::string("unknown key '") + item.key() + "' in " + what);
}

template <class T>
void read(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
    }
}

AwardSet award_set_from_json(const Json& j) {
    if (j.is_number_integer()) return AwardSet::identity(j.get<int>());
    reject_unknown(j, {"costs", "values"}, "award set");
    std::vector<double> costs, values;
    read(j, "costs", costs);
    read(j, "values", values);
    if (values.empty()) values = costs;
    return AwardSet(costs, values);
}

Json award_set_to_json(const AwardSet& a) { return Json{{"costs", a.costs()}, {"values", a.values()}}; }

}  // namespace

Json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("cannot parse config '" + path.string() + "': " + e.what());
    }
}

MarketConfig market_from_json(const Json& j) {
    reject_unknown(j,
                   {"num_customer_groups", "customers_per_group", "rounds", "budgets", "budget_mode",
                    "awards", "demand_min", "demand_max", "demand_mode", "updating_rate",
                    "initial_sigma", "seed"},
                   "market config");
    MarketConfig c;
    read(j, "num_customer_groups", c.num_customer_groups);
    read(j, "customers_per_group", c.customers_per_group);
    read(j, "rounds", c.rounds);
    if (j.contains("budgets")) {
        const auto b = j.at("budgets").get<std::vector<double>>();
        if (b.size() != 2) throw ConfigError("budgets must list exactly two companies");
        c.budgets = {b[0], b[1]};
    }
    if (j.contains("budget_mode")) c.budget_mode = parse_budget_mode(j.at("budget_mode").get<std::string>());
    if (j.contains("awards")) {
        const auto& a = j.at("awards");
        if (!a.is_array() || a.size() != 2) throw ConfigError("awards must list exactly two award sets");
        c.awards = {award_set_from_json(a[0]), award_set_from_json(a[1])};
    }
    read(j, "demand_min", c.demand_min);
    read(j, "demand_max", c.demand_max);
    if (j.contains("demand_mode")) c.demand_mode = parse_demand_mode(j.at("demand_mode").get<std::string>());
    read(j, "updating_rate", c.updating_rate);
    read(j, "initial_sigma", c.initial_sigma);
    read(j, "seed", c.seed);
    c.validate();
    return c;
}

Json to_json(const MarketConfig& c) {
    return Json{{"num_customer_groups", c.num_customer_groups},
                {"customers_per_group", c.customers_per_group},
                {"rounds", c.rounds},
                {"budgets", {c.budgets[0], c.budgets[1]}},
                {"budget_mode", to_string(c.budget_mode)},
                {"awards", {award_set_to_json(c.awards[0]), award_set_to_json(c.awards[1])}},
                {"demand_min", c.demand_min},
                {"demand_max", c.demand_max},
                {"demand_mode", to_string(c.demand_mode)},
                {"updating_rate", c.updating_rate},
                {"initial_sigma", c.initial_sigma},
                {"seed", c.seed}};
}

lda::LdaConfig lda_from_json(const Json& j, lda::LdaConfig c) {
    reject_unknown(j,
                   {"acc", "own_arity", "opp_arity", "alpha", "beta", "sweeps", "burn_in", "thin",
                    "chains", "seed", "reimpute_each_sweep"},
                   "lda config");
    read(j, "acc", c.acc);
    read(j, "own_arity", c.own_arity);
    read(j, "opp_arity", c.opp_arity);
    read(j, "alpha", c.alpha);
    read(j, "beta", c.beta);
    read(j, "sweeps", c.sweeps);
    read(j, "burn_in", c.burn_in);
    read(j, "thin", c.thin);
    read(j, "chains", c.chains);
    read(j, "seed", c.seed);
    read(j, "reimpute_each_sweep", c.reimpute_each_sweep);
    c.validate();
    return c;
}

Json to_json(const lda::LdaConfig& c) {
    return Json{{"acc", c.acc},       {"own_arity", c.own_arity}, {"opp_arity", c.opp_arity},
                {"alpha", c.alpha},   {"beta", c.beta},           {"sweeps", c.sweeps},
                {"burn_in", c.burn_in}, {"thin", c.thin},         {"chains", c.chains},
                {"seed", c.seed},     {"reimpute_each_sweep", c.reimpute_each_sweep}};
}

PolicySettings policy_settings_from_json(const Json& j) {
    reject_unknown(j, {"features", "q", "dqn", "dp"}, "policy settings");
    PolicySettings s;
    if (j.contains("features")) {
        const auto& f = j.at("features");
        reject_unknown(f, {"lda", "window", "refresh_interval"}, "features");
        if (f.contains("lda")) {
            auto lda = s.features.lda;
            // Arity comes from the market; only sampler settings are read here.
            s.features.lda = lda_from_json(f.at("lda"), lda);
        }
        read(f, "window", s.features.window);
        read(f, "refresh_interval", s.features.refresh_interval);
    }
    if (j.contains("q")) {
        const auto& q = j.at("q");
        reject_unknown(q,
                       {"learning_rate", "discount", "replay_capacity", "batch_size", "hidden_width",
                        "reward_weight", "reward_scale", "epsilon_start", "epsilon_end",
                        "epsilon_decay_fraction", "target_sync_interval", "optimizer"},
                       "q config");
        read(q, "learning_rate", s.q.learning_rate);
        read(q, "discount", s.q.discount);
        read(q, "replay_capacity", s.q.replay_capacity);
        read(q, "batch_size", s.q.batch_size);
        read(q, "hidden_width", s.q.hidden_width);
        read(q, "reward_weight", s.q.reward_weight);
        read(q, "reward_scale", s.q.reward_scale);
        read(q, "epsilon_start", s.q.epsilon_start);
        read(q, "epsilon_end", s.q.epsilon_end);
        read(q, "epsilon_decay_fraction", s.q.epsilon_decay_fraction);
        read(q, "target_sync_interval", s.q.target_sync_interval);
        if (q.contains("optimizer")) {
            const auto name = q.at("optimizer").get<std::string>();
            if (name == "adam") s.q.optimizer = Optimizer::Adam;
            else if (name == "sgd") s.q.optimizer = Optimizer::Sgd;
            else throw ConfigError("unknown optimizer '" + name + "'");
        }
        s.q.validate();
    }
    if (j.contains("dqn")) {
        const auto& d = j.at("dqn");
        reject_unknown(d, {"history_window", "train_batches_per_round"}, "dqn config");
        read(d, "history_window", s.dqn.history_window);
        read(d, "train_batches_per_round", s.dqn.train_batches_per_round);
    }
    if (j.contains("dp")) {
        const auto& d = j.at("dp");
        reject_unknown(d, {"cost_scale"}, "dp config");
        read(d, "cost_scale", s.dp.cost_scale);
    }
    return s;
}

Json to_json(const PolicySettings& s) {
    Json lda = to_json(s.features.lda);
    lda.erase("own_arity");
    lda.erase("opp_arity");
    return Json{
        {"features", {{"lda", lda}, {"window", s.features.window}, {"refresh_interval", s.features.refresh_interval}}},
        {"q",
         {{"learning_rate", s.q.learning_rate},
          {"discount", s.q.discount},
          {"replay_capacity", s.q.replay_capacity},
          {"batch_size", s.q.batch_size},
          {"hidden_width", s.q.hidden_width},
          {"reward_weight", s.q.reward_weight},
          {"reward_scale", s.q.reward_scale},
          {"epsilon_start", s.q.epsilon_start},
          {"epsilon_end", s.q.epsilon_end},
          {"epsilon_decay_fraction", s.q.epsilon_decay_fraction},
          {"target_sync_interval", s.q.target_sync_interval},
          {"optimizer", s.q.optimizer == Optimizer::Adam ? "adam" : "sgd"}}},
        {"dqn", {{"history_window", s.dqn.history_window}, {"train_batches_per_round", s.dqn.train_batches_per_round}}},
        {"dp", {{"cost_scale", s.dp.cost_scale}}}};
}

}  // namespace pricewar
