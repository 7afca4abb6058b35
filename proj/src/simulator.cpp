#include "pricewar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/parallel.hpp"

namespace pricewar {
namespace {

// Stream tags keep the per-customer generators of different purposes apart.
constexpr std::uint64_t kTagConsumption = 1;
constexpr std::uint64_t kTagFixedDemand = 2;
constexpr std::uint64_t kTagPolicy = 3;

double logistic(double d) { return 1.0 / (1.0 + std::exp(-d)); }

// Tolerance for comparing float budgets against award costs.
constexpr double kBudgetSlack = 1e-9;

}  // namespace

double sigmoid_preference(double d, double sigma) {
    if (d < 0.0) return sigma / 0.5 * (logistic(d) - 0.5) + sigma;
    if (d > 0.0) return (1.0 - sigma) / 0.5 * (logistic(d) - 0.5) + sigma;
    return sigma;
}

double update_sigma(double sigma, double usage_rate, double gamma) {
    return (usage_rate - sigma) * gamma + sigma;
}

MarketState MarketState::initial(const MarketConfig& config) {
    config.validate();
    MarketState state;
    state.remaining_budget = config.budgets;
    const int m = config.num_customers();
    state.customers.resize(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) {
        auto& c = state.customers[static_cast<std::size_t>(j)];
        c.sigma = config.initial_sigma;
        c.group = config.group_of(j);
        Rng rng = make_stream(config.seed, {kTagFixedDemand, static_cast<std::uint64_t>(j)});
        c.fixed_demand = std::uniform_int_distribution<int>(config.demand_min, config.demand_max)(rng);
    }
    return state;
}

RoundOutcome run_round(const MarketConfig& config, MarketState& state, AwardPolicy& first,
                       AwardPolicy& second, const SimOptions& options) {
    const int m = config.num_customers();
    const int t = state.rounds_played + 1;
    if (config.budget_mode == BudgetMode::PerRound) state.remaining_budget = config.budgets;

    std::vector<int> groups(static_cast<std::size_t>(m));
    for (int j = 0; j < m; ++j) groups[static_cast<std::size_t>(j)] = state.customers[static_cast<std::size_t>(j)].group;

    std::array<AwardPolicy*, 2> policies{&first, &second};
    std::array<std::vector<int>, 2> chosen;
    for (int i = 0; i < 2; ++i) {
        RoundContext ctx;
        ctx.round = t;
        ctx.company = i;
        ctx.num_customers = m;
        ctx.customer_group = groups;
        ctx.awards = &config.awards[static_cast<std::size_t>(i)];
        ctx.budget_available = state.remaining_budget[static_cast<std::size_t>(i)];
        Rng rng = make_stream(config.seed, {kTagPolicy, static_cast<std::uint64_t>(i),
                                            static_cast<std::uint64_t>(t)});
        chosen[static_cast<std::size_t>(i)] = policies[static_cast<std::size_t>(i)]->choose_awards(ctx, rng);
        if (chosen[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(m))
            throw StateError("policy '" + policies[static_cast<std::size_t>(i)]->name() +
                             "' returned the wrong number of awards");
    }

    RoundOutcome out;
    out.round = t;
    out.award1.resize(static_cast<std::size_t>(m));
    out.award2.resize(static_cast<std::size_t>(m));
    out.demand.resize(static_cast<std::size_t>(m));
    out.captured1.resize(static_cast<std::size_t>(m));

    // Budgets are charged customer by customer, company 1 before company 2.
    for (std::size_t j = 0; j < static_cast<std::size_t>(m); ++j) {
        for (std::size_t i = 0; i < 2; ++i) {
            const AwardSet& awards = config.awards[i];
            int award = chosen[i][j];
            if (award < 0 || award >= awards.size())
                throw StateError("policy returned award index out of range");
            if (awards.cost(award) > state.remaining_budget[i] + kBudgetSlack) {
                award = 0;
                ++out.coerced[i];
            }
            state.remaining_budget[i] = std::max(0.0, state.remaining_budget[i] - awards.cost(award));
            (i == 0 ? out.award1 : out.award2)[j] = award;
        }
    }

    parallel_for(static_cast<std::size_t>(m), options.threads, [&](std::size_t j) {
        CustomerState& customer = state.customers[j];
        Rng rng = make_stream(config.seed, {kTagConsumption, j, static_cast<std::uint64_t>(t)});
        int n = customer.fixed_demand;
        if (config.demand_mode == DemandMode::Redrawn)
            n = std::uniform_int_distribution<int>(config.demand_min, config.demand_max)(rng);
        const double d = config.awards[0].value(out.award1[j]) - config.awards[1].value(out.award2[j]);
        const double p = sigmoid_preference(d, customer.sigma);
        const int c = std::binomial_distribution<int>(n, p)(rng);
        out.demand[j] = n;
        out.captured1[j] = c;
        const double usage = std::clamp(static_cast<double>(c) / n, kUsageClamp, 1.0 - kUsageClamp);
        customer.sigma = update_sigma(customer.sigma, usage, config.updating_rate);
    });

    out.remaining_budget = state.remaining_budget;
    state.rounds_played = t;
    return out;
}

std::vector<ConsumptionRecord> records_for(const RoundOutcome& outcome, int company) {
    std::vector<ConsumptionRecord> out;
    out.reserve(outcome.demand.size());
    for (std::size_t j = 0; j < outcome.demand.size(); ++j) {
        ConsumptionRecord r;
        r.period = outcome.round;
        r.customer = static_cast<int>(j);
        r.own_award = company == 0 ? outcome.award1[j] : outcome.award2[j];
        r.count = company == 0 ? outcome.captured1[j] : outcome.captured2(j);
        r.demand = outcome.demand[j];
        out.push_back(r);
    }
    return out;
}

GameResult run_game(const MarketConfig& config, AwardPolicy& first, AwardPolicy& second,
                    const SimOptions& options) {
    GameResult result;
    MarketState state = MarketState::initial(config);
    long long captured = 0;
    long long total = 0;
    for (int t = 1; t <= config.rounds; ++t) {
        const RoundOutcome outcome = run_round(config, state, first, second, options);
        std::array<std::vector<ConsumptionRecord>, 2> round_records{records_for(outcome, 0),
                                                                    records_for(outcome, 1)};
        first.observe({t, round_records[0]});
        second.observe({t, round_records[1]});
        for (std::size_t i = 0; i < 2; ++i) {
            result.records[i].insert(result.records[i].end(), round_records[i].begin(),
                                     round_records[i].end());
            result.coerced[i] += outcome.coerced[i];
        }
        for (std::size_t j = 0; j < outcome.demand.size(); ++j) {
            captured += outcome.captured1[j];
            total += outcome.demand[j];
        }
        const double s1 = static_cast<double>(captured) / static_cast<double>(total);
        result.trajectory.push_back({t, s1, 1.0 - s1});
    }
    if (!result.trajectory.empty()) {
        // Final shares through the common accounting routine.
        std::vector<int> c1;
        std::vector<int> n;
        c1.reserve(result.records[0].size());
        n.reserve(result.records[0].size());
        for (const auto& r : result.records[0]) {
            c1.push_back(r.count);
            n.push_back(*r.demand);
        }
        result.final_share = market_share(c1, n);
    }
    result.final_state = std::move(state);
    return result;
}

void write_trajectory(const std::filesystem::path& path, const std::vector<SharePoint>& points) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "round,share1,share2\n";
    for (const auto& p : points)
        out << p.round << ',' << format_double(p.share1) << ',' << format_double(p.share2) << '\n';
}

}  // namespace pricewar
