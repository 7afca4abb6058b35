#include "pricewar/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pricewar/error.hpp"

namespace pricewar {

AwardSet::AwardSet(std::vector<double> costs, std::vector<double> values)
    : costs_(std::move(costs)), values_(std::move(values)) {
    if (costs_.empty()) throw ConfigError("award set must contain at least award 0");
    if (costs_.size() != values_.size())
        throw ConfigError("award set costs and values differ in length");
    if (costs_[0] != 0.0 || values_[0] != 0.0)
        throw ConfigError("award 0 must have cost 0 and value 0");
    for (std::size_t i = 2; i < costs_.size(); ++i) {
        if (!(costs_[i] > costs_[i - 1]) || !(values_[i] > values_[i - 1]))
            throw ConfigError("award costs and values must be strictly increasing");
    }
    if (costs_.size() > 1 && (costs_[1] <= 0.0 || values_[1] <= 0.0))
        throw ConfigError("non-zero awards must have positive cost and value");
}

AwardSet AwardSet::identity(int count) {
    if (count < 1) throw ConfigError("award count must be >= 1");
    std::vector<double> v(static_cast<std::size_t>(count));
    std::iota(v.begin(), v.end(), 0.0);
    return AwardSet(v, v);
}

std::vector<int> AwardSet::integer_costs(double scale) const {
    std::vector<int> out;
    out.reserve(costs_.size());
    for (double c : costs_) out.push_back(static_cast<int>(std::lround(c * scale)));
    return out;
}

void MarketConfig::validate() const {
    if (num_customer_groups < 1) throw ConfigError("num_customer_groups must be >= 1");
    if (customers_per_group < 1) throw ConfigError("customers_per_group must be >= 1");
    if (rounds < 0) throw ConfigError("rounds must be >= 0");
    for (double b : budgets)
        if (!(b >= 0.0)) throw ConfigError("budgets must be >= 0");
    if (demand_min < 1) throw ConfigError("demand_min must be >= 1");
    if (demand_max < demand_min) throw ConfigError("demand_max must be >= demand_min");
    if (!(updating_rate > 0.0 && updating_rate <= 1.0))
        throw ConfigError("updating_rate must lie in (0, 1]");
    if (!(initial_sigma > 0.0 && initial_sigma < 1.0))
        throw ConfigError("initial_sigma must lie in (0, 1)");
    for (const auto& a : awards)
        if (a.size() < 1) throw ConfigError("award set is empty");
}

int discretize(int count, int demand, int acc) {
    if (acc < 2) throw ConfigError("acc must be >= 2");
    if (demand < 1) throw DataError("invalid record: demand must be >= 1");
    if (count < 0 || count > demand) throw DataError("invalid record: count outside [0, demand]");
    // Integer arithmetic avoids floating rounding at bin edges.
    const long long bin = static_cast<long long>(count) * acc / demand;
    return static_cast<int>(std::min<long long>(bin, acc - 1));
}

std::array<double, 2> market_share(std::span<const int> captured_by_first,
                                   std::span<const int> demand) {
    if (captured_by_first.size() != demand.size())
        throw DataError("captured and demand vectors differ in length");
    long long captured = 0;
    long long total = 0;
    for (std::size_t i = 0; i < demand.size(); ++i) {
        if (captured_by_first[i] < 0 || captured_by_first[i] > demand[i])
            throw DataError("captured count outside [0, demand]");
        captured += captured_by_first[i];
        total += demand[i];
    }
    if (total == 0) throw DataError("market share undefined: empty consumption pool");
    const double first = static_cast<double>(captured) / static_cast<double>(total);
    return {first, static_cast<double>(total - captured) / static_cast<double>(total)};
}

void validate_record(const ConsumptionRecord& r, int num_awards) {
    if (r.period < 1) throw DataError("invalid record: period must be >= 1");
    if (r.customer < 0) throw DataError("invalid record: negative customer id");
    if (r.own_award < 0 || (num_awards > 0 && r.own_award >= num_awards))
        throw DataError("invalid record: award index out of range");
    if (r.count < 0) throw DataError("invalid record: negative count");
    if (r.demand) {
        if (*r.demand < 1) throw DataError("invalid record: demand must be >= 1");
        if (r.count > *r.demand) throw DataError("invalid record: count exceeds demand");
    }
}

std::string to_string(BudgetMode mode) {
    return mode == BudgetMode::PerHorizon ? "per_horizon" : "per_round";
}

std::string to_string(DemandMode mode) {
    return mode == DemandMode::Redrawn ? "redrawn" : "fixed";
}

BudgetMode parse_budget_mode(const std::string& text) {
    if (text == "per_horizon") return BudgetMode::PerHorizon;
    if (text == "per_round") return BudgetMode::PerRound;
    throw ConfigError("unknown budget_mode '" + text + "' (expected per_horizon|per_round)");
}

DemandMode parse_demand_mode(const std::string& text) {
    if (text == "redrawn") return DemandMode::Redrawn;
    if (text == "fixed") return DemandMode::Fixed;
    throw ConfigError("unknown demand_mode '" + text + "' (expected redrawn|fixed)");
}

}  // namespace pricewar
