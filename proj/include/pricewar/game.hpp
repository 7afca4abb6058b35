#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pricewar {

/// Discrete award menu of one company. Award 0 is "no award" and is free.
/// Costs are money units, values are the customer's utility units.
class AwardSet {
public:
    AwardSet() = default;
    AwardSet(std::vector<double> costs, std::vector<double> values);

    /// Awards 0..count-1 with cost(x) = value(x) = x.
    static AwardSet identity(int count);

    int size() const { return static_cast<int>(costs_.size()); }
    double cost(int award) const { return costs_.at(static_cast<std::size_t>(award)); }
    double value(int award) const { return values_.at(static_cast<std::size_t>(award)); }
    const std::vector<double>& costs() const { return costs_; }
    const std::vector<double>& values() const { return values_; }

    /// Costs as integers after multiplying by `scale` and rounding. Used by the
    /// budget DP, which needs integral weights.
    std::vector<int> integer_costs(double scale = 1.0) const;

private:
    std::vector<double> costs_;
    std::vector<double> values_;
};

/// One customer-period observation from one company's point of view.
struct ConsumptionRecord {
    int period = 1;
    int customer = 0;
    int own_award = 0;
    int count = 0;
    std::optional<int> demand;

    bool operator==(const ConsumptionRecord&) const = default;
};

enum class BudgetMode { PerHorizon, PerRound };
enum class DemandMode { Redrawn, Fixed };

struct MarketConfig {
    int num_customer_groups = 10;
    int customers_per_group = 100;
    int rounds = 200;
    std::array<double, 2> budgets{2000.0, 2000.0};
    BudgetMode budget_mode = BudgetMode::PerHorizon;
    std::array<AwardSet, 2> awards{AwardSet::identity(5), AwardSet::identity(5)};
    int demand_min = 1;
    int demand_max = 100;
    DemandMode demand_mode = DemandMode::Redrawn;
    double updating_rate = 0.5;
    double initial_sigma = 0.5;
    std::uint64_t seed = 1;

    int num_customers() const { return num_customer_groups * customers_per_group; }
    int group_of(int customer) const { return customer / customers_per_group; }

    /// Throws ConfigError on the first violated invariant.
    void validate() const;
};

/// Maps a usage fraction count/demand onto one of `acc` equal-width bins.
/// count == demand lands in the top bin acc-1.
int discretize(int count, int demand, int acc);

/// Per-company share of the pooled demand, given company 1's captured counts and
/// the per-customer demands. Company 2 captures the remainder.
std::array<double, 2> market_share(std::span<const int> captured_by_first,
                                   std::span<const int> demand);

/// Checks count/demand consistency and index ranges; throws DataError.
void validate_record(const ConsumptionRecord& record, int num_awards = -1);

std::string to_string(BudgetMode mode);
std::string to_string(DemandMode mode);
BudgetMode parse_budget_mode(const std::string& text);
DemandMode parse_demand_mode(const std::string& text);

}  // namespace pricewar
