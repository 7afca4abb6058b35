#pragma once

#include <array>
#include <filesystem>
#include <vector>

#include "pricewar/game.hpp"
#include "pricewar/policy.hpp"

namespace pricewar {

/// Usage rates are clamped to [kUsageClamp, 1 - kUsageClamp] before the
/// preference update so sigma stays inside (0, 1).
inline constexpr double kUsageClamp = 1e-3;

/// Probability that a customer with baseline preference `sigma` picks company 1
/// when company 1's award is worth `d` more than company 2's. A logistic curve
/// rescaled so that it passes through sigma at d = 0 and spans (0, 1).
double sigmoid_preference(double d, double sigma);

/// Moves sigma toward the observed usage rate: sigma + gamma * (usage - sigma).
double update_sigma(double sigma, double usage_rate, double gamma);

struct CustomerState {
    double sigma = 0.5;
    int group = 0;
    /// Used only in DemandMode::Fixed.
    int fixed_demand = 1;
};

/// Ground truth of the market. Never shown to policies.
struct MarketState {
    std::vector<CustomerState> customers;
    std::array<double, 2> remaining_budget{0.0, 0.0};
    int rounds_played = 0;

    static MarketState initial(const MarketConfig& config);
};

struct RoundOutcome {
    int round = 0;
    std::vector<int> award1;
    std::vector<int> award2;
    std::vector<int> demand;
    std::vector<int> captured1;
    std::array<double, 2> remaining_budget{0.0, 0.0};
    /// Awards a policy could not afford and that were replaced by award 0.
    std::array<int, 2> coerced{0, 0};

    int captured2(std::size_t customer) const { return demand[customer] - captured1[customer]; }
};

struct SimOptions {
    /// Worker threads for the per-customer map; <= 0 means all cores.
    int threads = 1;
};

/// Plays one round: both policies choose, budgets are charged, each customer's
/// consumptions are drawn and sigma is updated. Policies are not notified; see
/// run_game for the full loop.
RoundOutcome run_round(const MarketConfig& config, MarketState& state, AwardPolicy& first,
                       AwardPolicy& second, const SimOptions& options = {});

/// Company-visible records of a round (company 0 or 1).
std::vector<ConsumptionRecord> records_for(const RoundOutcome& outcome, int company);

struct SharePoint {
    int round = 0;
    double share1 = 0.0;
    double share2 = 0.0;
};

struct GameResult {
    /// Cumulative market share after each round.
    std::vector<SharePoint> trajectory;
    std::array<std::vector<ConsumptionRecord>, 2> records;
    std::array<double, 2> final_share{0.5, 0.5};
    std::array<int, 2> coerced{0, 0};
    MarketState final_state;
};

/// Runs the whole game and feeds each company its own records after every round.
/// Deterministic in config.seed regardless of options.threads.
GameResult run_game(const MarketConfig& config, AwardPolicy& first, AwardPolicy& second,
                    const SimOptions& options = {});

void write_trajectory(const std::filesystem::path& path, const std::vector<SharePoint>& points);

}  // namespace pricewar
