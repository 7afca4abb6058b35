#pragma once

#include <span>
#include <string>
#include <vector>

#include "pricewar/game.hpp"
#include "pricewar/rng.hpp"

namespace pricewar {

/// What a company knows when it picks awards for a round.
struct RoundContext {
    int round = 1;
    int company = 0;
    int num_customers = 0;
    std::span<const int> customer_group;
    const AwardSet* awards = nullptr;
    /// Money the company may still spend in this round.
    double budget_available = 0.0;
};

/// The company's own records for the round just played, one per customer in
/// customer order.
struct RoundFeedback {
    int round = 1;
    std::span<const ConsumptionRecord> records;
};

/// A company's award decision engine. Policies are driven by the simulator:
/// choose_awards() for every round, then observe() with the resulting records.
class AwardPolicy {
public:
    virtual ~AwardPolicy() = default;
    virtual std::string name() const = 0;

    /// One award index per customer. Unaffordable awards are coerced to 0 by
    /// the simulator in customer order.
    virtual std::vector<int> choose_awards(const RoundContext& ctx, Rng& rng) = 0;

    virtual void observe(const RoundFeedback& /*feedback*/) {}
};

}  // namespace pricewar
