#pragma once

#include "pricewar/policy.hpp"

namespace pricewar {

/// Uniform draw over the awards whose cost fits in `remaining_budget`. Award 0
/// is always affordable.
int random_choose(const AwardSet& awards, double remaining_budget, Rng& rng);

/// Baseline: every customer independently gets a uniformly random affordable
/// award, walking customers in order and charging the budget as it goes.
class RandomPolicy : public AwardPolicy {
public:
    std::string name() const override { return "random"; }
    std::vector<int> choose_awards(const RoundContext& ctx, Rng& rng) override;
};

}  // namespace pricewar
