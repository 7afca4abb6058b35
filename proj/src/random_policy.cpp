#include "pricewar/random_policy.hpp"

#include <random>

namespace pricewar {

int random_choose(const AwardSet& awards, double remaining_budget, Rng& rng) {
    // Costs are increasing in the award index, so the affordable set is a prefix.
    int affordable = 1;
    while (affordable < awards.size() && awards.cost(affordable) <= remaining_budget + 1e-9) ++affordable;
    return std::uniform_int_distribution<int>(0, affordable - 1)(rng);
}

std::vector<int> RandomPolicy::choose_awards(const RoundContext& ctx, Rng& rng) {
    std::vector<int> out(static_cast<std::size_t>(ctx.num_customers));
    double budget = ctx.budget_available;
    for (auto& award : out) {
        award = random_choose(*ctx.awards, budget, rng);
        budget -= ctx.awards->cost(award);
    }
    return out;
}

}  // namespace pricewar
