#include "pricewar/dp_policy.hpp"

#include <cmath>
#include <fstream>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/random_policy.hpp"

namespace pricewar {

DpPolicy::DpPolicy(const DpSettings& settings, const LdaFeatureSettings& features,
                   const AwardSet& own_awards, int opp_arity, std::span<const int> customer_group)
    : settings_(settings), awards_(own_awards), group_of_(customer_group.begin(), customer_group.end()),
      features_(features, own_awards.size(), opp_arity, customer_group) {
    if (!(settings_.cost_scale > 0.0)) throw ConfigError("cost_scale must be > 0");
    for (double c : awards_.costs()) {
        const double scaled = c * settings_.cost_scale;
        if (std::abs(scaled - std::round(scaled)) > 1e-9)
            throw ConfigError("award costs are not integral after cost_scale; adjust cost_scale");
    }
}

std::vector<int> DpPolicy::choose_awards(const RoundContext& ctx, Rng& rng) {
    features_.maybe_refresh(ctx.round);
    const int m = ctx.num_customers;
    if (!features_.ready()) {
        RandomPolicy warmup;
        last_awards_ = warmup.choose_awards(ctx, rng);
        last_psi_ = {};
        return last_awards_;
    }
    const int b = awards_.size();
    last_psi_.customers = m;
    last_psi_.awards = b;
    last_psi_.values.assign(static_cast<std::size_t>(m) * b, 0.0);
    for (int j = 0; j < m; ++j) {
        const auto& pref = features_.pref(group_of_[static_cast<std::size_t>(j)]);
        const auto theta = features_.theta(j);
        for (int a = 0; a < b; ++a)
            last_psi_.values[static_cast<std::size_t>(j) * b + a] = expected_benefit(theta, pref, a);
    }
    const auto costs = awards_.integer_costs(settings_.cost_scale);
    const int budget = static_cast<int>(std::floor(ctx.budget_available * settings_.cost_scale + 1e-9));
    last_awards_ = dp_allocate(last_psi_, costs, budget).awards;
    return last_awards_;
}

void DpPolicy::observe(const RoundFeedback& feedback) { features_.observe(feedback.records); }

void write_dp_decisions(const std::filesystem::path& path, const BenefitTable& psi,
                        const std::vector<int>& awards) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "customer_id,award,psi\n";
    for (std::size_t j = 0; j < awards.size(); ++j)
        out << j << ',' << awards[j] << ','
            << format_double(psi.values.empty() ? 0.0 : psi.at(static_cast<int>(j), awards[j])) << '\n';
}

}  // namespace pricewar
