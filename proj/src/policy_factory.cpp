#include <algorithm>

#include "pricewar/config_io.hpp"
#include "pricewar/error.hpp"
#include "pricewar/random_policy.hpp"

namespace pricewar {

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names{"random", "dp", "dqn", "dqn+p", "dqn+s", "dqn+lda"};
    return names;
}

std::unique_ptr<AwardPolicy> make_policy(const std::string& name, const PolicySettings& settings,
                                         const MarketConfig& market, int company, std::uint64_t seed,
                                         int threads) {
    if (company != 0 && company != 1) throw ConfigError("company must be 0 or 1");
    const auto& names = policy_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("unknown policy '" + name + "'");
    if (name == "random") return std::make_unique<RandomPolicy>();

    const AwardSet& own = market.awards[static_cast<std::size_t>(company)];
    const int opp_arity = market.awards[static_cast<std::size_t>(1 - company)].size();
    std::vector<int> groups(static_cast<std::size_t>(market.num_customers()));
    for (int j = 0; j < market.num_customers(); ++j) groups[static_cast<std::size_t>(j)] = market.group_of(j);

    const std::uint64_t company_seed = mix64(seed ^ mix64(0xc0ffee + static_cast<std::uint64_t>(company)));
    LdaFeatureSettings features = settings.features;
    features.lda.seed = mix64(company_seed ^ 0x1da);
    features.threads = threads;

    if (name == "dp") return std::make_unique<DpPolicy>(settings.dp, features, own, opp_arity, groups);

    QLearnerConfig q = settings.q;
    q.seed = mix64(company_seed ^ 0xd9);
    DqnSettings dqn = settings.dqn;
    dqn.variant = parse_state_variant(name);
    dqn.total_rounds = market.rounds;
    return std::make_unique<DqnPolicy>(dqn, q, features, own, opp_arity, groups);
}

}  // namespace pricewar
