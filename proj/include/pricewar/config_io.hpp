#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "pricewar/dp_policy.hpp"
#include "pricewar/dqn_policy.hpp"
#include "pricewar/game.hpp"
#include "pricewar/lda.hpp"
#include "pricewar/lda_features.hpp"
#include "pricewar/qlearner.hpp"

namespace pricewar {

using Json = nlohmann::json;

/// Parses a JSON file; throws ConfigError on I/O or syntax errors.
Json load_json(const std::filesystem::path& path);

/// All readers reject unknown keys and fall back to the struct defaults for
/// missing ones.
MarketConfig market_from_json(const Json& j);
Json to_json(const MarketConfig& config);

lda::LdaConfig lda_from_json(const Json& j, lda::LdaConfig defaults = {});
Json to_json(const lda::LdaConfig& config);

struct PolicySettings {
    LdaFeatureSettings features;
    QLearnerConfig q;
    DqnSettings dqn;
    DpSettings dp;
};

PolicySettings policy_settings_from_json(const Json& j);
Json to_json(const PolicySettings& settings);

/// Names accepted by make_policy.
const std::vector<std::string>& policy_names();

/// Builds "random", "dp", "dqn", "dqn+p", "dqn+s" or "dqn+lda" for `company`
/// (0 or 1). Learner and inference seeds are derived from `seed` and the
/// company index. Throws ConfigError for unknown names.
std::unique_ptr<AwardPolicy> make_policy(const std::string& name, const PolicySettings& settings,
                                         const MarketConfig& market, int company,
                                         std::uint64_t seed, int threads = 1);

}  // namespace pricewar
