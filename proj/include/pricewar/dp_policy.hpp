#pragma once

#include <filesystem>
#include <vector>

#include "pricewar/dp.hpp"
#include "pricewar/lda_features.hpp"
#include "pricewar/policy.hpp"

namespace pricewar {

struct DpSettings {
    /// Multiplier turning money costs and budgets into integer DP units.
    double cost_scale = 1.0;
};

/// Re-solves the budget allocation every round from the latest inferred group
/// preference tables and per-customer strategy distributions. Plays the
/// random baseline until the first inference has run.
class DpPolicy : public AwardPolicy {
public:
    DpPolicy(const DpSettings& settings, const LdaFeatureSettings& features,
             const AwardSet& own_awards, int opp_arity, std::span<const int> customer_group);

    std::string name() const override { return "dp"; }
    std::vector<int> choose_awards(const RoundContext& ctx, Rng& rng) override;
    void observe(const RoundFeedback& feedback) override;

    const LdaFeatureProvider& features() const { return features_; }
    /// Benefit table of the last DP round (empty while warming up).
    const BenefitTable& last_benefits() const { return last_psi_; }
    const std::vector<int>& last_awards() const { return last_awards_; }

private:
    DpSettings settings_;
    AwardSet awards_;
    std::vector<int> group_of_;
    LdaFeatureProvider features_;
    BenefitTable last_psi_;
    std::vector<int> last_awards_;
};

/// Writes `customer_id,award,psi` for an allocation.
void write_dp_decisions(const std::filesystem::path& path, const BenefitTable& psi,
                        const std::vector<int>& awards);

}  // namespace pricewar
