#include "pricewar/lda_features.hpp"

#include <algorithm>

#include "pricewar/error.hpp"
#include "pricewar/parallel.hpp"

namespace pricewar {

StateVariant parse_state_variant(const std::string& name) {
    if (name == "dqn") return StateVariant::Dqn;
    if (name == "dqn+p") return StateVariant::DqnP;
    if (name == "dqn+s") return StateVariant::DqnS;
    if (name == "dqn+lda") return StateVariant::DqnLda;
    throw ConfigError("unknown DQN variant '" + name + "'");
}

std::string to_string(StateVariant v) {
    switch (v) {
        case StateVariant::Dqn: return "dqn";
        case StateVariant::DqnP: return "dqn+p";
        case StateVariant::DqnS: return "dqn+s";
        case StateVariant::DqnLda: return "dqn+lda";
    }
    return "dqn";
}

bool uses_pref(StateVariant v) { return v == StateVariant::DqnP || v == StateVariant::DqnLda; }
bool uses_strategy(StateVariant v) { return v == StateVariant::DqnS || v == StateVariant::DqnLda; }

int StateLayout::size(StateVariant v) const {
    int n = 2 * window;
    if (uses_pref(v)) n += own_arity * opp_arity * acc;
    if (uses_strategy(v)) n += opp_arity;
    return n;
}

std::vector<double> build_state(StateVariant variant, const StateLayout& layout,
                                std::span<const HistoryItem> history,
                                const lda::PreferenceMatrix* pref, std::span<const double> theta) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(layout.size(variant)));
    const double award_scale = layout.own_arity > 1 ? 1.0 / (layout.own_arity - 1) : 0.0;
    for (int w = 0; w < layout.window; ++w) {
        if (static_cast<std::size_t>(w) < history.size()) {
            const auto& item = history[static_cast<std::size_t>(w)];
            out.push_back(item.award * award_scale);
            out.push_back((item.bin + 0.5) / layout.acc);
        } else {
            out.push_back(0.0);
            out.push_back(0.0);
        }
    }
    if (uses_pref(variant)) {
        if (pref == nullptr) throw ConfigError(to_string(variant) + " needs preference features");
        if (pref->own_arity() != layout.own_arity || pref->opp_arity() != layout.opp_arity ||
            pref->acc() != layout.acc)
            throw ConfigError("preference features do not match the state layout");
        out.insert(out.end(), pref->flat().begin(), pref->flat().end());
    }
    if (uses_strategy(variant)) {
        if (theta.size() != static_cast<std::size_t>(layout.opp_arity))
            throw ConfigError(to_string(variant) + " needs strategy features of size |B2|");
        out.insert(out.end(), theta.begin(), theta.end());
    }
    return out;
}

LdaFeatureProvider::LdaFeatureProvider(const LdaFeatureSettings& settings, int own_arity,
                                       int opp_arity, std::span<const int> customer_group)
    : settings_(settings), own_arity_(own_arity), opp_arity_(opp_arity),
      group_of_(customer_group.begin(), customer_group.end()) {
    settings_.lda.own_arity = own_arity;
    settings_.lda.opp_arity = opp_arity;
    settings_.lda.validate();
    if (settings_.window < 1) throw ConfigError("feature window must be >= 1");
    if (settings_.refresh_interval < 1) throw ConfigError("refresh_interval must be >= 1");
    int groups = 0;
    for (int g : group_of_) groups = std::max(groups, g + 1);
    members_.resize(static_cast<std::size_t>(groups));
    local_index_.resize(group_of_.size());
    for (std::size_t j = 0; j < group_of_.size(); ++j) {
        auto& m = members_[static_cast<std::size_t>(group_of_[j])];
        local_index_[j] = static_cast<int>(m.size());
        m.push_back(static_cast<int>(j));
    }
    const int acc = settings_.lda.acc;
    lda::PreferenceMatrix uniform(own_arity, opp_arity, acc);
    for (int b1 = 0; b1 < own_arity; ++b1)
        for (int k = 0; k < opp_arity; ++k)
            for (int h = 0; h < acc; ++h) uniform.at(b1, k, h) = 1.0 / acc;
    group_pref_.assign(static_cast<std::size_t>(groups), uniform);
    theta_.assign(group_of_.size() * static_cast<std::size_t>(opp_arity), 1.0 / opp_arity);
}

void LdaFeatureProvider::observe(std::span<const ConsumptionRecord> records) {
    window_.emplace_back(records.begin(), records.end());
    while (static_cast<int>(window_.size()) > settings_.window) window_.pop_front();
}

std::span<const double> LdaFeatureProvider::theta(int customer) const {
    return {theta_.data() + static_cast<std::size_t>(customer) * opp_arity_,
            static_cast<std::size_t>(opp_arity_)};
}

bool LdaFeatureProvider::maybe_refresh(int round) {
    if (window_.empty()) return false;
    if (ready_ && (round - 1) % settings_.refresh_interval != 0) return false;
    refresh(round);
    return true;
}

void LdaFeatureProvider::refresh(int round) {
    const auto groups = members_.size();
    std::vector<std::vector<lda::LdaRecord>> per_group(groups);
    for (const auto& period : window_) {
        for (const auto& r : period) {
            if (r.customer < 0 || static_cast<std::size_t>(r.customer) >= group_of_.size())
                throw DataError("record customer outside the market");
            if (!r.demand) throw DataError("feature inference needs records with demand");
            lda::LdaRecord lr;
            lr.doc = local_index_[static_cast<std::size_t>(r.customer)];
            lr.own_award = r.own_award;
            lr.count = r.count;
            lr.bin = discretize(r.count, *r.demand, settings_.lda.acc);
            per_group[static_cast<std::size_t>(group_of_[static_cast<std::size_t>(r.customer)])].push_back(lr);
        }
    }
    parallel_for(groups, settings_.threads, [&](std::size_t g) {
        if (per_group[g].empty()) return;
        lda::LdaConfig cfg = settings_.lda;
        cfg.seed = mix64(settings_.lda.seed ^ mix64((g + 1) * 0x9e37ULL + static_cast<std::uint64_t>(round)));
        const auto result = lda::run_inference(per_group[g], static_cast<int>(members_[g].size()), cfg,
                                               nullptr, 1);
        group_pref_[g] = result.estimates.pref;
        for (std::size_t local = 0; local < members_[g].size(); ++local) {
            const auto row = result.estimates.theta.row(static_cast<int>(local));
            std::copy(row.begin(), row.end(),
                      theta_.begin() + static_cast<std::ptrdiff_t>(members_[g][local]) * opp_arity_);
        }
    });
    ready_ = true;
}

}  // namespace pricewar
