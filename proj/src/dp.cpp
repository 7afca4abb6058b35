#include "pricewar/dp.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#include "pricewar/error.hpp"

namespace pricewar {

bool is_aligned(const lda::PreferenceMatrix& pref, double tolerance) {
    for (int k = 1; k < pref.opp_arity(); ++k)
        if (pref.expected_bin(k) > pref.expected_bin(k - 1) + tolerance) return false;
    return true;
}

double expected_benefit(std::span<const double> theta, const lda::PreferenceMatrix& pref,
                        int own_award) {
    if (theta.size() != static_cast<std::size_t>(pref.opp_arity()))
        throw DataError("strategy distribution size does not match the preference matrix");
    if (own_award < 0 || own_award >= pref.own_arity()) throw DataError("own award out of range");
    if (!is_aligned(pref)) throw DataError("expected_benefit needs label-aligned estimates");
    double psi = 0.0;
    for (int l = 0; l < pref.opp_arity(); ++l)
        psi += theta[static_cast<std::size_t>(l)] * pref.expected_usage(own_award, l);
    return psi;
}

Allocation dp_allocate(const BenefitTable& psi, std::span<const int> costs, int budget) {
    if (budget < 0) throw ConfigError("budget must be >= 0");
    if (static_cast<int>(costs.size()) != psi.awards || psi.awards < 1)
        throw ConfigError("cost vector does not match the benefit table");
    if (costs[0] != 0) throw ConfigError("award 0 must be free");
    if (psi.awards > 255) throw ConfigError("at most 255 awards supported");
    for (int c : costs)
        if (c < 0) throw ConfigError("award costs must be non-negative");

    // Awards in ascending cost so the first maximiser found is the cheapest.
    std::vector<int> order(costs.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return costs[static_cast<std::size_t>(a)] < costs[static_cast<std::size_t>(b)]; });

    const auto width = static_cast<std::size_t>(budget) + 1;
    const auto m = static_cast<std::size_t>(psi.customers);
    std::vector<double> prev(width, 0.0), cur(width, 0.0);
    std::vector<std::uint8_t> choice(m * width, 0);

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t k = 0; k < width; ++k) {
            double best = -std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int j : order) {
                const auto c = static_cast<std::size_t>(costs[static_cast<std::size_t>(j)]);
                if (c > k) continue;
                const double v = prev[k - c] + psi.at(static_cast<int>(i), j);
                if (v > best) {
                    best = v;
                    arg = j;
                }
            }
            cur[k] = best;
            choice[i * width + k] = static_cast<std::uint8_t>(arg);
        }
        std::swap(prev, cur);
    }

    Allocation out;
    out.awards.assign(m, 0);
    std::size_t k = width - 1;
    for (std::size_t i = m; i-- > 0;) {
        const int j = choice[i * width + k];
        out.awards[i] = j;
        k -= static_cast<std::size_t>(costs[static_cast<std::size_t>(j)]);
    }
    for (std::size_t i = 0; i < m; ++i) {
        out.objective += psi.at(static_cast<int>(i), out.awards[i]);
        out.total_cost += costs[static_cast<std::size_t>(out.awards[i])];
    }
    return out;
}

}  // namespace pricewar
