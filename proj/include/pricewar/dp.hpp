#pragma once

#include <span>
#include <vector>

#include "pricewar/lda.hpp"

namespace pricewar {

/// Expected captured fraction when offering `own_award` to a customer whose
/// opponent plays `theta`: sum_l theta(l) * E[usage | own_award, l], with usage
/// read off bin midpoints. Throws DataError if `pref` labels are not aligned
/// (expected bin must be non-increasing in the opponent label).
double expected_benefit(std::span<const double> theta, const lda::PreferenceMatrix& pref,
                        int own_award);

/// True when the expected usage bin is non-increasing in the opponent label.
bool is_aligned(const lda::PreferenceMatrix& pref, double tolerance = 1e-12);

/// Row-major customers x awards table of expected benefits.
struct BenefitTable {
    int customers = 0;
    int awards = 0;
    std::vector<double> values;

    double at(int customer, int award) const {
        return values[static_cast<std::size_t>(customer) * awards + award];
    }
};

struct Allocation {
    std::vector<int> awards;
    double objective = 0.0;
    int total_cost = 0;
};

/// Budget-constrained allocation maximising the summed benefit:
/// f(i, k) = max_j f(i-1, k - cost(j)) + psi(i, j), with f(0, k) = 0 and k the
/// budget still available. Ties go to the cheaper award. Costs must be
/// non-negative integers with cost(0) == 0.
Allocation dp_allocate(const BenefitTable& psi, std::span<const int> costs, int budget);

}  // namespace pricewar
