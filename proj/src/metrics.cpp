#include "pricewar/metrics.hpp"

#include <cmath>
#include <fstream>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"

namespace pricewar {
namespace {

void check_distribution(std::span<const double> p, const char* what) {
    double s = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw DataError(std::string(what) + " has a negative or NaN entry");
        s += v;
    }
    if (std::abs(s - 1.0) > 1e-6) throw DataError(std::string(what) + " does not sum to 1");
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

NllResult negative_log_likelihood(std::span<const double> probs) {
    if (probs.empty()) throw DataError("NLL of an empty test set is undefined");
    NllResult r;
    r.samples = probs.size();
    for (double p : probs) {
        if (!(p >= 0.0) || p > 1.0 + 1e-9) throw DataError("outcome probability outside [0, 1]");
        if (p < kProbabilityFloor) {
            p = kProbabilityFloor;
            ++r.floored;
        }
        r.nll -= std::log(p);
    }
    return r;
}

NllResult lda_nll(const lda::PreferenceMatrix& pref, const lda::StrategyDistribution& theta,
                  std::span<const lda::LdaRecord> test) {
    std::vector<double> probs;
    probs.reserve(test.size());
    for (const auto& r : test) {
        if (r.doc < 0 || r.doc >= theta.num_docs()) throw DataError("test record refers to an unknown document");
        if (r.own_award < 0 || r.own_award >= pref.own_arity() || r.bin < 0 || r.bin >= pref.acc())
            throw DataError("test record outside the preference table");
        probs.push_back(lda::predict_bin_distribution(pref, theta.row(r.doc), r.own_award)[r.bin]);
    }
    return negative_log_likelihood(probs);
}

NllResult uniform_nll(int acc, std::span<const lda::LdaRecord> test) {
    if (acc < 1) throw ConfigError("acc must be >= 1");
    std::vector<double> probs(test.size(), 1.0 / acc);
    return negative_log_likelihood(probs);
}

double wasserstein1(std::span<const double> p, std::span<const double> q, std::span<const double> support) {
    if (p.size() != q.size()) throw DataError("distributions are on different supports");
    if (!support.empty() && support.size() != p.size()) throw DataError("support size does not match distributions");
    check_distribution(p, "first distribution");
    check_distribution(q, "second distribution");
    double cp = 0.0, cq = 0.0, total = 0.0;
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        cp += p[i];
        cq += q[i];
        const double gap = support.empty() ? 1.0 : support[i + 1] - support[i];
        if (!(gap > 0.0)) throw DataError("support positions must be strictly increasing");
        total += std::abs(cp - cq) * gap;
    }
    return total;
}

DistanceReport strategy_distance_report(const lda::StrategyDistribution& theta_hat,
                                        const lda::StrategyDistribution& truth, std::span<const int> group_ids,
                                        std::span<const double> weights) {
    if (theta_hat.num_docs() != truth.num_docs() || theta_hat.opp_arity() != truth.opp_arity())
        throw DataError("estimated and true strategy tables differ in shape");
    const int groups = truth.num_docs();
    const int K = truth.opp_arity();
    if (!weights.empty() && static_cast<int>(weights.size()) != groups)
        throw DataError("one weight per group is required");

    std::vector<double> pooled(static_cast<std::size_t>(K), 0.0);
    double wsum = 0.0;
    for (int g = 0; g < groups; ++g) {
        const double w = weights.empty() ? 1.0 : weights[g];
        for (int k = 0; k < K; ++k) pooled[k] += w * truth.at(g, k);
        wsum += w;
    }
    if (!(wsum > 0.0)) throw DataError("group weights sum to zero");
    for (double& v : pooled) v /= wsum;
    const std::vector<double> uniform(static_cast<std::size_t>(K), 1.0 / K);

    DistanceReport report;
    report.mean.group = "mean";
    for (int g = 0; g < groups; ++g) {
        DistanceRow row;
        row.group = group_ids.empty() ? std::to_string(g) : std::to_string(group_ids[g]);
        row.lda = wasserstein1(theta_hat.row(g), truth.row(g));
        row.uniform = wasserstein1(uniform, truth.row(g));
        row.overall = wasserstein1(pooled, truth.row(g));
        report.mean.lda += row.lda / groups;
        report.mean.uniform += row.uniform / groups;
        report.mean.overall += row.overall / groups;
        report.rows.push_back(row);
    }
    return report;
}

void write_nll_report(const std::filesystem::path& path, std::span<const NllRow> rows) {
    auto out = open_out(path);
    out << "predictor,samples,nll,floored\n";
    for (const auto& r : rows)
        out << r.predictor << ',' << r.result.samples << ',' << format_double(r.result.nll) << ','
            << r.result.floored << '\n';
}

void write_w1_report(const std::filesystem::path& path, const DistanceReport& report) {
    auto out = open_out(path);
    out << "group,lda,uniform,overall\n";
    auto line = [&](const DistanceRow& r) {
        out << r.group << ',' << format_double(r.lda) << ',' << format_double(r.uniform) << ','
            << format_double(r.overall) << '\n';
    };
    for (const auto& r : report.rows) line(r);
    line(report.mean);
}

}  // namespace pricewar
