#include "pricewar/lda.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/parallel.hpp"

namespace pricewar::lda {

void LdaConfig::validate() const {
    if (acc < 2) throw ConfigError("acc must be >= 2");
    if (own_arity < 1) throw ConfigError("own_arity must be >= 1");
    if (opp_arity < 1) throw ConfigError("opp_arity must be >= 1");
    if (!(alpha > 0.0)) throw ConfigError("alpha must be > 0");
    if (!(beta > 0.0)) throw ConfigError("beta must be > 0");
    if (sweeps < 1) throw ConfigError("sweeps must be >= 1");
    if (burn_in < 0 || burn_in >= sweeps) throw ConfigError("burn_in must lie in [0, sweeps)");
    if (thin < 1) throw ConfigError("thin must be >= 1");
    if (chains < 1) throw ConfigError("chains must be >= 1");
}

// ---------------------------------------------------------------------------
// Demand

DemandDistribution::DemandDistribution(int min_value, std::vector<double> weights)
    : min_(min_value), weights_(std::move(weights)) {
    if (weights_.empty()) throw ConfigError("demand distribution has empty support");
    if (min_ < 0) throw ConfigError("demand support must be non-negative");
    double total = 0.0;
    for (double w : weights_) {
        if (!(w >= 0.0)) throw ConfigError("demand weights must be non-negative");
        total += w;
        cumulative_.push_back(total);
    }
    if (!(total > 0.0)) throw ConfigError("demand weights sum to zero");
}

DemandDistribution DemandDistribution::uniform(int lo, int hi) {
    if (hi < lo) throw ConfigError("demand range is empty");
    return DemandDistribution(lo, std::vector<double>(static_cast<std::size_t>(hi - lo + 1), 1.0));
}

double DemandDistribution::probability(int n) const {
    if (n < min_ || n > max()) return 0.0;
    return weights_[static_cast<std::size_t>(n - min_)] / cumulative_.back();
}

int DemandDistribution::sample(Rng& rng) const {
    const double u = std::uniform_real_distribution<double>(0.0, cumulative_.back())(rng);
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                              static_cast<std::ptrdiff_t>(weights_.size()) - 1);
    return min_ + static_cast<int>(idx);
}

int impute_demand(int count, const DemandDistribution& dist, Rng& rng) {
    if (count < 0) throw DataError("cannot impute demand for a negative count");
    double feasible = 0.0;
    for (int n = std::max(count, dist.min()); n <= dist.max(); ++n) feasible += dist.probability(n);
    if (!(feasible > 0.0))
        throw DataError("demand imputation impossible: count " + std::to_string(count) +
                        " exceeds the demand support");
    while (true) {
        const int n = dist.sample(rng);
        if (n >= count && n >= 1) return n;
    }
}

std::vector<LdaRecord> to_lda_records(std::span<const ConsumptionRecord> records,
                                      const std::function<int(int)>& doc_of, int acc,
                                      const DemandDistribution* demand, Rng& rng) {
    std::vector<LdaRecord> out;
    out.reserve(records.size());
    for (const auto& r : records) {
        LdaRecord lr;
        lr.doc = doc_of(r.customer);
        lr.own_award = r.own_award;
        lr.count = r.count;
        if (r.demand) {
            lr.bin = discretize(r.count, *r.demand, acc);
        } else {
            if (demand == nullptr)
                throw DataError("record without demand and no demand distribution to impute from");
            lr.bin = discretize(r.count, impute_demand(r.count, *demand, rng), acc);
            lr.imputed = true;
        }
        out.push_back(lr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Distributions

PreferenceMatrix::PreferenceMatrix(int own_arity, int opp_arity, int acc)
    : own_(own_arity), opp_(opp_arity), acc_(acc),
      data_(static_cast<std::size_t>(own_arity) * opp_arity * acc, 0.0) {}

double PreferenceMatrix::expected_usage(int b1, int k) const {
    double e = 0.0;
    const auto r = row(b1, k);
    for (int h = 0; h < acc_; ++h) e += (h + 0.5) / acc_ * r[static_cast<std::size_t>(h)];
    return e;
}

double PreferenceMatrix::expected_bin(int k) const {
    double e = 0.0;
    for (int b1 = 0; b1 < own_; ++b1) {
        const auto r = row(b1, k);
        for (int h = 0; h < acc_; ++h) e += h * r[static_cast<std::size_t>(h)];
    }
    return e / own_;
}

StrategyDistribution::StrategyDistribution(int num_docs, int opp_arity)
    : docs_(num_docs), opp_(opp_arity),
      data_(static_cast<std::size_t>(num_docs) * opp_arity, 0.0) {}

// ---------------------------------------------------------------------------
// Gibbs state

GibbsState::GibbsState(const LdaConfig& config, std::vector<LdaRecord> records, int num_docs,
                       const DemandDistribution* demand)
    : config_(config), records_(std::move(records)), docs_(num_docs), K_(config.opp_arity),
      acc_(config.acc), demand_(demand), assign_(records_.size(), -1),
      hk_(static_cast<std::size_t>(config.own_arity) * K_ * acc_, 0),
      pair_(static_cast<std::size_t>(config.own_arity) * K_, 0),
      jk_(static_cast<std::size_t>(num_docs) * K_, 0), j_(static_cast<std::size_t>(num_docs), 0) {
    config_.validate();
    for (const auto& r : records_) {
        if (r.doc < 0 || r.doc >= docs_) throw DataError("record document index out of range");
        if (r.own_award < 0 || r.own_award >= config_.own_arity)
            throw DataError("record own award out of range");
        if (r.bin < 0 || r.bin >= acc_) throw DataError("record bin out of range");
    }
    if (config_.reimpute_each_sweep && demand_ == nullptr) {
        for (const auto& r : records_)
            if (r.imputed) throw ConfigError("reimputation requires a demand distribution");
    }
}

void GibbsState::initialize(std::uint64_t seed) {
    for (std::size_t i = 0; i < records_.size(); ++i) {
        if (is_assigned(i)) remove(i);
        const std::uint64_t key = records_[i].key == LdaRecord::kPositionKey ? i : records_[i].key;
        const double u = keyed_uniform(seed, key);
        insert(i, std::min(K_ - 1, static_cast<int>(u * K_)));
    }
}

void GibbsState::remove(std::size_t i) {
    const int k = assign_[i];
    if (k < 0) throw StateError("record is not assigned");
    const auto& r = records_[i];
    --hk_[hk_index(r.own_award, k, r.bin)];
    --pair_[pair_index(r.own_award, k)];
    --jk_[static_cast<std::size_t>(r.doc) * K_ + k];
    --j_[static_cast<std::size_t>(r.doc)];
    assign_[i] = -1;
}

void GibbsState::insert(std::size_t i, int k) {
    if (assign_[i] >= 0) throw StateError("record is already assigned");
    if (k < 0 || k >= K_) throw StateError("label out of range");
    const auto& r = records_[i];
    ++hk_[hk_index(r.own_award, k, r.bin)];
    ++pair_[pair_index(r.own_award, k)];
    ++jk_[static_cast<std::size_t>(r.doc) * K_ + k];
    ++j_[static_cast<std::size_t>(r.doc)];
    assign_[i] = k;
}

void GibbsState::reimpute(std::size_t i, Rng& rng) {
    if (assign_[i] >= 0) throw StateError("reimpute requires a removed record");
    auto& r = records_[i];
    if (!r.imputed || demand_ == nullptr) return;
    r.bin = discretize(r.count, impute_demand(r.count, *demand_, rng), acc_);
}

void GibbsState::conditional_posterior(std::size_t i, std::span<double> out) const {
    if (out.size() != static_cast<std::size_t>(K_)) throw StateError("output size != opp_arity");
    const auto& r = records_[i];
    const double alpha = config_.alpha;
    const double beta = config_.beta;
    const int nj = j_[static_cast<std::size_t>(r.doc)];
    if (nj < 0) throw StateError("corrupted state: negative document count");
    const double doc_denominator = nj + K_ * alpha;
    double total = 0.0;
    for (int k = 0; k < K_; ++k) {
        const int nh = hk_[hk_index(r.own_award, k, r.bin)];
        const int nk = pair_[pair_index(r.own_award, k)];
        const int njk = jk_[static_cast<std::size_t>(r.doc) * K_ + k];
        if (nh < 0 || nk < 0 || njk < 0) throw StateError("corrupted state: negative count");
        const double w = (nh + beta) / (nk + acc_ * beta) * ((njk + alpha) / doc_denominator);
        out[static_cast<std::size_t>(k)] = w;
        total += w;
    }
    for (auto& w : out) w /= total;
}

void GibbsState::check_consistency() const {
    std::vector<int> hk(hk_.size(), 0), pair(pair_.size(), 0), jk(jk_.size(), 0), j(j_.size(), 0);
    for (std::size_t i = 0; i < records_.size(); ++i) {
        const int k = assign_[i];
        if (k < 0) continue;
        const auto& r = records_[i];
        ++hk[hk_index(r.own_award, k, r.bin)];
        ++pair[pair_index(r.own_award, k)];
        ++jk[static_cast<std::size_t>(r.doc) * K_ + k];
        ++j[static_cast<std::size_t>(r.doc)];
    }
    if (hk != hk_ || pair != pair_ || jk != jk_ || j != j_)
        throw StateError("count tables disagree with assignments");
    for (int b1 = 0; b1 < config_.own_arity; ++b1)
        for (int k = 0; k < K_; ++k) {
            int sum = 0;
            for (int h = 0; h < acc_; ++h) sum += hk_[hk_index(b1, k, h)];
            if (sum != pair_[pair_index(b1, k)]) throw StateError("bin counts do not sum to pair count");
        }
    for (int d = 0; d < docs_; ++d) {
        int sum = 0;
        for (int k = 0; k < K_; ++k) sum += jk_[static_cast<std::size_t>(d) * K_ + k];
        if (sum != j_[static_cast<std::size_t>(d)]) throw StateError("label counts do not sum to doc count");
    }
}

double GibbsState::log_joint() const {
    const double alpha = config_.alpha;
    const double beta = config_.beta;
    double lp = 0.0;
    for (int b1 = 0; b1 < config_.own_arity; ++b1)
        for (int k = 0; k < K_; ++k) {
            lp += std::lgamma(acc_ * beta) - std::lgamma(pair_[pair_index(b1, k)] + acc_ * beta);
            for (int h = 0; h < acc_; ++h)
                lp += std::lgamma(hk_[hk_index(b1, k, h)] + beta) - std::lgamma(beta);
        }
    for (int d = 0; d < docs_; ++d) {
        lp += std::lgamma(K_ * alpha) - std::lgamma(j_[static_cast<std::size_t>(d)] + K_ * alpha);
        for (int k = 0; k < K_; ++k)
            lp += std::lgamma(jk_[static_cast<std::size_t>(d) * K_ + k] + alpha) - std::lgamma(alpha);
    }
    return lp;
}

void gibbs_sweep(GibbsState& state, Rng& rng) {
    const int K = state.config().opp_arity;
    std::vector<double> weights(static_cast<std::size_t>(K));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool reimpute = state.config().reimpute_each_sweep;
    for (std::size_t i = 0; i < state.num_records(); ++i) {
        state.remove(i);
        if (reimpute) state.reimpute(i, rng);
        state.conditional_posterior(i, weights);
        double u = unit(rng);
        int k = 0;
        for (; k < K - 1; ++k) {
            u -= weights[static_cast<std::size_t>(k)];
            if (u < 0.0) break;
        }
        state.insert(i, k);
    }
}

// ---------------------------------------------------------------------------
// Estimation

PosteriorAccumulator::PosteriorAccumulator(int own_arity, int opp_arity, int acc, int num_docs)
    : sum_{PreferenceMatrix(own_arity, opp_arity, acc), StrategyDistribution(num_docs, opp_arity)} {}

void PosteriorAccumulator::add(const GibbsState& state) {
    const auto& cfg = state.config();
    auto& pref = sum_.pref;
    auto& theta = sum_.theta;
    if (pref.own_arity() != cfg.own_arity || pref.opp_arity() != cfg.opp_arity ||
        pref.acc() != cfg.acc || theta.num_docs() != state.num_docs())
        throw StateError("sample dimensions do not match the accumulator");
    for (int b1 = 0; b1 < cfg.own_arity; ++b1)
        for (int k = 0; k < cfg.opp_arity; ++k) {
            const double denom = state.pair_count(b1, k) + cfg.acc * cfg.beta;
            for (int h = 0; h < cfg.acc; ++h) pref.at(b1, k, h) += (state.bin_count(b1, k, h) + cfg.beta) / denom;
        }
    for (int d = 0; d < state.num_docs(); ++d) {
        const double denom = state.doc_count(d) + cfg.opp_arity * cfg.alpha;
        for (int k = 0; k < cfg.opp_arity; ++k) theta.at(d, k) += (state.doc_label_count(d, k) + cfg.alpha) / denom;
    }
    ++samples_;
}

namespace {
void normalize(std::span<double> row) {
    const double total = std::accumulate(row.begin(), row.end(), 0.0);
    for (auto& v : row) v /= total;
}
}  // namespace

Estimates PosteriorAccumulator::mean() const {
    if (samples_ == 0) throw StateError("estimation requires at least one retained sample");
    Estimates out = sum_;
    for (int b1 = 0; b1 < out.pref.own_arity(); ++b1)
        for (int k = 0; k < out.pref.opp_arity(); ++k) normalize(out.pref.row(b1, k));
    for (int d = 0; d < out.theta.num_docs(); ++d) normalize(out.theta.row(d));
    return out;
}

Estimates estimate(std::span<const GibbsState> samples) {
    if (samples.empty()) throw StateError("estimation requires at least one retained sample");
    const auto& cfg = samples.front().config();
    PosteriorAccumulator acc(cfg.own_arity, cfg.opp_arity, cfg.acc, samples.front().num_docs());
    for (const auto& s : samples) acc.add(s);
    return acc.mean();
}

AlignedEstimates align_labels(const Estimates& est) {
    const int K = est.pref.opp_arity();
    std::vector<double> expected(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) expected[static_cast<std::size_t>(k)] = est.pref.expected_bin(k);
    std::vector<int> perm(static_cast<std::size_t>(K));
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(), [&](int a, int b) {
        return expected[static_cast<std::size_t>(a)] > expected[static_cast<std::size_t>(b)];
    });

    AlignedEstimates out{Estimates{PreferenceMatrix(est.pref.own_arity(), K, est.pref.acc()),
                                   StrategyDistribution(est.theta.num_docs(), K)},
                         perm};
    for (int b1 = 0; b1 < est.pref.own_arity(); ++b1)
        for (int k = 0; k < K; ++k)
            for (int h = 0; h < est.pref.acc(); ++h)
                out.estimates.pref.at(b1, k, h) = est.pref.at(b1, perm[static_cast<std::size_t>(k)], h);
    for (int d = 0; d < est.theta.num_docs(); ++d)
        for (int k = 0; k < K; ++k) out.estimates.theta.at(d, k) = est.theta.at(d, perm[static_cast<std::size_t>(k)]);
    return out;
}

std::vector<double> predict_bin_distribution(const PreferenceMatrix& pref,
                                             std::span<const double> theta, int b1) {
    if (theta.size() != static_cast<std::size_t>(pref.opp_arity()))
        throw DataError("strategy distribution size does not match the preference matrix");
    if (b1 < 0 || b1 >= pref.own_arity()) throw DataError("own award out of range");
    std::vector<double> out(static_cast<std::size_t>(pref.acc()), 0.0);
    for (int k = 0; k < pref.opp_arity(); ++k) {
        const auto row = pref.row(b1, k);
        const double w = theta[static_cast<std::size_t>(k)];
        for (int h = 0; h < pref.acc(); ++h) out[static_cast<std::size_t>(h)] += w * row[static_cast<std::size_t>(h)];
    }
    normalize(out);
    return out;
}

// ---------------------------------------------------------------------------
// Driver

InferenceResult run_inference(const std::vector<LdaRecord>& records, int num_docs,
                              const LdaConfig& config, const DemandDistribution* demand,
                              int threads) {
    config.validate();
    if (records.empty()) throw DataError("no records to infer from");
    const auto chains = static_cast<std::size_t>(config.chains);
    std::vector<AlignedEstimates> per_chain(chains);
    std::vector<ChainDiagnostics> diags(chains);

    parallel_for(chains, threads, [&](std::size_t c) {
        GibbsState state(config, records, num_docs, demand);
        state.initialize(mix64(config.seed ^ (0x5bd1e995ULL * (c + 1))));
        Rng rng = make_stream(config.seed, {0x1da, c});
        PosteriorAccumulator acc(config.own_arity, config.opp_arity, config.acc, num_docs);
        diags[c].chain = static_cast<int>(c);
        diags[c].log_joint.reserve(static_cast<std::size_t>(config.sweeps));
        for (int s = 0; s < config.sweeps; ++s) {
            gibbs_sweep(state, rng);
            diags[c].log_joint.push_back(state.log_joint());
            if (s >= config.burn_in && (s - config.burn_in) % config.thin == 0) acc.add(state);
        }
        per_chain[c] = align_labels(acc.mean());
    });

    InferenceResult result;
    const auto& first = per_chain.front().estimates;
    result.estimates = Estimates{PreferenceMatrix(config.own_arity, config.opp_arity, config.acc),
                                 StrategyDistribution(first.theta.num_docs(), config.opp_arity)};
    auto& pref = result.estimates.pref;
    auto& theta = result.estimates.theta;
    for (const auto& chain : per_chain) {
        for (int b1 = 0; b1 < config.own_arity; ++b1)
            for (int k = 0; k < config.opp_arity; ++k)
                for (int h = 0; h < config.acc; ++h) pref.at(b1, k, h) += chain.estimates.pref.at(b1, k, h);
        for (int d = 0; d < theta.num_docs(); ++d)
            for (int k = 0; k < config.opp_arity; ++k) theta.at(d, k) += chain.estimates.theta.at(d, k);
        result.permutations.push_back(chain.permutation);
    }
    for (int b1 = 0; b1 < config.own_arity; ++b1)
        for (int k = 0; k < config.opp_arity; ++k) normalize(pref.row(b1, k));
    for (int d = 0; d < theta.num_docs(); ++d) normalize(theta.row(d));
    result.diagnostics = std::move(diags);
    return result;
}

SyntheticData generate_synthetic(const StrategyDistribution& theta, const PreferenceMatrix& pref,
                                 const DemandDistribution& demand, const OwnAwardPolicy& own_policy,
                                 int periods, Rng& rng) {
    if (theta.opp_arity() != pref.opp_arity())
        throw ConfigError("strategy and preference label counts differ");
    const int acc = pref.acc();
    SyntheticData out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](std::span<const double> probs) {
        double u = unit(rng);
        int k = 0;
        for (; k + 1 < static_cast<int>(probs.size()); ++k) {
            u -= probs[static_cast<std::size_t>(k)];
            if (u < 0.0) break;
        }
        return k;
    };
    std::vector<int> candidates;
    for (int t = 1; t <= periods; ++t) {
        for (int j = 0; j < theta.num_docs(); ++j) {
            const int b2 = draw(theta.row(j));
            const int b1 = own_policy(j, t, rng);
            if (b1 < 0 || b1 >= pref.own_arity()) throw ConfigError("own policy returned bad award");
            const int h = draw(pref.row(b1, b2));
            int n = 0;
            for (int attempt = 0;; ++attempt) {
                if (attempt > 10000) throw ConfigError("bin unreachable under the demand distribution");
                n = demand.sample(rng);
                candidates.clear();
                for (int c = 0; c <= n; ++c)
                    if (discretize(c, n, acc) == h) candidates.push_back(c);
                if (!candidates.empty()) break;
            }
            const int c = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
            out.records.push_back({t, j, b1, c, n});
            out.hidden_opp_award.push_back(b2);
            out.hidden_bin.push_back(h);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Files

void write_preference(const std::filesystem::path& path, const PreferenceMatrix& pref) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "b1,b2,bin,prob\n";
    for (int b1 = 0; b1 < pref.own_arity(); ++b1)
        for (int k = 0; k < pref.opp_arity(); ++k)
            for (int h = 0; h < pref.acc(); ++h)
                out << b1 << ',' << k << ',' << h << ',' << format_double(pref.at(b1, k, h)) << '\n';
}

void write_strategy(const std::filesystem::path& path, const StrategyDistribution& theta,
                    std::span<const int> doc_ids) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "customer_or_group,b2,prob\n";
    for (int d = 0; d < theta.num_docs(); ++d)
        for (int k = 0; k < theta.opp_arity(); ++k)
            out << (doc_ids.empty() ? d : doc_ids[static_cast<std::size_t>(d)]) << ',' << k << ','
                << format_double(theta.at(d, k)) << '\n';
}

void write_diagnostics(const std::filesystem::path& path, std::span<const ChainDiagnostics> diags) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "chain,sweep,log_joint\n";
    for (const auto& d : diags)
        for (std::size_t s = 0; s < d.log_joint.size(); ++s)
            out << d.chain << ',' << s + 1 << ',' << format_double(d.log_joint[s]) << '\n';
}

PreferenceMatrix read_preference(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"b1", "b2", "bin", "prob"})
        throw DataError("'" + path.string() + "' is not a preference file");
    int own = 0, opp = 0, acc = 0;
    std::vector<std::array<double, 4>> rows;
    for (const auto& r : t.rows) {
        if (r.size() != 4) throw DataError("bad preference row in '" + path.string() + "'");
        const int b1 = parse_int(r[0], "b1"), k = parse_int(r[1], "b2"), h = parse_int(r[2], "bin");
        if (b1 < 0 || k < 0 || h < 0) throw DataError("negative index in preference file");
        own = std::max(own, b1 + 1);
        opp = std::max(opp, k + 1);
        acc = std::max(acc, h + 1);
        rows.push_back({double(b1), double(k), double(h), parse_double(r[3], "prob")});
    }
    if (rows.size() != static_cast<std::size_t>(own) * opp * acc)
        throw DataError("preference file is not a complete table");
    PreferenceMatrix pref(own, opp, acc);
    for (const auto& r : rows) pref.at(int(r[0]), int(r[1]), int(r[2])) = r[3];
    return pref;
}

std::pair<StrategyDistribution, std::vector<int>> read_strategy(const std::filesystem::path& path) {
    const CsvTable t = read_csv(path);
    if (t.header != std::vector<std::string>{"customer_or_group", "b2", "prob"})
        throw DataError("'" + path.string() + "' is not a strategy file");
    std::map<int, std::map<int, double>> by_doc;
    int opp = 0;
    for (const auto& r : t.rows) {
        if (r.size() != 3) throw DataError("bad strategy row in '" + path.string() + "'");
        const int id = parse_int(r[0], "customer_or_group");
        const int k = parse_int(r[1], "b2");
        if (k < 0) throw DataError("negative label in strategy file");
        opp = std::max(opp, k + 1);
        by_doc[id][k] = parse_double(r[2], "prob");
    }
    StrategyDistribution theta(static_cast<int>(by_doc.size()), opp);
    std::vector<int> ids;
    int d = 0;
    for (const auto& [id, probs] : by_doc) {
        if (static_cast<int>(probs.size()) != opp) throw DataError("strategy file row block incomplete");
        for (const auto& [k, p] : probs) theta.at(d, k) = p;
        ids.push_back(id);
        ++d;
    }
    return {theta, ids};
}

}  // namespace pricewar::lda
