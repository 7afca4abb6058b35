#include "pricewar/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <limits>
#include <set>
#include <tuple>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/rng.hpp"

namespace pricewar::pipeline {
namespace {

bool is_null(const std::string& s) { return s.empty() || s == "null"; }

template <class T>
std::optional<T> parse_number(const std::string& s) {
    T v{};
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) return std::nullopt;
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    return out;
}

}  // namespace

std::optional<double> parse_discount(const std::string& text) {
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
        const auto spend = parse_number<double>(text.substr(0, colon));
        const auto save = parse_number<double>(text.substr(colon + 1));
        if (!spend || !save || !(*spend > 0.0) || !(*save > 0.0) || *save > *spend) return std::nullopt;
        return *save / *spend;
    }
    const auto rate = parse_number<double>(text);
    if (!rate || !(*rate > 0.0) || *rate > 1.0) return std::nullopt;
    return 1.0 - *rate;
}

std::optional<int> parse_date(const std::string& text) {
    if (text.size() != 8) return std::nullopt;
    const auto v = parse_number<int>(text);
    if (!v) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year{*v / 10000}, std::chrono::month{unsigned(*v / 100 % 100)},
                                          std::chrono::day{unsigned(*v % 100)}};
    if (!ymd.ok()) return std::nullopt;
    return static_cast<int>(std::chrono::sys_days{ymd}.time_since_epoch().count());
}

CouponLog parse_coupon_log(std::istream& in, const std::string& source) {
    CouponLog log;
    std::string line;
    if (!std::getline(in, line)) throw DataError(source + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> expected{"User_id", "Merchant_id", "Coupon_id", "Discount_rate",
                                            "Distance", "Date_received", "Date"};
    if (split_csv_line(line) != expected)
        throw DataError(source + ": header must be User_id,Merchant_id,Coupon_id,Discount_rate,Distance,Date_received,Date");
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        auto reject = [&](std::string reason) { log.quarantine.push_back({lineno, std::move(reason)}); };
        if (f.size() != 7) {
            reject("expected 7 fields");
            continue;
        }
        CouponRecord r;
        const auto user = parse_number<std::int64_t>(f[0]);
        const auto merchant = parse_number<std::int64_t>(f[1]);
        if (!user || !merchant) {
            reject("bad user or merchant id");
            continue;
        }
        r.user_id = *user;
        r.merchant_id = *merchant;
        if (!is_null(f[2])) {
            const auto coupon = parse_number<std::int64_t>(f[2]);
            if (!coupon) {
                reject("bad coupon id");
                continue;
            }
            r.coupon_id = *coupon;
            r.discount_rate = f[3];
            r.discount = parse_discount(f[3]);
            if (!r.discount) {
                reject("unparseable discount rate '" + f[3] + "'");
                continue;
            }
        }
        if (!is_null(f[4])) {
            const auto d = parse_number<double>(f[4]);
            if (!d || *d < 0.0) {
                reject("bad distance");
                continue;
            }
            r.distance = *d;
        }
        if (!is_null(f[5])) {
            r.date_received = parse_date(f[5]);
            if (!r.date_received) {
                reject("bad Date_received");
                continue;
            }
        }
        if (!is_null(f[6])) {
            r.date_used = parse_date(f[6]);
            if (!r.date_used) {
                reject("bad Date");
                continue;
            }
        }
        if (r.coupon_id && !r.date_received) {
            reject("coupon without Date_received");
            continue;
        }
        if (!r.coupon_id && !r.date_used) {
            reject("row has neither coupon nor purchase");
            continue;
        }
        if (r.date_used && r.date_received && *r.date_used < *r.date_received) {
            reject("Date before Date_received");
            continue;
        }
        log.rows.push_back(std::move(r));
    }
    return log;
}

CouponLog read_coupon_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return parse_coupon_log(in, path.string());
}

LevelBinning::LevelBinning(std::vector<double> values) : distinct_(std::move(values)) {
    std::sort(distinct_.begin(), distinct_.end());
    distinct_.erase(std::unique(distinct_.begin(), distinct_.end()), distinct_.end());
}

int LevelBinning::level(double discount) const {
    if (distinct_.empty()) throw DataError("no coupon levels are defined");
    // Rank among distinct values (values between known ones take the next rank up).
    const auto it = std::lower_bound(distinct_.begin(), distinct_.end(), discount);
    const std::size_t rank = std::min<std::size_t>(static_cast<std::size_t>(it - distinct_.begin()), distinct_.size() - 1);
    return 1 + static_cast<int>(rank * kLevels / distinct_.size());
}

PipelineResult preprocess(const CouponLog& log, const PipelineConfig& config) {
    if (config.preference_groups < 1 || config.strategy_groups < 1)
        throw ConfigError("group counts must be >= 1");
    PipelineResult out;
    out.quarantine = log.quarantine;

    std::vector<double> focal_values, market_values;
    int min_day = std::numeric_limits<int>::max();
    std::set<std::int64_t> all_users, focal_user_set;
    for (const auto& r : log.rows) {
        all_users.insert(r.user_id);
        min_day = std::min(min_day, r.date_received.value_or(r.date_used.value_or(min_day)));
        if (r.merchant_id == config.focal_merchant) {
            focal_user_set.insert(r.user_id);
            if (r.discount) focal_values.push_back(*r.discount);
        } else if (r.discount) {
            market_values.push_back(*r.discount);
        }
    }
    if (focal_user_set.empty())
        throw DataError("merchant " + std::to_string(config.focal_merchant) + " does not occur in the log");
    out.excluded_users = all_users.size() - focal_user_set.size();
    out.focal_levels = LevelBinning(focal_values);
    out.market_levels = LevelBinning(market_values);
    if (!focal_values.empty() && out.focal_levels.degenerate())
        out.warnings.push_back("focal merchant offers a single discount rate; all coupons share one level");
    if (!market_values.empty() && out.market_levels.degenerate())
        out.warnings.push_back("other merchants offer a single discount rate; exposure uses one level");

    const std::vector<std::int64_t> users(focal_user_set.begin(), focal_user_set.end());
    std::map<std::int64_t, int> row_of;
    for (std::size_t i = 0; i < users.size(); ++i) row_of[users[i]] = static_cast<int>(i);
    const int n = static_cast<int>(users.size());

    // Stage 1: interaction with the focal merchant. Stage 2: market-wide behaviour.
    struct Acc {
        double received = 0, used = 0, level_sum = 0, dist_sum = 0, dist_n = 0;
        double all_received = 0, all_used = 0;
        std::set<int> days;
        std::array<std::int64_t, kLevels> exposure{};
    };
    std::vector<Acc> acc(static_cast<std::size_t>(n));
    for (const auto& r : log.rows) {
        const auto it = row_of.find(r.user_id);
        if (it == row_of.end()) continue;
        Acc& a = acc[static_cast<std::size_t>(it->second)];
        if (r.date_received) a.days.insert(*r.date_received);
        if (r.date_used) a.days.insert(*r.date_used);
        if (r.coupon_id) {
            a.all_received += 1;
            if (r.date_used) a.all_used += 1;
        }
        if (r.merchant_id == config.focal_merchant) {
            if (r.coupon_id) {
                a.received += 1;
                if (r.date_used) a.used += 1;
                a.level_sum += out.focal_levels.level(*r.discount);
            }
            if (r.distance) {
                a.dist_sum += *r.distance;
                a.dist_n += 1;
            }
        } else if (r.coupon_id) {
            ++a.exposure[static_cast<std::size_t>(out.market_levels.level(*r.discount) - 1)];
        }
    }
    double dist_total = 0, dist_count = 0;
    for (const auto& a : acc) {
        dist_total += a.dist_sum;
        dist_count += a.dist_n;
    }
    const double dist_fill = dist_count > 0 ? dist_total / dist_count : 0.0;

    out.stage1_features = {n, 4, std::vector<double>(static_cast<std::size_t>(n) * 4)};
    out.stage2_features = {n, 3, std::vector<double>(static_cast<std::size_t>(n) * 3)};
    for (int i = 0; i < n; ++i) {
        const Acc& a = acc[static_cast<std::size_t>(i)];
        out.stage1_features.at(i, 0) = a.received;
        out.stage1_features.at(i, 1) = a.received > 0 ? a.used / a.received : 0.0;
        out.stage1_features.at(i, 2) = a.received > 0 ? a.level_sum / a.received : 0.0;
        out.stage1_features.at(i, 3) = a.dist_n > 0 ? a.dist_sum / a.dist_n : dist_fill;
        out.stage2_features.at(i, 0) = a.all_received;
        out.stage2_features.at(i, 1) = a.all_received > 0 ? a.all_used / a.all_received : 0.0;
        out.stage2_features.at(i, 2) = static_cast<double>(a.days.size());
    }

    FeatureMatrix s1 = out.stage1_features;
    standardize(s1);
    const auto pg = kmeans_cluster(s1, config.preference_groups, config.seed, config.kmeans_iterations).labels;

    out.assignments.resize(static_cast<std::size_t>(n));
    out.groups.resize(static_cast<std::size_t>(config.preference_groups));
    for (int g = 0; g < config.preference_groups; ++g) {
        std::vector<int> members;
        for (int i = 0; i < n; ++i)
            if (pg[static_cast<std::size_t>(i)] == g) members.push_back(i);
        const int k = std::min<int>(config.strategy_groups, static_cast<int>(members.size()));
        if (k < config.strategy_groups)
            out.warnings.push_back("preference group " + std::to_string(g) + " has " + std::to_string(members.size()) +
                                   " users; using " + std::to_string(k) + " strategy groups");
        FeatureMatrix s2{static_cast<int>(members.size()), 3, {}};
        for (int i : members)
            for (int d = 0; d < 3; ++d) s2.data.push_back(out.stage2_features.at(i, d));
        standardize(s2);
        const auto sg = kmeans_cluster(s2, k, mix64(config.seed ^ mix64(static_cast<std::uint64_t>(g) + 1)),
                                       config.kmeans_iterations)
                            .labels;
        GroupOutput& go = out.groups[static_cast<std::size_t>(g)];
        go.strategy_groups = k;
        go.exposure.assign(static_cast<std::size_t>(k), {});
        for (std::size_t m = 0; m < members.size(); ++m) {
            const int i = members[m];
            auto& a = out.assignments[static_cast<std::size_t>(i)];
            a.user_id = users[static_cast<std::size_t>(i)];
            a.preference_group = g;
            a.strategy_group = sg[m];
            a.customer = static_cast<int>(m);
            for (int l = 0; l < kLevels; ++l)
                go.exposure[static_cast<std::size_t>(sg[m])][l] += acc[static_cast<std::size_t>(i)].exposure[l];
        }
    }

    for (const auto& r : log.rows) {
        if (r.merchant_id != config.focal_merchant) continue;
        const auto& a = out.assignments[static_cast<std::size_t>(row_of.at(r.user_id))];
        const int day = r.date_received.value_or(r.date_used.value_or(min_day));
        ConsumptionRecord rec;
        rec.period = day - min_day + 1;
        rec.customer = a.customer;
        rec.own_award = r.coupon_id ? out.focal_levels.level(*r.discount) : 0;
        rec.count = r.date_used ? 1 : 0;
        rec.demand = 1;
        GroupOutput& go = out.groups[static_cast<std::size_t>(a.preference_group)];
        const bool test = config.split_date && day >= *config.split_date;
        (test ? go.test : go.train).push_back(rec);
    }
    for (auto& go : out.groups) {
        auto order = [](const ConsumptionRecord& x, const ConsumptionRecord& y) {
            return std::tie(x.period, x.customer, x.own_award, x.count) < std::tie(y.period, y.customer, y.own_award, y.count);
        };
        std::stable_sort(go.train.begin(), go.train.end(), order);
        std::stable_sort(go.test.begin(), go.test.end(), order);
    }
    return out;
}

void write_outputs(const std::filesystem::path& dir, const PipelineResult& result, bool split) {
    std::filesystem::create_directories(dir);
    for (std::size_t g = 0; g < result.groups.size(); ++g) {
        write_records(dir / ("records_pg" + std::to_string(g) + ".csv"), result.groups[g].train);
        if (split) write_records(dir / ("records_pg" + std::to_string(g) + "_test.csv"), result.groups[g].test);
    }
    {
        auto out = open_out(dir / "assignments.csv");
        out << "user_id,preference_group,strategy_group,customer_id\n";
        for (const auto& a : result.assignments)
            out << a.user_id << ',' << a.preference_group << ',' << a.strategy_group << ',' << a.customer << '\n';
    }
    {
        auto out = open_out(dir / "coupon_levels.csv");
        out << "scope,discount,level\n";
        for (double v : result.focal_levels.distinct())
            out << "focal," << format_double(v) << ',' << result.focal_levels.level(v) << '\n';
        for (double v : result.market_levels.distinct())
            out << "market," << format_double(v) << ',' << result.market_levels.level(v) << '\n';
    }
    {
        auto out = open_out(dir / "exposure.csv");
        out << "preference_group,strategy_group,level,count\n";
        for (std::size_t g = 0; g < result.groups.size(); ++g)
            for (std::size_t s = 0; s < result.groups[g].exposure.size(); ++s)
                for (int l = 0; l < kLevels; ++l)
                    out << g << ',' << s << ',' << l << ',' << result.groups[g].exposure[s][l] << '\n';
    }
    {
        auto out = open_out(dir / "features.csv");
        out << "user_id,received,usage_rate,mean_level,mean_distance,market_received,market_usage_rate,active_days\n";
        for (std::size_t i = 0; i < result.assignments.size(); ++i) {
            out << result.assignments[i].user_id;
            for (int d = 0; d < 4; ++d) out << ',' << format_double(result.stage1_features.at(static_cast<int>(i), d));
            for (int d = 0; d < 3; ++d) out << ',' << format_double(result.stage2_features.at(static_cast<int>(i), d));
            out << '\n';
        }
    }
    {
        auto out = open_out(dir / "quarantine.csv");
        out << "line,reason\n";
        for (const auto& q : result.quarantine) out << q.line << ",\"" << q.reason << "\"\n";
    }
}

std::vector<UserAssignment> read_assignments(const std::filesystem::path& path) {
    const auto table = read_csv(path);
    if (table.header != std::vector<std::string>{"user_id", "preference_group", "strategy_group", "customer_id"})
        throw DataError(path.string() + ": unexpected assignments header");
    std::vector<UserAssignment> out;
    for (const auto& row : table.rows) {
        if (row.size() != 4) throw DataError(path.string() + ": malformed assignments row");
        const auto user = parse_number<std::int64_t>(row[0]);
        if (!user) throw DataError(path.string() + ": bad user_id '" + row[0] + "'");
        out.push_back({*user, parse_int(row[1], "preference_group"), parse_int(row[2], "strategy_group"),
                       parse_int(row[3], "customer_id")});
    }
    return out;
}

std::vector<std::array<std::int64_t, kLevels>> read_exposure(const std::filesystem::path& path,
                                                             int preference_group) {
    const auto table = read_csv(path);
    if (table.header != std::vector<std::string>{"preference_group", "strategy_group", "level", "count"})
        throw DataError(path.string() + ": unexpected exposure header");
    std::vector<std::array<std::int64_t, kLevels>> out;
    for (const auto& row : table.rows) {
        if (row.size() != 4) throw DataError(path.string() + ": malformed exposure row");
        if (parse_int(row[0], "preference_group") != preference_group) continue;
        const int s = parse_int(row[1], "strategy_group");
        const int l = parse_int(row[2], "level");
        if (s < 0 || l < 0 || l >= kLevels) throw DataError(path.string() + ": exposure index out of range");
        if (static_cast<std::size_t>(s) >= out.size()) out.resize(static_cast<std::size_t>(s) + 1, {});
        out[static_cast<std::size_t>(s)][static_cast<std::size_t>(l)] = parse_int(row[3], "count");
    }
    if (out.empty()) throw DataError(path.string() + ": no exposure rows for preference group " + std::to_string(preference_group));
    return out;
}

}  // namespace pricewar::pipeline
