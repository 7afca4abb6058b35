#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pricewar/game.hpp"
#include "pricewar/kmeans.hpp"

namespace pricewar::pipeline {

/// One row of the offline coupon log. Dates are day numbers (days since
/// 1970-01-01); the raw file stores them as yyyymmdd.
struct CouponRecord {
    std::int64_t user_id = 0;
    std::int64_t merchant_id = 0;
    std::optional<std::int64_t> coupon_id;
    std::string discount_rate;
    std::optional<double> discount;  // fraction of the price taken off
    std::optional<double> distance;
    std::optional<int> date_received;
    std::optional<int> date_used;
};

struct QuarantinedRow {
    std::size_t line = 0;
    std::string reason;
};

struct CouponLog {
    std::vector<CouponRecord> rows;
    std::vector<QuarantinedRow> quarantine;
};

/// "x:y" (spend x, save y) gives y/x; a plain fraction r in (0, 1] is a price
/// multiplier and gives 1 - r. Returns nullopt when the text parses as neither.
std::optional<double> parse_discount(const std::string& text);

/// Parses yyyymmdd into a day number; nullopt on malformed dates.
std::optional<int> parse_date(const std::string& text);

/// Reads the raw CSV (`User_id,Merchant_id,Coupon_id,Discount_rate,Distance,
/// Date_received,Date`, "null" for missing values). Malformed rows are
/// quarantined with a reason instead of aborting the load.
CouponLog read_coupon_log(const std::filesystem::path& path);
CouponLog parse_coupon_log(std::istream& in, const std::string& source = "<stream>");

/// Maps discount values to levels 1 (low), 2 (mid), 3 (high) by tertiles of the
/// distinct values given. Level 0 is reserved for "no coupon".
class LevelBinning {
public:
    LevelBinning() = default;
    explicit LevelBinning(std::vector<double> values);
    int level(double discount) const;
    const std::vector<double>& distinct() const { return distinct_; }
    bool degenerate() const { return distinct_.size() < 2; }

private:
    std::vector<double> distinct_;
};

inline constexpr int kLevels = 3;

struct PipelineConfig {
    std::int64_t focal_merchant = 0;
    int preference_groups = 4;
    int strategy_groups = 10;
    std::uint64_t seed = 1;
    /// Records dated on or after this day (yyyymmdd) go to the test split.
    std::optional<int> split_date;
    int kmeans_iterations = 100;
};

struct UserAssignment {
    std::int64_t user_id = 0;
    int preference_group = 0;
    int strategy_group = 0;
    int customer = 0;  // index inside the preference group's record file
};

struct GroupOutput {
    std::vector<ConsumptionRecord> train;
    std::vector<ConsumptionRecord> test;
    /// Coupons from other merchants received by each strategy group, per level.
    std::vector<std::array<std::int64_t, kLevels>> exposure;
    int strategy_groups = 0;
};

struct PipelineResult {
    std::vector<UserAssignment> assignments;  // sorted by user id
    std::vector<GroupOutput> groups;          // one per preference group
    FeatureMatrix stage1_features;            // raw, rows follow `assignments`
    FeatureMatrix stage2_features;
    LevelBinning focal_levels;
    LevelBinning market_levels;
    std::vector<QuarantinedRow> quarantine;
    std::size_t excluded_users = 0;  // users with no record for the focal merchant
    std::vector<std::string> warnings;
};

/// Two-stage clustering and record emission for one focal merchant. Throws
/// DataError if the merchant does not occur in the log.
PipelineResult preprocess(const CouponLog& log, const PipelineConfig& config);

/// Writes records_pg<g>.csv (and records_pg<g>_test.csv when split),
/// assignments.csv, coupon_levels.csv, exposure.csv, features.csv and
/// quarantine.csv.
void write_outputs(const std::filesystem::path& dir, const PipelineResult& result, bool split);

/// Reads assignments.csv back.
std::vector<UserAssignment> read_assignments(const std::filesystem::path& path);

/// Reads exposure.csv as per-strategy-group counts for one preference group.
std::vector<std::array<std::int64_t, kLevels>> read_exposure(const std::filesystem::path& path,
                                                             int preference_group);

}  // namespace pricewar::pipeline
