#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "pricewar/game.hpp"

namespace pricewar {

/// Splits one line on commas. Quoting is not supported; none of the formats
/// handled here need it.
std::vector<std::string> split_csv_line(std::string_view line);

/// Reads a whole CSV file. The header row is returned separately. Blank lines
/// and a trailing '\r' are ignored. Throws DataError if the file cannot be opened.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

/// Fixed-precision formatting shared by every writer so outputs are byte-stable.
std::string format_double(double value);

int parse_int(const std::string& text, const char* field);
double parse_double(const std::string& text, const char* field);

inline constexpr std::string_view kRecordHeader = "period,customer_id,own_award,count,demand";

void write_records(std::ostream& out, const std::vector<ConsumptionRecord>& records);
void write_records(const std::filesystem::path& path, const std::vector<ConsumptionRecord>& records);

/// Parses the record schema and validates each row. Throws DataError naming the
/// offending line.
std::vector<ConsumptionRecord> read_records(const std::filesystem::path& path);

}  // namespace pricewar
