#include "pricewar/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "pricewar/error.hpp"

namespace pricewar {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            table.header = split_csv_line(line);
            first = false;
        } else {
            table.rows.push_back(split_csv_line(line));
        }
    }
    return table;
}

std::string format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", value);
    return buf;
}

int parse_int(const std::string& text, const char* field) {
    int value = 0;
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc() || ptr != end)
        throw DataError(std::string("cannot parse integer field '") + field + "': '" + text + "'");
    return value;
}

double parse_double(const std::string& text, const char* field) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return value;
    } catch (const std::exception&) {
        throw DataError(std::string("cannot parse number field '") + field + "': '" + text + "'");
    }
}

void write_records(std::ostream& out, const std::vector<ConsumptionRecord>& records) {
    out << kRecordHeader << '\n';
    for (const auto& r : records) {
        out << r.period << ',' << r.customer << ',' << r.own_award << ',' << r.count << ',';
        if (r.demand) out << *r.demand;
        out << '\n';
    }
}

void write_records(const std::filesystem::path& path,
                   const std::vector<ConsumptionRecord>& records) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_records(out, records);
}

std::vector<ConsumptionRecord> read_records(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header != split_csv_line(kRecordHeader))
        throw DataError("'" + path.string() + "' does not have the record header '" +
                        std::string(kRecordHeader) + "'");
    std::vector<ConsumptionRecord> out;
    out.reserve(table.rows.size());
    std::size_t line_no = 1;
    for (const auto& row : table.rows) {
        ++line_no;
        try {
            if (row.size() != 5) throw DataError("expected 5 fields");
            ConsumptionRecord r;
            r.period = parse_int(row[0], "period");
            r.customer = parse_int(row[1], "customer_id");
            r.own_award = parse_int(row[2], "own_award");
            r.count = parse_int(row[3], "count");
            if (!row[4].empty()) r.demand = parse_int(row[4], "demand");
            validate_record(r);
            out.push_back(r);
        } catch (const DataError& e) {
            throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace pricewar
