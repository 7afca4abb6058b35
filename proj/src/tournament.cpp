#include "pricewar/tournament.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "pricewar/csv.hpp"
#include "pricewar/error.hpp"
#include "pricewar/parallel.hpp"

namespace pricewar {

void TournamentConfig::validate() const {
    market.validate();
    if (cells.empty()) throw ConfigError("tournament needs at least one cell");
    if (seeds.empty()) throw ConfigError("tournament needs at least one seed");
    const auto& names = policy_names();
    for (const auto& [row, col] : cells)
        for (const auto& name : {row, col})
            if (std::find(names.begin(), names.end(), name) == names.end())
                throw ConfigError("unknown policy '" + name + "'");
}

TournamentConfig tournament_from_json(const Json& j) {
    if (!j.is_object()) throw ConfigError("tournament config must be a JSON object");
    for (const auto& item : j.items())
        if (item.key() != "market" && item.key() != "policies" && item.key() != "cells" && item.key() != "seeds")
            throw ConfigError("unknown key '" + item.key() + "' in tournament config");
    TournamentConfig c;
    if (j.contains("market")) c.market = market_from_json(j.at("market"));
    if (j.contains("policies")) c.policies = policy_settings_from_json(j.at("policies"));
    try {
        if (j.contains("cells")) {
            c.cells.clear();
            for (const auto& cell : j.at("cells")) {
                if (!cell.is_array() || cell.size() != 2) throw ConfigError("each cell is a [row, col] pair");
                c.cells.emplace_back(cell[0].get<std::string>(), cell[1].get<std::string>());
            }
        }
        if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad tournament config: ") + e.what());
    }
    c.validate();
    return c;
}

Json to_json(const TournamentConfig& c) {
    Json cells = Json::array();
    for (const auto& [row, col] : c.cells) cells.push_back({row, col});
    return Json{{"market", to_json(c.market)}, {"policies", to_json(c.policies)}, {"cells", cells}, {"seeds", c.seeds}};
}

std::vector<CellResult> run_tournament(const TournamentConfig& config, int threads) {
    config.validate();
    const std::size_t S = config.seeds.size();
    std::vector<CellResult> results(config.cells.size());
    for (std::size_t c = 0; c < results.size(); ++c) {
        results[c].row = config.cells[c].first;
        results[c].col = config.cells[c].second;
        results[c].shares.resize(S);
        results[c].trajectories.resize(S);
        results[c].coerced.resize(S);
    }
    parallel_for(config.cells.size() * S, threads, [&](std::size_t task) {
        const std::size_t c = task / S, s = task % S;
        MarketConfig market = config.market;
        market.seed = config.seeds[s];
        auto first = make_policy(results[c].row, config.policies, market, 0, market.seed, 1);
        auto second = make_policy(results[c].col, config.policies, market, 1, market.seed, 1);
        GameResult game = run_game(market, *first, *second);
        results[c].shares[s] = game.final_share[0];
        results[c].trajectories[s] = std::move(game.trajectory);
        results[c].coerced[s] = game.coerced;
    });
    for (auto& r : results) {
        double sum = 0.0;
        for (double v : r.shares) sum += v;
        r.mean = sum / static_cast<double>(S);
        double ss = 0.0;
        for (double v : r.shares) ss += (v - r.mean) * (v - r.mean);
        r.stderr_ = S > 1 ? std::sqrt(ss / static_cast<double>(S - 1) / static_cast<double>(S)) : 0.0;
    }
    return results;
}

std::string cell_tag(const std::string& row, const std::string& col) {
    std::string tag = row + "_vs_" + col;
    std::replace(tag.begin(), tag.end(), '+', '-');
    return tag;
}

void write_tournament(const std::filesystem::path& dir, const TournamentConfig& config,
                      const std::vector<CellResult>& results) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / "tournament.csv");
    if (!out) throw DataError("cannot write '" + (dir / "tournament.csv").string() + "'");
    out << "row_policy,col_policy,mean_share,stderr,seeds,coerced_row,coerced_col\n";
    for (const auto& r : results) {
        long long cr = 0, cc = 0;
        for (const auto& c : r.coerced) {
            cr += c[0];
            cc += c[1];
        }
        out << r.row << ',' << r.col << ',' << format_double(r.mean) << ',' << format_double(r.stderr_) << ','
            << r.shares.size() << ',' << cr << ',' << cc << '\n';
        for (std::size_t s = 0; s < r.trajectories.size(); ++s)
            write_trajectory(dir / ("trajectory_" + cell_tag(r.row, r.col) + "_" + std::to_string(config.seeds[s]) + ".csv"),
                             r.trajectories[s]);
    }
}

}  // namespace pricewar
