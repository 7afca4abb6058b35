#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pricewar/config_io.hpp"
#include "pricewar/simulator.hpp"

namespace pricewar {

struct TournamentConfig {
    MarketConfig market;
    PolicySettings policies;
    /// (company 1 policy, company 2 policy) pairs.
    std::vector<std::pair<std::string, std::string>> cells;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

    void validate() const;
};

TournamentConfig tournament_from_json(const Json& j);
Json to_json(const TournamentConfig& config);

struct CellResult {
    std::string row;
    std::string col;
    std::vector<double> shares;  // company 1 final share, one per seed
    double mean = 0.0;
    double stderr_ = 0.0;
    std::vector<std::vector<SharePoint>> trajectories;
    std::vector<std::array<int, 2>> coerced;
};

/// Plays every (cell, seed) game, spreading games over `threads` workers. Each
/// game uses market.seed = seed, so results do not depend on the thread count.
std::vector<CellResult> run_tournament(const TournamentConfig& config, int threads = 1);

/// File-name tag of a cell, e.g. "dqn-lda_vs_random".
std::string cell_tag(const std::string& row, const std::string& col);

/// Writes tournament.csv and trajectory_<cell>_<seed>.csv.
void write_tournament(const std::filesystem::path& dir, const TournamentConfig& config,
                      const std::vector<CellResult>& results);

}  // namespace pricewar
