#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eocs/fault.hpp"
#include "eocs/grid.hpp"
#include "eocs/nn.hpp"
#include "eocs/search.hpp"

namespace eocs {

struct GridConfig {
    std::filesystem::path case_path;
    std::vector<int> replace;  // generator buses converted to inverter sources
    SourceKind kind = SourceKind::fips;
    RenewableDefaults defaults;
};

struct DataConfig {
    int train = 2000;
    int test = 500;
    int validation = 200;
    int min_outages = 0;
    int max_outages = 2;
    std::uint64_t seed = 1;
};

struct ModelConfig {
    int mlp_depth = 3;
    int hidden_cap = 128;
    nn::Aggregator aggregator = nn::Aggregator::mean;
    int sage_layers = 3;
    int hidden = 0;  // 0: same as bus count
    std::uint64_t seed = 7;
};

struct EvalConfig {
    std::vector<double> tolerances{0.01, 0.05};
    double ps_factor = 1.2;
    int timing_repetitions = 30;
    int timing_warmup = 3;
};

struct Config {
    GridConfig grid;
    FaultSolverOptions fault;
    int k = 2;
    int levels = 3;
    int workers = 1;
    GaParams ga;
    std::uint64_t ga_seed = 1;
    ModelConfig model;
    nn::TrainConfig train;
    DataConfig data;
    EvalConfig eval;
};

/// Parses TOML text. Relative paths resolve against `base_dir`. Missing keys
/// keep their defaults; unknown sections are rejected.
Config parse_config(const std::string& toml_text, const std::filesystem::path& base_dir = {});
Config load_config(const std::filesystem::path& path);

/// The case file with the configured replacement applied.
GridModel build_grid(const Config& config);

nn::PgnnArchitecture architecture_for(const GridModel& grid, const Config& config);

}  // namespace eocs
