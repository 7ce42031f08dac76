#pragma once

#include "armafpe/arma_core.hpp"
#include "armafpe/estimator.hpp"
#include "armafpe/fisher_diag.hpp"
#include "armafpe/monte_carlo.hpp"
#include "armafpe/noise.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace armafpe::cli {

using json = nlohmann::ordered_json;

/// Malformed or inconsistent configuration / data files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::filesystem::path& path);

ArmaParams params_from_json(const json& j);
json to_json(const ArmaParams& p);

ModelOrder order_from_json(const json& j);
json to_json(const ModelOrder& o);

NoiseSpec noise_from_json(const json& j);
json to_json(const NoiseSpec& n);

/// Missing fields fall back to ParamSpace::default_for(order).
ParamSpace space_from_json(const json& j, ModelOrder order);
json to_json(const ParamSpace& s);

FitConfig fit_config_from_json(const json& j);
json to_json(const FitConfig& c);

/// A missing center defaults to `default_center`.
GridSpec grid_from_json(const json& j, const ArmaParams& default_center);
json to_json(const GridSpec& g);

struct SimulateConfig {
    ArmaParams params;
    std::size_t n = 0;
    NoiseSpec noise;
    std::uint64_t seed = 0;
    ParamSpace space;
};
SimulateConfig simulate_config_from_json(const json& j);
json to_json(const SimulateConfig& c);

struct FitCommandConfig {
    ModelOrder order;
    ParamSpace space;
    FitConfig fit;
};
FitCommandConfig fit_command_config_from_json(const json& j);
json to_json(const FitCommandConfig& c);

struct SelectCommandConfig {
    std::vector<ModelOrder> candidates;
    ParamSpace margins;  // only the tolerances are used; boxes come from each order's default
    FitConfig fit;
};
SelectCommandConfig select_command_config_from_json(const json& j);
json to_json(const SelectCommandConfig& c);

McConfig mc_config_from_json(const json& j);
json to_json(const McConfig& c);

/// Observations from a CSV with a header containing `t` and `y` columns.
Series read_series_csv(const std::filesystem::path& path);

/// 17 significant digits, enough for an exact round trip.
std::string format_double(double v);

}  // namespace armafpe::cli
