#include "armafpe/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string_view>

namespace armafpe::cli {

namespace {

void require_object(const json& j, std::string_view ctx) {
    if (!j.is_object()) {
        throw ConfigError(std::string(ctx) + ": expected an object");
    }
}

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, std::string_view ctx) {
    require_object(j, ctx);
    for (const auto& item : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw ConfigError(std::string(ctx) + ": unknown key '" + item.key() + "'");
        }
    }
}

const json& require(const json& j, const char* key, std::string_view ctx) {
    if (!j.contains(key)) {
        throw ConfigError(std::string(ctx) + ": missing '" + key + "'");
    }
    return j.at(key);
}

double as_double(const json& j, std::string_view ctx) {
    if (!j.is_number()) {
        throw ConfigError(std::string(ctx) + ": expected a number");
    }
    return j.get<double>();
}

std::uint64_t as_u64(const json& j, std::string_view ctx) {
    if (!j.is_number_unsigned()) {
        throw ConfigError(std::string(ctx) + ": expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

int as_int(const json& j, std::string_view ctx) {
    if (!j.is_number_integer()) {
        throw ConfigError(std::string(ctx) + ": expected an integer");
    }
    return j.get<int>();
}

std::vector<double> as_doubles(const json& j, std::string_view ctx) {
    if (!j.is_array()) {
        throw ConfigError(std::string(ctx) + ": expected an array of numbers");
    }
    std::vector<double> out;
    for (const auto& v : j) out.push_back(as_double(v, ctx));
    return out;
}

double double_or(const json& j, const char* key, double fallback, std::string_view ctx) {
    return j.contains(key) ? as_double(j.at(key), std::string(ctx) + "." + key) : fallback;
}

template <class F>
auto converting(F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidParamsError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
}

std::vector<ModelOrder> orders_from_json(const json& j, std::string_view ctx) {
    if (!j.is_array() || j.empty()) {
        throw ConfigError(std::string(ctx) + ": expected a nonempty array of orders");
    }
    std::vector<ModelOrder> out;
    for (const auto& o : j) out.push_back(order_from_json(o));
    return out;
}

json orders_to_json(const std::vector<ModelOrder>& orders) {
    json arr = json::array();
    for (const auto& o : orders) arr.push_back(to_json(o));
    return arr;
}

}  // namespace

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config parse error in " + path.string() + ": " + e.what());
    }
}

ArmaParams params_from_json(const json& j) {
    check_keys(j, {"ar", "ma"}, "params");
    const auto ar = j.contains("ar") ? as_doubles(j.at("ar"), "params.ar") : std::vector<double>{};
    const auto ma = j.contains("ma") ? as_doubles(j.at("ma"), "params.ma") : std::vector<double>{};
    return converting([&] { return ArmaParams(ar, ma); });
}

json to_json(const ArmaParams& p) {
    return json{{"ar", p.ar}, {"ma", p.ma}};
}

ModelOrder order_from_json(const json& j) {
    check_keys(j, {"p1", "p2"}, "order");
    ModelOrder o{j.contains("p1") ? as_int(j.at("p1"), "order.p1") : 0,
                 j.contains("p2") ? as_int(j.at("p2"), "order.p2") : 0};
    converting([&] {
        o.validate();
        return 0;
    });
    return o;
}

json to_json(const ModelOrder& o) {
    return json{{"p1", o.p1}, {"p2", o.p2}};
}

NoiseSpec noise_from_json(const json& j) {
    check_keys(j, {"family", "sigma2", "dof"}, "noise");
    NoiseSpec spec;
    const std::string family = j.value("family", std::string("gaussian"));
    if (family == "gaussian") {
        spec.family = NoiseSpec::Family::Gaussian;
    } else if (family == "student_t") {
        spec.family = NoiseSpec::Family::StudentT;
    } else {
        throw ConfigError("noise.family: expected 'gaussian' or 'student_t'");
    }
    spec.sigma2 = double_or(j, "sigma2", 1.0, "noise");
    spec.dof = double_or(j, "dof", 0.0, "noise");
    converting([&] {
        spec.validate();
        return 0;
    });
    return spec;
}

json to_json(const NoiseSpec& n) {
    json j{{"family", n.family_name()}, {"sigma2", n.sigma2}};
    if (n.family == NoiseSpec::Family::StudentT) j["dof"] = n.dof;
    return j;
}

ParamSpace space_from_json(const json& j, ModelOrder order) {
    auto space = converting([&] { return ParamSpace::default_for(order); });
    if (j.is_null()) {
        return space;
    }
    check_keys(j, {"lower", "upper", "root_margin", "common_root_tol", "endpoint_tol"}, "space");
    if (j.contains("lower")) space.lower = as_doubles(j.at("lower"), "space.lower");
    if (j.contains("upper")) space.upper = as_doubles(j.at("upper"), "space.upper");
    space.root_margin = double_or(j, "root_margin", space.root_margin, "space");
    space.common_root_tol = double_or(j, "common_root_tol", space.common_root_tol, "space");
    space.endpoint_tol = double_or(j, "endpoint_tol", space.endpoint_tol, "space");
    converting([&] {
        space.validate();
        return 0;
    });
    if (space.dimension() != static_cast<std::size_t>(order.p_bar())) {
        throw ConfigError("space: bounds length does not match p1 + p2");
    }
    return space;
}

json to_json(const ParamSpace& s) {
    return json{{"lower", s.lower},
                {"upper", s.upper},
                {"root_margin", s.root_margin},
                {"common_root_tol", s.common_root_tol},
                {"endpoint_tol", s.endpoint_tol}};
}

FitConfig fit_config_from_json(const json& j) {
    FitConfig c;
    if (j.is_null()) {
        return c;
    }
    check_keys(j,
               {"max_iters", "grad_tol", "step_tol", "initial_damping", "damping_up",
                "damping_down", "starts", "random_starts", "seed"},
               "fit");
    if (j.contains("max_iters")) c.max_iters = as_int(j.at("max_iters"), "fit.max_iters");
    c.grad_tol = double_or(j, "grad_tol", c.grad_tol, "fit");
    c.step_tol = double_or(j, "step_tol", c.step_tol, "fit");
    c.initial_damping = double_or(j, "initial_damping", c.initial_damping, "fit");
    c.damping_up = double_or(j, "damping_up", c.damping_up, "fit");
    c.damping_down = double_or(j, "damping_down", c.damping_down, "fit");
    if (j.contains("random_starts")) {
        c.random_starts = as_int(j.at("random_starts"), "fit.random_starts");
    }
    if (j.contains("seed")) c.seed = as_u64(j.at("seed"), "fit.seed");
    if (j.contains("starts")) {
        if (!j.at("starts").is_array()) throw ConfigError("fit.starts: expected an array");
        for (const auto& s : j.at("starts")) c.starts.push_back(params_from_json(s));
    }
    converting([&] {
        c.validate();
        return 0;
    });
    return c;
}

json to_json(const FitConfig& c) {
    json starts = json::array();
    for (const auto& s : c.starts) starts.push_back(to_json(s));
    return json{{"max_iters", c.max_iters},
                {"grad_tol", c.grad_tol},
                {"step_tol", c.step_tol},
                {"initial_damping", c.initial_damping},
                {"damping_up", c.damping_up},
                {"damping_down", c.damping_down},
                {"starts", starts},
                {"random_starts", c.random_starts},
                {"seed", c.seed}};
}

GridSpec grid_from_json(const json& j, const ArmaParams& default_center) {
    check_keys(j, {"center", "radius", "points_per_axis"}, "grid");
    GridSpec g;
    g.center = j.contains("center") ? params_from_json(j.at("center")) : default_center;
    g.radius = double_or(j, "radius", g.radius, "grid");
    if (j.contains("points_per_axis")) {
        g.points_per_axis = as_int(j.at("points_per_axis"), "grid.points_per_axis");
    }
    converting([&] {
        g.validate();
        return 0;
    });
    return g;
}

json to_json(const GridSpec& g) {
    return json{{"center", to_json(g.center)},
                {"radius", g.radius},
                {"points_per_axis", g.points_per_axis}};
}

SimulateConfig simulate_config_from_json(const json& j) {
    check_keys(j, {"params", "n", "noise", "seed", "space"}, "simulate config");
    SimulateConfig c;
    c.params = params_from_json(require(j, "params", "simulate config"));
    const auto n = as_u64(require(j, "n", "simulate config"), "n");
    if (n == 0) throw ConfigError("n must be positive");
    c.n = static_cast<std::size_t>(n);
    c.noise = j.contains("noise") ? noise_from_json(j.at("noise")) : NoiseSpec{};
    c.seed = j.contains("seed") ? as_u64(j.at("seed"), "seed") : 0;
    const ModelOrder order = c.params.order();
    converting([&] {
        order.validate();
        return 0;
    });
    c.space = space_from_json(j.value("space", json()), order);
    return c;
}

json to_json(const SimulateConfig& c) {
    return json{{"params", to_json(c.params)},
                {"n", c.n},
                {"noise", to_json(c.noise)},
                {"seed", c.seed},
                {"space", to_json(c.space)}};
}

FitCommandConfig fit_command_config_from_json(const json& j) {
    check_keys(j, {"order", "space", "fit"}, "fit config");
    FitCommandConfig c;
    c.order = order_from_json(require(j, "order", "fit config"));
    c.space = space_from_json(j.value("space", json()), c.order);
    c.fit = fit_config_from_json(j.value("fit", json()));
    return c;
}

json to_json(const FitCommandConfig& c) {
    return json{{"order", to_json(c.order)}, {"space", to_json(c.space)}, {"fit", to_json(c.fit)}};
}

SelectCommandConfig select_command_config_from_json(const json& j) {
    check_keys(j, {"candidates", "space", "fit"}, "select config");
    SelectCommandConfig c;
    c.candidates = orders_from_json(require(j, "candidates", "select config"), "candidates");
    const json margins = j.value("space", json::object());
    check_keys(margins, {"root_margin", "common_root_tol", "endpoint_tol"}, "space");
    c.margins.root_margin = double_or(margins, "root_margin", c.margins.root_margin, "space");
    c.margins.common_root_tol =
        double_or(margins, "common_root_tol", c.margins.common_root_tol, "space");
    c.margins.endpoint_tol = double_or(margins, "endpoint_tol", c.margins.endpoint_tol, "space");
    if (!(c.margins.root_margin > 0.0) || !(c.margins.common_root_tol > 0.0) ||
        !(c.margins.endpoint_tol > 0.0)) {
        throw ConfigError("space: tolerances must be positive");
    }
    c.fit = fit_config_from_json(j.value("fit", json()));
    return c;
}

json to_json(const SelectCommandConfig& c) {
    return json{{"candidates", orders_to_json(c.candidates)},
                {"space",
                 {{"root_margin", c.margins.root_margin},
                  {"common_root_tol", c.margins.common_root_tol},
                  {"endpoint_tol", c.margins.endpoint_tol}}},
                {"fit", to_json(c.fit)}};
}

McConfig mc_config_from_json(const json& j) {
    check_keys(j,
               {"true_params", "noise", "sample_sizes", "replications", "master_seed",
                "moment_orders", "grid", "space", "fit", "candidates"},
               "mc config");
    McConfig c;
    c.true_params = params_from_json(require(j, "true_params", "mc config"));
    const ModelOrder order = c.true_params.order();
    converting([&] {
        order.validate();
        return 0;
    });
    c.noise = j.contains("noise") ? noise_from_json(j.at("noise")) : NoiseSpec{};
    const auto& sizes = require(j, "sample_sizes", "mc config");
    if (!sizes.is_array() || sizes.empty()) {
        throw ConfigError("sample_sizes: expected a nonempty array");
    }
    for (const auto& n : sizes) c.sample_sizes.push_back(static_cast<std::size_t>(as_u64(n, "sample_sizes")));
    c.replications = static_cast<std::size_t>(as_u64(require(j, "replications", "mc config"), "replications"));
    c.master_seed = j.contains("master_seed") ? as_u64(j.at("master_seed"), "master_seed") : 0;
    if (j.contains("moment_orders")) c.moment_orders = as_doubles(j.at("moment_orders"), "moment_orders");
    c.space = space_from_json(j.value("space", json()), order);
    c.fit_config = fit_config_from_json(j.value("fit", json()));
    if (j.contains("grid")) c.grid = grid_from_json(j.at("grid"), c.true_params);
    if (j.contains("candidates")) c.candidates = orders_from_json(j.at("candidates"), "candidates");
    converting([&] {
        try {
            c.validate();
        } catch (const InvalidParamsError&) {
            // reported separately as invalid parameters
        }
        return 0;
    });
    return c;
}

json to_json(const McConfig& c) {
    json j{{"true_params", to_json(c.true_params)},
           {"noise", to_json(c.noise)},
           {"sample_sizes", c.sample_sizes},
           {"replications", c.replications},
           {"master_seed", c.master_seed},
           {"moment_orders", c.moment_orders},
           {"space", to_json(c.space)},
           {"fit", to_json(c.fit_config)}};
    if (c.grid) j["grid"] = to_json(*c.grid);
    if (!c.candidates.empty()) j["candidates"] = orders_to_json(c.candidates);
    return j;
}

Series read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open data file " + path.string());
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("data file is empty: " + path.string());
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) header.push_back(cell);
    }
    const auto find = [&](std::string_view name) -> std::ptrdiff_t {
        const auto it = std::find(header.begin(), header.end(), name);
        return it == header.end() ? -1 : it - header.begin();
    };
    const auto t_col = find("t");
    const auto y_col = find("y");
    if (t_col < 0 || y_col < 0) {
        throw ConfigError("data file needs 't' and 'y' columns: " + path.string());
    }
    Series series;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++row;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != header.size()) {
            throw ConfigError("data row " + std::to_string(row) + " has the wrong number of fields");
        }
        const auto parse = [&](const std::string& text) {
            char* end = nullptr;
            const double v = std::strtod(text.c_str(), &end);
            if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) {
                throw ConfigError("data row " + std::to_string(row) + ": bad number '" + text + "'");
            }
            return v;
        };
        const double t = parse(cells[static_cast<std::size_t>(t_col)]);
        if (t != static_cast<double>(row)) {
            throw ConfigError("data rows must have t = 1, 2, ... in order");
        }
        series.y.push_back(parse(cells[static_cast<std::size_t>(y_col)]));
    }
    return series;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace armafpe::cli
