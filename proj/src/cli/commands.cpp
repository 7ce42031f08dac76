#include "armafpe/cli/commands.hpp"

#include "armafpe/cli/config.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace armafpe::cli {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open output file " + path.string());
    }
    out << contents;
    if (!out) {
        throw std::runtime_error("failed writing " + path.string());
    }
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

std::string q_label(double q) {
    std::ostringstream os;
    os << q;
    return os.str();
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(row);
    }
    return rows;
}

json number_or_null(double v) {
    return std::isfinite(v) ? json(v) : json(nullptr);
}

json fit_summary(const FitReport& report, std::size_t n, ModelOrder order) {
    return json{{"order", to_json(order)},
                {"n", n},
                {"estimate", to_json(report.estimate)},
                {"objective", report.objective},
                {"sigma2_hat", report.sigma2_hat},
                {"fpe", fpe(report, n, order.p_bar())},
                {"lambda_min", report.lambda_min},
                {"info_matrix", matrix_to_json(report.info_matrix)},
                {"iterations", report.iterations},
                {"converged", report.converged},
                {"start_index", report.start_index}};
}

int fit_error_code(const FitError& e) {
    switch (e.kind()) {
        case FitError::Kind::TooFewObservations:
            return kDataMismatch;
        case FitError::Kind::NoFeasibleStart:
            return kInvalidParams;
        case FitError::Kind::BadConfig:
            return kConfigParse;
    }
    return kConfigParse;
}

std::string fit_records_csv(const McResult& result, int p_bar) {
    std::string out = "n,rep,converged,norm_stat,d,iterations";
    for (int k = 1; k <= p_bar; ++k) out += ",eta_" + std::to_string(k);
    out += "\n";
    for (const auto& r : result.fit_records) {
        out += std::to_string(r.n) + "," + std::to_string(r.rep) + "," + (r.converged ? "1" : "0") +
               "," + format_double(r.norm_stat) + "," + format_double(r.d) + "," +
               std::to_string(r.iterations);
        const auto eta = r.estimate.to_vector();
        for (Eigen::Index k = 0; k < eta.size(); ++k) out += "," + format_double(eta[k]);
        out += "\n";
    }
    return out;
}

std::string moments_csv(const std::vector<MomentSummary>& rows) {
    std::string out = "n,q,estimate,std_err\n";
    for (const auto& m : rows) {
        out += std::to_string(m.n) + "," + format_double(m.q) + "," + format_double(m.estimate) +
               "," + format_double(m.std_err) + "\n";
    }
    return out;
}

std::string mspe_csv(const std::vector<MspeSummary>& rows) {
    std::string out = "n,D_hat,std_err\n";
    for (const auto& m : rows) {
        out += std::to_string(m.n) + "," + format_double(m.d_hat) + "," + format_double(m.std_err) +
               "\n";
    }
    return out;
}

std::string eig_records_csv(const McResult& result, const std::vector<double>& orders) {
    std::string out = "n,rep,degenerate";
    for (double q : orders) out += ",stat_q" + q_label(q);
    out += "\n";
    for (const auto& r : result.eig_records) {
        out += std::to_string(r.n) + "," + std::to_string(r.rep) + "," + (r.degenerate ? "1" : "0");
        for (double s : r.stats) out += "," + format_double(s);
        out += "\n";
    }
    return out;
}

std::string order_label(ModelOrder o) {
    return std::to_string(o.p1) + "_" + std::to_string(o.p2);
}

std::string selection_records_csv(const McResult& result, const std::vector<ModelOrder>& candidates) {
    std::string out = "n,rep,chosen_p1,chosen_p2";
    for (const auto& c : candidates) out += ",fpe_" + order_label(c);
    out += "\n";
    for (const auto& r : result.selection_records) {
        out += std::to_string(r.n) + "," + std::to_string(r.rep) + ",";
        out += r.chosen ? std::to_string(r.chosen->p1) + "," + std::to_string(r.chosen->p2) : "-1,-1";
        for (double f : r.fpe) out += "," + format_double(f);
        out += "\n";
    }
    return out;
}

std::string selection_csv(const std::vector<SelectionSummary>& rows) {
    std::string out = "n,p1,p2,selected,frequency,failures\n";
    for (const auto& s : rows) {
        out += std::to_string(s.n) + "," + std::to_string(s.order.p1) + "," +
               std::to_string(s.order.p2) + "," + std::to_string(s.selected) + "," +
               format_double(s.frequency) + "," + std::to_string(s.failures) + "\n";
    }
    return out;
}

template <class F>
int guarded(std::ostream& log, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "error: " << e.what() << "\n";
        return kConfigParse;
    } catch (const InvalidParamsError& e) {
        log << "error: " << e.what() << "\n";
        return kInvalidParams;
    } catch (const FitError& e) {
        log << "error: " << e.what() << "\n";
        return fit_error_code(e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int cmd_simulate(const fs::path& config, const fs::path& out, const RunOptions& options,
                 std::ostream& log) {
    return guarded(log, [&] {
        auto cfg = simulate_config_from_json(read_json_file(config));
        if (options.seed) cfg.seed = *options.seed;
        const auto series = simulate(cfg.params, cfg.n, cfg.noise, cfg.seed, cfg.space);
        std::string csv = "t,y,eps\n";
        for (std::size_t t = 0; t < series.size(); ++t) {
            csv += std::to_string(t + 1) + "," + format_double(series.y[t]) + "," +
                   format_double((*series.eps)[t]) + "\n";
        }
        write_file(out, csv);
        log << "simulate: wrote " << series.size() << " observations to " << out.string() << "\n";
        return static_cast<int>(kOk);
    });
}

int cmd_fit(const fs::path& config, const fs::path& data, const fs::path& out,
            const RunOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        auto cfg = fit_command_config_from_json(read_json_file(config));
        if (options.seed) cfg.fit.seed = *options.seed;
        const auto series = read_series_csv(data);
        if (series.size() <= static_cast<std::size_t>(cfg.order.p_bar())) {
            log << "error: " << series.size() << " observations cannot identify "
                << cfg.order.p_bar() << " parameters\n";
            return static_cast<int>(kDataMismatch);
        }
        const auto report = fit(series.y, cfg.order, cfg.space, cfg.fit);
        auto summary = fit_summary(report, series.size(), cfg.order);
        summary["config"] = to_json(cfg);
        write_file(out, dump(summary));
        if (!report.converged) {
            log << "fit: did not converge within " << cfg.fit.max_iters << " iterations\n";
            return static_cast<int>(kNonConvergence);
        }
        log << "fit: converged after " << report.iterations << " iterations\n";
        return static_cast<int>(kOk);
    });
}

int cmd_select(const fs::path& config, const fs::path& data, const fs::path& out,
               const RunOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        auto cfg = select_command_config_from_json(read_json_file(config));
        if (options.seed) cfg.fit.seed = *options.seed;
        const auto series = read_series_csv(data);
        for (const auto& c : cfg.candidates) {
            if (series.size() <= static_cast<std::size_t>(c.p_bar())) {
                log << "error: too few observations for candidate (" << c.p1 << "," << c.p2 << ")\n";
                return static_cast<int>(kDataMismatch);
            }
        }
        const ParamSpace margins = cfg.margins;
        const SpaceFactory space_for = [&margins](ModelOrder order) {
            auto space = ParamSpace::default_for(order);
            space.root_margin = margins.root_margin;
            space.common_root_tol = margins.common_root_tol;
            space.endpoint_tol = margins.endpoint_tol;
            return space;
        };
        const auto selection = select_order(series.y, cfg.candidates, space_for, cfg.fit);
        json table = json::array();
        bool chosen_converged = true;
        for (const auto& row : selection.table) {
            if (row.report) {
                table.push_back(fit_summary(*row.report, series.size(), row.order));
                if (row.order == selection.chosen) chosen_converged = row.report->converged;
            } else {
                table.push_back(json{{"order", to_json(row.order)}, {"error", row.error}});
            }
        }
        json summary{{"n", series.size()},
                     {"chosen", to_json(selection.chosen)},
                     {"candidates", table},
                     {"config", to_json(cfg)}};
        write_file(out, dump(summary));
        return static_cast<int>(chosen_converged ? kOk : kNonConvergence);
    });
}

int cmd_mc(const fs::path& config, std::string_view kind, const fs::path& out_dir,
           const RunOptions& options, std::ostream& log) {
    return guarded(log, [&] {
        if (kind != "moments" && kind != "mspe" && kind != "eig" && kind != "select") {
            throw ConfigError("unknown experiment kind '" + std::string(kind) +
                              "' (expected moments, mspe, eig or select)");
        }
        auto cfg = mc_config_from_json(read_json_file(config));
        if (options.seed) cfg.master_seed = *options.seed;
        try {
            cfg.validate();
        } catch (const InvalidParamsError&) {
            throw;
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
        if (kind == "eig" && !cfg.grid) throw ConfigError("eig experiment needs a 'grid' section");
        if ((kind == "moments" || kind == "eig") && cfg.moment_orders.empty()) {
            throw ConfigError("this experiment needs 'moment_orders'");
        }
        if (kind == "select" && cfg.candidates.empty()) {
            throw ConfigError("select experiment needs 'candidates'");
        }

        const auto started = std::chrono::steady_clock::now();
        McResult result;
        std::string records;
        std::string aggregate;
        const int p_bar = cfg.order().p_bar();
        if (kind == "moments") {
            result = run_moment_experiment(cfg, options.threads);
            records = fit_records_csv(result, p_bar);
            aggregate = moments_csv(result.moments);
        } else if (kind == "mspe") {
            result = run_mspe_experiment(cfg, options.threads);
            records = fit_records_csv(result, p_bar);
            aggregate = mspe_csv(result.mspe);
        } else if (kind == "eig") {
            result = run_eig_experiment(cfg, options.threads);
            records = eig_records_csv(result, cfg.moment_orders);
            aggregate = moments_csv(result.eig);
        } else {
            result = run_selection_experiment(cfg, options.threads);
            records = selection_records_csv(result, cfg.candidates);
            aggregate = selection_csv(result.selection);
        }
        const double seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

        fs::create_directories(out_dir);
        write_file(out_dir / "replications.csv", records);
        write_file(out_dir / "aggregate.csv", aggregate);

        const double rate = result.nonconvergence_rate();
        const bool gate_ok = rate < kMaxNonconvergenceRate;
        json convergence = json::array();
        for (const auto& c : result.convergence) {
            convergence.push_back(json{{"n", c.n},
                                       {"fits", c.fits},
                                       {"nonconverged", c.nonconverged},
                                       {"degenerate", c.degenerate}});
        }
        json starts = json::array();
        for (const auto& s : result.start_set) starts.push_back(to_json(s));
        json manifest{{"tool", "arma_fpe"},
                      {"version", kToolVersion},
                      {"command", "mc"},
                      {"kind", std::string(kind)},
                      {"master_seed", cfg.master_seed},
                      {"config", to_json(cfg)},
                      {"start_set", starts},
                      {"convergence", convergence},
                      {"nonconvergence_rate", number_or_null(rate)},
                      {"quality_gate", gate_ok ? "passed" : "failed"},
                      {"outputs", json::array({"replications.csv", "aggregate.csv", "manifest.json"})}};
        if (options.record_timing) manifest["wall_clock_seconds"] = seconds;
        write_file(out_dir / "manifest.json", dump(manifest));

        log << "mc " << kind << ": " << cfg.replications << " replications x "
            << cfg.sample_sizes.size() << " sample sizes in " << seconds << " s\n";
        if (!gate_ok) {
            log << "mc: nonconvergence rate " << rate << " is at or above "
                << kMaxNonconvergenceRate << "; outputs flagged\n";
            return static_cast<int>(kQualityGate);
        }
        return static_cast<int>(kOk);
    });
}

}  // namespace armafpe::cli
