#include "armafpe/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace armafpe {

namespace {

std::vector<ArmaParams> shared_start_set(const McConfig& config) {
    std::vector<ArmaParams> starts{config.true_params};
    const auto extra = config.fit_config.starts.empty()
                           ? default_starts(config.order(), config.space, config.fit_config.seed,
                                            config.fit_config.random_starts)
                           : config.fit_config.starts;
    starts.insert(starts.end(), extra.begin(), extra.end());
    return starts;
}

std::vector<double> prefix(const std::vector<double>& y, std::size_t n) {
    return {y.begin(), y.begin() + static_cast<std::ptrdiff_t>(n)};
}

FitRecord fit_replication(const McConfig& config, const FitConfig& fit_config, std::size_t n,
                          std::size_t rep) {
    const auto seed = replication_seed(config.master_seed, n, rep);
    const auto series = simulate(config.true_params, n + 1, config.noise, seed, config.space);
    const auto y = prefix(series.y, n);
    const auto report = fit(y, config.order(), config.space, fit_config);

    FitRecord record;
    record.n = n;
    record.rep = rep;
    record.estimate = report.estimate;
    record.converged = report.converged;
    record.iterations = report.iterations;
    const Eigen::VectorXd diff = report.estimate.to_vector() - config.true_params.to_vector();
    record.norm_stat = std::sqrt(static_cast<double>(n)) * diff.norm();
    record.d = predict_one_step(config.true_params, y) - predict_one_step(report.estimate, y);
    return record;
}

McResult run_fit_replications(const McConfig& config, unsigned threads) {
    McResult result;
    result.start_set = shared_start_set(config);
    FitConfig fit_config = config.fit_config;
    fit_config.starts = result.start_set;

    const std::size_t reps = config.replications;
    result.fit_records.resize(config.sample_sizes.size() * reps);
    parallel_for(result.fit_records.size(), threads, [&](std::size_t k) {
        const std::size_t n = config.sample_sizes[k / reps];
        result.fit_records[k] = fit_replication(config, fit_config, n, k % reps);
    });

    for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
        ConvergenceSummary summary;
        summary.n = config.sample_sizes[i];
        for (std::size_t r = 0; r < reps; ++r) {
            ++summary.fits;
            if (!result.fit_records[i * reps + r].converged) ++summary.nonconverged;
        }
        result.convergence.push_back(summary);
    }
    return result;
}

}  // namespace

void McConfig::validate() const {
    space.validate();
    noise.validate();
    fit_config.validate();
    if (replications < 1) {
        throw std::invalid_argument("replications must be at least 1");
    }
    if (sample_sizes.empty()) {
        throw std::invalid_argument("at least one sample size is required");
    }
    const auto pb = static_cast<std::size_t>(order().p_bar());
    for (auto n : sample_sizes) {
        if (n <= pb) {
            throw std::invalid_argument("every sample size must exceed p1 + p2");
        }
    }
    for (double q : moment_orders) {
        if (!(q >= 1.0) || !std::isfinite(q)) {
            throw std::invalid_argument("moment orders must be finite and >= 1");
        }
        if (!noise.has_moment(q)) {
            throw std::invalid_argument("noise lacks a finite moment of the requested order");
        }
    }
    if (space.dimension() != pb) {
        throw std::invalid_argument("parameter space dimension does not match the true parameters");
    }
    if (grid) {
        grid->validate();
        if (!(grid->center.order() == order())) {
            throw std::invalid_argument("grid center order does not match the true parameters");
        }
    }
    for (const auto& c : candidates) {
        c.validate();
        for (auto n : sample_sizes) {
            if (n <= static_cast<std::size_t>(c.p_bar())) {
                throw std::invalid_argument("every sample size must exceed each candidate's p1 + p2");
            }
        }
    }
    auto verdict = validate_params(true_params, space);
    if (!verdict.valid()) {
        throw InvalidParamsError(std::move(verdict));
    }
}

double McResult::nonconvergence_rate() const {
    std::size_t fits = 0;
    std::size_t bad = 0;
    for (const auto& c : convergence) {
        fits += c.fits;
        bad += c.nonconverged;
    }
    return fits == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(fits);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    const auto workers = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (workers <= 1) {
        for (std::size_t k = 0; k < count; ++k) task(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        while (!failed.load()) {
            const std::size_t k = next.fetch_add(1);
            if (k >= count) return;
            try {
                task(k);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                failed = true;
            }
        }
    };
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    pool.clear();
    if (error) std::rethrow_exception(error);
}

std::pair<double, double> mean_and_std_err(std::span<const double> values) {
    if (values.empty()) {
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    }
    const double count = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / count;
    if (values.size() == 1) {
        return {mean, 0.0};
    }
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (count - 1.0) / count)};
}

std::vector<MomentSummary> aggregate_moments(std::span<const FitRecord> records,
                                             std::span<const std::size_t> sample_sizes,
                                             std::span<const double> orders) {
    std::vector<MomentSummary> out;
    for (auto n : sample_sizes) {
        for (double q : orders) {
            std::vector<double> values;
            for (const auto& r : records) {
                if (r.n == n) values.push_back(std::pow(r.norm_stat, q));
            }
            const auto [mean, se] = mean_and_std_err(values);
            out.push_back({n, q, mean, se});
        }
    }
    return out;
}

std::vector<MspeSummary> aggregate_mspe(std::span<const FitRecord> records,
                                        std::span<const std::size_t> sample_sizes) {
    std::vector<MspeSummary> out;
    for (auto n : sample_sizes) {
        std::vector<double> values;
        for (const auto& r : records) {
            if (r.n == n) values.push_back(r.d * r.d);
        }
        const auto [mean, se] = mean_and_std_err(values);
        const double scale = static_cast<double>(n);
        out.push_back({n, scale * mean, scale * se});
    }
    return out;
}

McResult run_moment_experiment(const McConfig& config, unsigned threads) {
    config.validate();
    if (config.moment_orders.empty()) {
        throw std::invalid_argument("moment experiment needs at least one moment order");
    }
    auto result = run_fit_replications(config, threads);
    result.moments = aggregate_moments(result.fit_records, config.sample_sizes, config.moment_orders);
    return result;
}

McResult run_mspe_experiment(const McConfig& config, unsigned threads) {
    config.validate();
    auto result = run_fit_replications(config, threads);
    result.mspe = aggregate_mspe(result.fit_records, config.sample_sizes);
    return result;
}

McResult run_eig_experiment(const McConfig& config, unsigned threads) {
    config.validate();
    if (!config.grid) {
        throw std::invalid_argument("eigenvalue experiment needs a grid");
    }
    if (config.moment_orders.empty()) {
        throw std::invalid_argument("eigenvalue experiment needs at least one moment order");
    }
    const auto& grid = *config.grid;
    // Fail early if the grid is empty rather than inside a worker.
    if (grid_points(grid, config.space).empty()) {
        throw std::invalid_argument("no grid point lies in the parameter space");
    }
    McResult result;
    const std::size_t reps = config.replications;
    result.eig_records.resize(config.sample_sizes.size() * reps);
    parallel_for(result.eig_records.size(), threads, [&](std::size_t k) {
        const std::size_t n = config.sample_sizes[k / reps];
        const std::size_t rep = k % reps;
        const auto seed = replication_seed(config.master_seed, n, rep);
        const auto series = simulate(config.true_params, n, config.noise, seed, config.space);
        const auto sups = grid_sup_inverse_eig(series.y, grid, config.moment_orders, config.space);
        EigRecord record;
        record.n = n;
        record.rep = rep;
        for (const auto& s : sups) {
            record.stats.push_back(s.value);
            record.argmax.push_back(s.argmax);
            record.degenerate = record.degenerate || s.degenerate;
        }
        result.eig_records[k] = std::move(record);
    });

    for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
        const std::size_t n = config.sample_sizes[i];
        ConvergenceSummary conv;
        conv.n = n;
        for (std::size_t r = 0; r < reps; ++r) {
            if (result.eig_records[i * reps + r].degenerate) ++conv.degenerate;
        }
        result.convergence.push_back(conv);
        for (std::size_t qi = 0; qi < config.moment_orders.size(); ++qi) {
            std::vector<double> values;
            values.reserve(reps);
            for (std::size_t r = 0; r < reps; ++r) {
                values.push_back(result.eig_records[i * reps + r].stats[qi]);
            }
            const auto [mean, se] = mean_and_std_err(values);
            result.eig.push_back({n, config.moment_orders[qi], mean, se});
        }
    }
    return result;
}

McResult run_selection_experiment(const McConfig& config, unsigned threads) {
    config.validate();
    if (config.candidates.empty()) {
        throw std::invalid_argument("selection experiment needs candidate orders");
    }
    const ParamSpace& margins = config.space;
    const SpaceFactory space_for = [&margins](ModelOrder order) {
        auto space = ParamSpace::default_for(order);
        space.root_margin = margins.root_margin;
        space.common_root_tol = margins.common_root_tol;
        space.endpoint_tol = margins.endpoint_tol;
        return space;
    };
    FitConfig fit_config = config.fit_config;
    // Explicit starts belong to the true order; candidates use their own defaults.
    fit_config.starts.clear();

    McResult result;
    const std::size_t reps = config.replications;
    const std::size_t nc = config.candidates.size();
    result.selection_records.resize(config.sample_sizes.size() * reps);
    parallel_for(result.selection_records.size(), threads, [&](std::size_t k) {
        const std::size_t n = config.sample_sizes[k / reps];
        const std::size_t rep = k % reps;
        const auto seed = replication_seed(config.master_seed, n, rep);
        const auto series = simulate(config.true_params, n, config.noise, seed, config.space);
        SelectionRecord record;
        record.n = n;
        record.rep = rep;
        record.fpe.assign(nc, std::numeric_limits<double>::quiet_NaN());
        record.converged.assign(nc, false);
        try {
            const auto selection = select_order(series.y, config.candidates, space_for, fit_config);
            record.chosen = selection.chosen;
            for (std::size_t c = 0; c < nc; ++c) {
                const auto& row = selection.table[c];
                if (row.report) {
                    record.fpe[c] = row.fpe;
                    record.converged[c] = row.report->converged;
                }
            }
        } catch (const std::invalid_argument&) {
            // every candidate failed; recorded as no choice
        }
        result.selection_records[k] = std::move(record);
    });

    for (std::size_t i = 0; i < config.sample_sizes.size(); ++i) {
        const std::size_t n = config.sample_sizes[i];
        std::vector<SelectionSummary> rows(nc);
        ConvergenceSummary conv;
        conv.n = n;
        std::size_t decided = 0;
        for (std::size_t c = 0; c < nc; ++c) {
            rows[c].n = n;
            rows[c].order = config.candidates[c];
        }
        for (std::size_t r = 0; r < reps; ++r) {
            const auto& rec = result.selection_records[i * reps + r];
            for (std::size_t c = 0; c < nc; ++c) {
                if (std::isnan(rec.fpe[c])) {
                    ++rows[c].failures;
                } else {
                    ++conv.fits;
                    if (!rec.converged[c]) ++conv.nonconverged;
                }
            }
            if (!rec.chosen) continue;
            ++decided;
            for (std::size_t c = 0; c < nc; ++c) {
                if (config.candidates[c] == *rec.chosen) {
                    ++rows[c].selected;
                    break;
                }
            }
        }
        for (auto& row : rows) {
            row.frequency = decided == 0 ? 0.0
                                         : static_cast<double>(row.selected) /
                                               static_cast<double>(decided);
            result.selection.push_back(row);
        }
        result.convergence.push_back(conv);
    }
    return result;
}

}  // namespace armafpe
