#pragma once

#include "armafpe/arma_core.hpp"
#include "armafpe/estimator.hpp"
#include "armafpe/fisher_diag.hpp"
#include "armafpe/noise.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace armafpe {

struct McConfig {
    ArmaParams true_params;
    ParamSpace space;
    NoiseSpec noise;
    std::vector<std::size_t> sample_sizes;
    std::size_t replications = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> moment_orders;
    std::optional<GridSpec> grid;
    FitConfig fit_config;
    /// Candidate orders for selection experiments.
    std::vector<ModelOrder> candidates;

    ModelOrder order() const { return true_params.order(); }

    /// Throws std::invalid_argument describing the first problem found, or
    /// InvalidParamsError if true_params lie outside the space.
    void validate() const;
};

/// One fitted replication. The series has n + 1 observations; the fit and
/// both predictors use the first n.
struct FitRecord {
    std::size_t n = 0;
    std::size_t rep = 0;
    ArmaParams estimate;
    double norm_stat = 0.0;  // || sqrt(n) (eta_hat - eta0) ||
    double d = 0.0;          // g_{n+1}(eta0) - g_{n+1}(eta_hat)
    bool converged = false;
    int iterations = 0;
};

struct EigRecord {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::vector<double> stats;  // one per moment order
    std::vector<ArmaParams> argmax;
    bool degenerate = false;
};

struct SelectionRecord {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::optional<ModelOrder> chosen;
    std::vector<double> fpe;          // NaN where the candidate failed
    std::vector<bool> converged;      // per candidate
};

struct MomentSummary {
    std::size_t n = 0;
    double q = 0.0;
    double estimate = 0.0;
    double std_err = 0.0;
};

struct MspeSummary {
    std::size_t n = 0;
    double d_hat = 0.0;  // n * mean(d^2)
    double std_err = 0.0;
};

struct SelectionSummary {
    std::size_t n = 0;
    ModelOrder order;
    std::size_t selected = 0;
    double frequency = 0.0;
    std::size_t failures = 0;
};

struct ConvergenceSummary {
    std::size_t n = 0;
    std::size_t fits = 0;
    std::size_t nonconverged = 0;
    std::size_t degenerate = 0;
};

struct McResult {
    std::vector<FitRecord> fit_records;
    std::vector<EigRecord> eig_records;
    std::vector<SelectionRecord> selection_records;

    std::vector<MomentSummary> moments;
    std::vector<MspeSummary> mspe;
    std::vector<MomentSummary> eig;
    std::vector<SelectionSummary> selection;
    std::vector<ConvergenceSummary> convergence;

    /// Start points shared by every fit (true parameters first).
    std::vector<ArmaParams> start_set;

    double nonconvergence_rate() const;
};

/// Runs `count` independent tasks on up to `threads` workers (0 = hardware
/// concurrency). Exceptions are rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& task);

/// Sample mean and standard error sd / sqrt(N), summed in index order.
std::pair<double, double> mean_and_std_err(std::span<const double> values);

/// Aggregates recomputed from records; the run_* functions use these too.
std::vector<MomentSummary> aggregate_moments(std::span<const FitRecord> records,
                                             std::span<const std::size_t> sample_sizes,
                                             std::span<const double> orders);
std::vector<MspeSummary> aggregate_mspe(std::span<const FitRecord> records,
                                        std::span<const std::size_t> sample_sizes);

/// Fit replications shared by the moment and MSPE experiments.
McResult run_moment_experiment(const McConfig& config, unsigned threads = 1);
McResult run_mspe_experiment(const McConfig& config, unsigned threads = 1);
McResult run_eig_experiment(const McConfig& config, unsigned threads = 1);
McResult run_selection_experiment(const McConfig& config, unsigned threads = 1);

}  // namespace armafpe
