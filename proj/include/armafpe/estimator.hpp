#pragma once

#include "armafpe/arma_core.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace armafpe {

/// Neumaier-compensated sum; insensitive to summation order up to O(eps) relative.
double compensated_sum(std::span<const double> values);

/// Conditional sum of squares S_n(eta) = sum_t e_t(eta)^2.
double sum_of_squares(const ArmaParams& params, std::span<const double> y);

struct FitConfig {
    int max_iters = 200;
    double grad_tol = 1e-8;  // on the largest cosine between a Jacobian column and the residuals
    double step_tol = 1e-10;
    double initial_damping = 1e-3;
    double damping_up = 10.0;
    double damping_down = 0.5;
    /// Explicit starting points. When empty, default_starts(order, space, seed, random_starts)
    /// is used.
    std::vector<ArmaParams> starts;
    int random_starts = 4;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Center of the box (when it lies in the space) plus `random_draws` uniform
/// draws from the space by rejection sampling; an extra draw replaces an
/// infeasible center, so the set always has random_draws + 1 points.
std::vector<ArmaParams> default_starts(ModelOrder order, const ParamSpace& space,
                                       std::uint64_t seed, int random_draws = 4);

struct FitReport {
    ArmaParams estimate;
    double objective = 0.0;
    double sigma2_hat = 0.0;
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd info_matrix;
    double lambda_min = 0.0;
    int start_index = 0;
    /// Objective at the start and after every accepted step of the winning run.
    std::vector<double> objective_trace;
};

/// Error raised by fit for unusable inputs (n <= p_bar, no feasible start).
class FitError : public std::invalid_argument {
public:
    enum class Kind { TooFewObservations, NoFeasibleStart, BadConfig };
    FitError(Kind kind, const std::string& what) : std::invalid_argument(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/**
 * Least-squares estimate over a parameter space by multi-start Levenberg-Marquardt.
 *
 * The residual vector is e(eta) with the analytic Jacobian from the gradient
 * recursion. Trial points that leave the space are halved toward the current
 * iterate (at most 30 times) before the damping is raised, so every iterate
 * stays feasible. Only steps that strictly lower S_n are accepted. The run with
 * the lowest final objective wins; ties go to the earliest start. Starts outside
 * the space are skipped.
 */
FitReport fit(std::span<const double> y, ModelOrder order, const ParamSpace& space,
              const FitConfig& config);

/// One-step least-squares prediction g_{n+1}(eta) from y_1..y_n.
double predict_one_step(const ArmaParams& params, std::span<const double> y);

/// Final prediction error ((n + p_bar) / ((n - p_bar) n)) * S_n.
double fpe(double objective, std::size_t n, int p_bar);
double fpe(const FitReport& report, std::size_t n, int p_bar);

struct CandidateOutcome {
    ModelOrder order;
    std::optional<FitReport> report;
    double fpe = 0.0;
    std::string error;  // nonempty when the candidate failed and was excluded
};

struct Selection {
    ModelOrder chosen;
    std::vector<CandidateOutcome> table;  // in candidate-list order
};

using SpaceFactory = std::function<ParamSpace(ModelOrder)>;

/// Fits every candidate and picks the smallest FPE; exact ties go to the
/// smaller p_bar, then to the earlier candidate. Candidates whose fit throws
/// are excluded and reported. Throws std::invalid_argument if the list is
/// empty or every candidate fails.
Selection select_order(std::span<const double> y, std::span<const ModelOrder> candidates,
                       const SpaceFactory& space_for, const FitConfig& config);

}  // namespace armafpe
