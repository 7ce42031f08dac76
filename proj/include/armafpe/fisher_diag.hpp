#pragma once

#include "armafpe/arma_core.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace armafpe {

/// Normalized information matrix n^{-1} sum_t grad e_t (grad e_t)^T and its spectrum.
struct FisherSummary {
    Eigen::MatrixXd matrix;
    double lambda_min = 0.0;
    double lambda_max = 0.0;
    ArmaParams at_params;
};

/// Summary built from arbitrary gradient rows (one row per time step).
FisherSummary summarize_information(const Eigen::Ref<const Eigen::MatrixXd>& grad_rows,
                                    ArmaParams at_params);

/// Information matrix at `params` from the analytic gradient recursion.
/// Throws std::invalid_argument on empty data.
FisherSummary fisher_matrix(const ArmaParams& params, std::span<const double> y);

struct SubadditivityCheck {
    bool holds = false;
    /// lambda_min(a + b) - lambda_min(a) - lambda_min(b); nonnegative in exact arithmetic.
    double slack = 0.0;
};

/// Checks lambda_min(a + b) >= lambda_min(a) + lambda_min(b) for symmetric a, b.
/// `tolerance` absorbs eigen-solver rounding. Throws std::invalid_argument
/// if the inputs are not square, equal-sized and symmetric.
SubadditivityCheck min_eig_subadditivity_check(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                               double tolerance = 1e-12);

/// Tensor grid of points_per_axis equispaced values on [center - radius, center + radius]
/// in every coordinate.
struct GridSpec {
    ArmaParams center;
    double radius = 0.1;
    int points_per_axis = 5;

    /// Throws std::invalid_argument unless radius > 0 and points_per_axis is odd and positive.
    void validate() const;
};

/// Grid points that pass validate_params against `space`, in lexicographic order.
std::vector<ArmaParams> grid_points(const GridSpec& grid, const ParamSpace& space);

struct GridSupResult {
    /// max over surviving grid points of lambda_min^{-q}; +inf when degenerate.
    double value = 0.0;
    ArmaParams argmax;
    double lambda_min_at_argmax = 0.0;
    std::size_t points = 0;
    bool degenerate = false;
};

/**
 * Grid estimate of sup_eta lambda_min^{-q} of the normalized information matrix
 * over the ball around grid.center.
 *
 * The maximum over a finite grid is a lower bound for the supremum over the
 * ball. Grid points failing `space` are dropped. A nonpositive lambda_min at
 * some point makes the result degenerate: value is +inf and argmax is that
 * point. Throws std::invalid_argument if no grid point survives or q < 1.
 */
GridSupResult grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid, double q,
                                   const ParamSpace& space);
GridSupResult grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid, double q);

/// Same statistic for several moment orders from one pass over the grid.
std::vector<GridSupResult> grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid,
                                                std::span<const double> qs,
                                                const ParamSpace& space);

}  // namespace armafpe
