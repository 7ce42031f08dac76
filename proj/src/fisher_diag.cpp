#include "armafpe/fisher_diag.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace armafpe {

FisherSummary summarize_information(const Eigen::Ref<const Eigen::MatrixXd>& grad_rows,
                                    ArmaParams at_params) {
    if (grad_rows.rows() == 0) {
        throw std::invalid_argument("information matrix needs at least one observation");
    }
    FisherSummary out;
    const double n = static_cast<double>(grad_rows.rows());
    out.matrix = (grad_rows.transpose() * grad_rows) / n;
    // Exact symmetry; the product is symmetric up to rounding only.
    out.matrix = 0.5 * (out.matrix + out.matrix.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(out.matrix, Eigen::EigenvaluesOnly);
    out.lambda_min = solver.eigenvalues().minCoeff();
    out.lambda_max = solver.eigenvalues().maxCoeff();
    out.at_params = std::move(at_params);
    return out;
}

FisherSummary fisher_matrix(const ArmaParams& params, std::span<const double> y) {
    if (y.empty()) {
        throw std::invalid_argument("fisher_matrix: empty series");
    }
    const auto path = derivative_path(params, y, 1);
    return summarize_information(path.grad, params);
}

SubadditivityCheck min_eig_subadditivity_check(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                               double tolerance) {
    if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0) {
        throw std::invalid_argument("subadditivity check needs two square matrices of equal size");
    }
    if (!a.isApprox(a.transpose(), 1e-14) || !b.isApprox(b.transpose(), 1e-14)) {
        throw std::invalid_argument("subadditivity check needs symmetric matrices");
    }
    auto min_eig = [](const Eigen::MatrixXd& m) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
        return solver.eigenvalues().minCoeff();
    };
    const Eigen::MatrixXd sum = a + b;
    SubadditivityCheck out;
    out.slack = min_eig(sum) - min_eig(a) - min_eig(b);
    out.holds = out.slack >= -tolerance;
    return out;
}

void GridSpec::validate() const {
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("grid radius must be positive");
    }
    if (points_per_axis < 1 || points_per_axis % 2 == 0) {
        throw std::invalid_argument("grid points_per_axis must be odd and positive");
    }
}

std::vector<ArmaParams> grid_points(const GridSpec& grid, const ParamSpace& space) {
    grid.validate();
    const Eigen::VectorXd center = grid.center.to_vector();
    const ModelOrder order = grid.center.order();
    const auto dim = static_cast<std::size_t>(center.size());
    const int m = grid.points_per_axis;

    // Offsets radius * (2k - (m - 1)) / (m - 1) put a coarser odd grid's points
    // exactly onto a finer one's when the finer count is 2x - 1.
    std::vector<double> offsets(static_cast<std::size_t>(m), 0.0);
    if (m > 1) {
        for (int k = 0; k < m; ++k) {
            offsets[static_cast<std::size_t>(k)] =
                grid.radius * static_cast<double>(2 * k - (m - 1)) / static_cast<double>(m - 1);
        }
    }

    std::vector<ArmaParams> out;
    std::vector<int> idx(dim, 0);
    while (true) {
        Eigen::VectorXd eta = center;
        for (std::size_t d = 0; d < dim; ++d) {
            eta[static_cast<Eigen::Index>(d)] += offsets[static_cast<std::size_t>(idx[d])];
        }
        auto point = ArmaParams::from_vector(eta, order);
        if (in_space(point, space)) {
            out.push_back(std::move(point));
        }
        std::size_t d = dim;
        while (d > 0) {
            --d;
            if (++idx[d] < m) break;
            idx[d] = 0;
            if (d == 0) return out;
        }
    }
}

std::vector<GridSupResult> grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid,
                                                std::span<const double> qs,
                                                const ParamSpace& space) {
    if (y.empty()) {
        throw std::invalid_argument("grid_sup_inverse_eig: empty series");
    }
    for (double q : qs) {
        if (!(q >= 1.0)) {
            throw std::invalid_argument("grid_sup_inverse_eig: moment order must be >= 1");
        }
    }
    const auto points = grid_points(grid, space);
    if (points.empty()) {
        throw std::invalid_argument("grid_sup_inverse_eig: no grid point lies in the parameter space");
    }
    std::vector<GridSupResult> out(qs.size());
    for (auto& r : out) {
        r.value = -std::numeric_limits<double>::infinity();
        r.points = points.size();
    }
    for (const auto& point : points) {
        const auto info = fisher_matrix(point, y);
        for (std::size_t k = 0; k < qs.size(); ++k) {
            auto& r = out[k];
            if (r.degenerate) continue;
            if (!(info.lambda_min > 0.0)) {
                r.degenerate = true;
                r.value = std::numeric_limits<double>::infinity();
                r.argmax = point;
                r.lambda_min_at_argmax = info.lambda_min;
                continue;
            }
            const double v = std::pow(info.lambda_min, -qs[k]);
            if (v > r.value) {
                r.value = v;
                r.argmax = point;
                r.lambda_min_at_argmax = info.lambda_min;
            }
        }
    }
    return out;
}

GridSupResult grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid, double q,
                                   const ParamSpace& space) {
    const double qs[] = {q};
    return grid_sup_inverse_eig(y, grid, qs, space).front();
}

GridSupResult grid_sup_inverse_eig(std::span<const double> y, const GridSpec& grid, double q) {
    return grid_sup_inverse_eig(y, grid, q, ParamSpace::default_for(grid.center.order()));
}

}  // namespace armafpe
