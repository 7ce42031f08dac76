#pragma once

#include "armafpe/noise.hpp"
#include "armafpe/polynomial.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * ARMA(p1, p2) models under zero initial conditions.
 *
 * The model is
 *
 *   y_t = a_1 y_{t-1} + ... + a_p1 y_{t-p1} - b_1 e_{t-1} - ... - b_p2 e_{t-p2} + e_t
 *
 * with y_t = e_t = 0 for t <= 0. Parameter vectors are laid out as
 * (a_1..a_p1, b_1..b_p2). Time index t = 1..n is stored at position t - 1.
 */
namespace armafpe {

struct ModelOrder {
    int p1 = 0;  // AR order
    int p2 = 0;  // MA order

    int p_bar() const { return p1 + p2; }

    /// Throws std::invalid_argument unless p1, p2 >= 0 and p1 + p2 >= 1.
    void validate() const;

    friend bool operator==(const ModelOrder&, const ModelOrder&) = default;
};

/// A point in parameter space. Validity is checked separately by
/// validate_params so that optimizers can represent trial points anywhere.
struct ArmaParams {
    std::vector<double> ar;
    std::vector<double> ma;

    ArmaParams() = default;
    /// Throws std::invalid_argument if any coefficient is not finite.
    ArmaParams(std::vector<double> ar_coeffs, std::vector<double> ma_coeffs);

    ModelOrder order() const {
        return {static_cast<int>(ar.size()), static_cast<int>(ma.size())};
    }
    Eigen::VectorXd to_vector() const;
    static ArmaParams from_vector(const Eigen::VectorXd& eta, ModelOrder order);

    friend bool operator==(const ArmaParams&, const ArmaParams&) = default;
};

/// Compact parameter region: a coordinate box intersected with root margins.
struct ParamSpace {
    std::vector<double> lower;
    std::vector<double> upper;
    double root_margin = 0.01;      // roots of both lag polynomials need |z| >= 1 + root_margin
    double common_root_tol = 0.01;  // minimum distance between AR and MA roots
    double endpoint_tol = 1e-6;     // minimum |a_p1| + |b_p2|

    std::size_t dimension() const { return lower.size(); }

    /// Box [-C(p, k), C(p, k)] per lag k, which contains every stationary
    /// (resp. invertible) coefficient vector of that order.
    static ParamSpace default_for(ModelOrder order);

    /// Throws std::invalid_argument on inconsistent bounds or nonpositive tolerances.
    void validate() const;
};

enum class Violation {
    DimensionMismatch,
    OutsideBox,
    ArRootInsideMargin,
    MaRootInsideMargin,
    CommonRoot,
    ZeroEndpoint,
};

std::string describe(Violation v);

struct Validity {
    std::vector<Violation> violations;

    bool valid() const { return violations.empty(); }
    bool has(Violation v) const;
    std::string describe() const;
};

Validity validate_params(const ArmaParams& params, const ParamSpace& space);
bool in_space(const ArmaParams& params, const ParamSpace& space);

/// Thrown where valid parameters are a precondition; carries the verdict.
class InvalidParamsError : public std::invalid_argument {
public:
    explicit InvalidParamsError(Validity verdict);
    const Validity& verdict() const { return verdict_; }

private:
    Validity verdict_;
};

/// Observations y_1..y_n, plus the true innovations when simulated.
struct Series {
    std::vector<double> y;
    std::optional<std::vector<double>> eps;

    std::size_t size() const { return y.size(); }
};

/// Simulates n observations with innovations drawn from `noise`.
/// Throws InvalidParamsError if params fall outside `space`, and
/// std::invalid_argument if n == 0.
Series simulate(const ArmaParams& params, std::size_t n, const NoiseSpec& noise,
                std::uint64_t seed, const ParamSpace& space);
Series simulate(const ArmaParams& params, std::size_t n, const NoiseSpec& noise,
                std::uint64_t seed);

/// Runs the model recursion on a given innovation sequence.
Series simulate_with_innovations(const ArmaParams& params, std::vector<double> eps,
                                 const ParamSpace& space);
Series simulate_with_innovations(const ArmaParams& params, std::vector<double> eps);

/// e_t(eta) = y_t - sum a_i y_{t-i} + sum b_j e_{t-j}(eta), exact, zero initial conditions.
std::vector<double> residuals(const ArmaParams& params, std::span<const double> y);

/// Residuals with their first and (optionally) second derivatives in eta.
struct DerivativePath {
    std::size_t n = 0;
    int p_bar = 0;
    int order = 0;
    std::vector<double> eps;
    /// n x p_bar; row t - 1 is grad e_t(eta). Empty when order == 0.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> grad;
    /// n * p_bar * p_bar, row-major per time step. Empty unless order == 2.
    std::vector<double> hess_data;

    double hess(std::size_t t, int i, int j) const {
        return hess_data[(t * static_cast<std::size_t>(p_bar) + static_cast<std::size_t>(i)) *
                             static_cast<std::size_t>(p_bar) +
                         static_cast<std::size_t>(j)];
    }
    Eigen::MatrixXd hess_at(std::size_t t) const;
};

/// order 0: residuals; 1: plus gradients; 2: plus Hessians.
DerivativePath derivative_path(const ArmaParams& params, std::span<const double> y, int order);

/// Power-series coefficients expressing derivatives and residual differences
/// as linear filters of the true innovations.
///
/// coeffs(l, j - 1) holds the weight of e_{t-j} in component l of grad e_t(eta);
/// diff_coeffs[j - 1] holds the weight of e_{t-j} in e_t(eta) - e_t(eta0).
struct FilterBank {
    Eigen::MatrixXd coeffs;
    std::vector<double> diff_coeffs;
};

/// Builds the filter bank at `params` for data generated at `true_params`.
/// Throws InvalidParamsError if either point is invalid under default margins.
FilterBank filter_bank(const ArmaParams& params, const ArmaParams& true_params, std::size_t length);

/// Exponential envelope |c_j| <= envelope * exp(-rate * j), j = 1..size,
/// plus the least-squares slope of log|c_j| over nonzero entries.
struct DecayFit {
    bool identically_zero = false;
    double slope = 0.0;
    double rate = 0.0;
    double envelope = 0.0;
    std::size_t points = 0;
};

/// Throws std::invalid_argument on empty input.
DecayFit decay_fit(std::span<const double> coeffs);

}  // namespace armafpe
