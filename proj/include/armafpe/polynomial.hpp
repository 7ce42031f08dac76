#pragma once

#include <complex>
#include <span>
#include <vector>

namespace armafpe {

/// Polynomials are stored as ascending coefficient vectors: p[k] multiplies z^k.
using Polynomial = std::vector<double>;

/// Product of two polynomials.
///
/// Each output coefficient is accumulated symmetrically (outermost pairs of
/// terms first), so multiply(a, b) and multiply(b, a) agree bit for bit.
Polynomial multiply(std::span<const double> a, std::span<const double> b);

/// a - b, padded to the longer length.
Polynomial subtract(std::span<const double> a, std::span<const double> b);

/// Lag polynomial 1 - c_1 z - ... - c_k z^k.
Polynomial lag_polynomial(std::span<const double> coeffs);

/// Power-series coefficients c_0..c_L of numerator(z) / denominator(z).
///
/// Uses the convolution recursion c_j = p_j - sum_{k=1}^{min(j, deg Q)} q_k c_{j-k}.
/// The denominator must have constant term exactly 1; otherwise
/// std::invalid_argument is thrown. Convergence of the series (denominator
/// roots outside the unit disk) is the caller's responsibility.
std::vector<double> expand_rational(std::span<const double> numerator,
                                    std::span<const double> denominator,
                                    std::size_t length);

/// Complex roots of a polynomial via companion-matrix eigenvalues.
///
/// Trailing zero coefficients are trimmed first, so the effective degree may
/// be lower than coeffs.size() - 1. A constant polynomial has no roots.
std::vector<std::complex<double>> roots(std::span<const double> coeffs);

}  // namespace armafpe
