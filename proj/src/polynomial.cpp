#include "armafpe/polynomial.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <stdexcept>

namespace armafpe {

Polynomial multiply(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) {
        return {};
    }
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    Polynomial out(na + nb - 1, 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        // Terms a_i b_{k-i} for i in [lo, hi].
        const std::size_t lo = k >= nb ? k - nb + 1 : 0;
        const std::size_t hi = std::min(k, na - 1);
        // Swapping a and b maps term i onto term k - i, so pairing the
        // outermost terms makes the accumulation order symmetric.
        std::size_t i = lo;
        std::size_t j = hi;
        double acc = 0.0;
        while (i < j) {
            const double left = a[i] * b[k - i];
            const double right = a[j] * b[k - j];
            acc += left + right;
            ++i;
            --j;
        }
        if (i == j) {
            acc += a[i] * b[k - i];
        }
        out[k] = acc;
    }
    return out;
}

Polynomial subtract(std::span<const double> a, std::span<const double> b) {
    Polynomial out(std::max(a.size(), b.size()), 0.0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        const double ak = k < a.size() ? a[k] : 0.0;
        const double bk = k < b.size() ? b[k] : 0.0;
        out[k] = ak - bk;
    }
    return out;
}

Polynomial lag_polynomial(std::span<const double> coeffs) {
    Polynomial out(coeffs.size() + 1);
    out[0] = 1.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        out[k + 1] = -coeffs[k];
    }
    return out;
}

std::vector<double> expand_rational(std::span<const double> numerator,
                                    std::span<const double> denominator,
                                    std::size_t length) {
    if (denominator.empty() || denominator[0] != 1.0) {
        throw std::invalid_argument("expand_rational: denominator constant term must be 1");
    }
    std::vector<double> c(length + 1, 0.0);
    const std::size_t deg_q = denominator.size() - 1;
    for (std::size_t j = 0; j <= length; ++j) {
        double value = j < numerator.size() ? numerator[j] : 0.0;
        const std::size_t kmax = std::min(j, deg_q);
        for (std::size_t k = 1; k <= kmax; ++k) {
            value -= denominator[k] * c[j - k];
        }
        c[j] = value;
    }
    return c;
}

std::vector<std::complex<double>> roots(std::span<const double> coeffs) {
    std::size_t degree = coeffs.size();
    while (degree > 0 && coeffs[degree - 1] == 0.0) {
        --degree;
    }
    if (degree <= 1) {
        return {};
    }
    degree -= 1;
    const double lead = coeffs[degree];
    if (degree == 1) {
        return {std::complex<double>(-coeffs[0] / lead, 0.0)};
    }
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(degree),
                                                      static_cast<Eigen::Index>(degree));
    for (std::size_t k = 1; k < degree; ++k) {
        companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k - 1)) = 1.0;
    }
    for (std::size_t k = 0; k < degree; ++k) {
        companion(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(degree - 1)) =
            -coeffs[k] / lead;
    }
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    const auto& ev = solver.eigenvalues();
    std::vector<std::complex<double>> out(ev.data(), ev.data() + ev.size());
    return out;
}

}  // namespace armafpe
