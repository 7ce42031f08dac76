#include "armafpe/arma_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace armafpe {

namespace {

double binomial(int n, int k) {
    double out = 1.0;
    for (int i = 1; i <= k; ++i) {
        out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return out;
}

bool roots_outside(const std::vector<std::complex<double>>& zs, double radius) {
    return std::all_of(zs.begin(), zs.end(),
                       [radius](const std::complex<double>& z) { return std::abs(z) >= radius; });
}

}  // namespace

void ModelOrder::validate() const {
    if (p1 < 0 || p2 < 0) {
        throw std::invalid_argument("model orders must be nonnegative");
    }
    if (p1 + p2 < 1) {
        throw std::invalid_argument("model needs at least one parameter (p1 + p2 >= 1)");
    }
}

ArmaParams::ArmaParams(std::vector<double> ar_coeffs, std::vector<double> ma_coeffs)
    : ar(std::move(ar_coeffs)), ma(std::move(ma_coeffs)) {
    auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(ar.begin(), ar.end(), finite) || !std::all_of(ma.begin(), ma.end(), finite)) {
        throw std::invalid_argument("ARMA coefficients must be finite");
    }
}

Eigen::VectorXd ArmaParams::to_vector() const {
    Eigen::VectorXd eta(static_cast<Eigen::Index>(ar.size() + ma.size()));
    Eigen::Index k = 0;
    for (double a : ar) eta[k++] = a;
    for (double b : ma) eta[k++] = b;
    return eta;
}

ArmaParams ArmaParams::from_vector(const Eigen::VectorXd& eta, ModelOrder order) {
    if (eta.size() != order.p_bar()) {
        throw std::invalid_argument("parameter vector length does not match model order");
    }
    std::vector<double> ar(eta.data(), eta.data() + order.p1);
    std::vector<double> ma(eta.data() + order.p1, eta.data() + order.p_bar());
    return {std::move(ar), std::move(ma)};
}

ParamSpace ParamSpace::default_for(ModelOrder order) {
    order.validate();
    ParamSpace space;
    for (int k = 1; k <= order.p1; ++k) {
        const double b = binomial(order.p1, k);
        space.lower.push_back(-b);
        space.upper.push_back(b);
    }
    for (int k = 1; k <= order.p2; ++k) {
        const double b = binomial(order.p2, k);
        space.lower.push_back(-b);
        space.upper.push_back(b);
    }
    return space;
}

void ParamSpace::validate() const {
    if (lower.size() != upper.size() || lower.empty()) {
        throw std::invalid_argument("parameter box bounds must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < lower.size(); ++i) {
        if (!(lower[i] < upper[i])) {
            throw std::invalid_argument("parameter box needs lower < upper in every coordinate");
        }
    }
    if (!(root_margin > 0.0) || !(common_root_tol > 0.0) || !(endpoint_tol > 0.0)) {
        throw std::invalid_argument("root margin and tolerances must be positive");
    }
}

std::string describe(Violation v) {
    switch (v) {
        case Violation::DimensionMismatch:
            return "parameter dimension does not match the parameter space";
        case Violation::OutsideBox:
            return "parameters outside the coordinate box";
        case Violation::ArRootInsideMargin:
            return "stationarity: AR polynomial has a root inside the margin around the unit disk";
        case Violation::MaRootInsideMargin:
            return "invertibility: MA polynomial has a root inside the margin around the unit disk";
        case Violation::CommonRoot:
            return "coprimality: AR and MA polynomials share a root";
        case Violation::ZeroEndpoint:
            return "minimality: |a_p1| + |b_p2| is zero";
    }
    return "unknown violation";
}

bool Validity::has(Violation v) const {
    return std::find(violations.begin(), violations.end(), v) != violations.end();
}

std::string Validity::describe() const {
    if (valid()) {
        return "valid";
    }
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        if (i > 0) os << "; ";
        os << armafpe::describe(violations[i]);
    }
    return os.str();
}

Validity validate_params(const ArmaParams& params, const ParamSpace& space) {
    Validity out;
    const std::size_t p1 = params.ar.size();
    const std::size_t p2 = params.ma.size();
    if (p1 + p2 != space.lower.size() || space.upper.size() != space.lower.size()) {
        out.violations.push_back(Violation::DimensionMismatch);
        return out;
    }
    for (std::size_t i = 0; i < p1 + p2; ++i) {
        const double v = i < p1 ? params.ar[i] : params.ma[i - p1];
        if (v < space.lower[i] || v > space.upper[i]) {
            out.violations.push_back(Violation::OutsideBox);
            break;
        }
    }
    const auto ar_roots = roots(lag_polynomial(params.ar));
    const auto ma_roots = roots(lag_polynomial(params.ma));
    const double radius = 1.0 + space.root_margin;
    if (!roots_outside(ar_roots, radius)) {
        out.violations.push_back(Violation::ArRootInsideMargin);
    }
    if (!roots_outside(ma_roots, radius)) {
        out.violations.push_back(Violation::MaRootInsideMargin);
    }
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto& za : ar_roots) {
        for (const auto& zb : ma_roots) {
            min_dist = std::min(min_dist, std::abs(za - zb));
        }
    }
    if (min_dist < space.common_root_tol) {
        out.violations.push_back(Violation::CommonRoot);
    }
    const double endpoint = (p1 > 0 ? std::abs(params.ar.back()) : 0.0) +
                            (p2 > 0 ? std::abs(params.ma.back()) : 0.0);
    if (endpoint < space.endpoint_tol) {
        out.violations.push_back(Violation::ZeroEndpoint);
    }
    return out;
}

bool in_space(const ArmaParams& params, const ParamSpace& space) {
    return validate_params(params, space).valid();
}

InvalidParamsError::InvalidParamsError(Validity verdict)
    : std::invalid_argument("invalid ARMA parameters: " + verdict.describe()),
      verdict_(std::move(verdict)) {}

Series simulate_with_innovations(const ArmaParams& params, std::vector<double> eps,
                                 const ParamSpace& space) {
    auto verdict = validate_params(params, space);
    if (!verdict.valid()) {
        throw InvalidParamsError(std::move(verdict));
    }
    const std::size_t n = eps.size();
    const std::size_t p1 = params.ar.size();
    const std::size_t p2 = params.ma.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double v = eps[t];
        for (std::size_t i = 1; i <= std::min(p1, t); ++i) {
            v += params.ar[i - 1] * y[t - i];
        }
        for (std::size_t j = 1; j <= std::min(p2, t); ++j) {
            v -= params.ma[j - 1] * eps[t - j];
        }
        y[t] = v;
    }
    return {std::move(y), std::move(eps)};
}

Series simulate_with_innovations(const ArmaParams& params, std::vector<double> eps) {
    return simulate_with_innovations(params, std::move(eps), ParamSpace::default_for(params.order()));
}

Series simulate(const ArmaParams& params, std::size_t n, const NoiseSpec& noise,
                std::uint64_t seed, const ParamSpace& space) {
    if (n == 0) {
        throw std::invalid_argument("simulate: n must be positive");
    }
    auto verdict = validate_params(params, space);
    if (!verdict.valid()) {
        throw InvalidParamsError(std::move(verdict));
    }
    return simulate_with_innovations(params, draw_innovations(noise, n, seed), space);
}

Series simulate(const ArmaParams& params, std::size_t n, const NoiseSpec& noise,
                std::uint64_t seed) {
    return simulate(params, n, noise, seed, ParamSpace::default_for(params.order()));
}

std::vector<double> residuals(const ArmaParams& params, std::span<const double> y) {
    const std::size_t n = y.size();
    const std::size_t p1 = params.ar.size();
    const std::size_t p2 = params.ma.size();
    std::vector<double> eps(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double v = y[t];
        for (std::size_t i = 1; i <= std::min(p1, t); ++i) {
            v -= params.ar[i - 1] * y[t - i];
        }
        for (std::size_t j = 1; j <= std::min(p2, t); ++j) {
            v += params.ma[j - 1] * eps[t - j];
        }
        eps[t] = v;
    }
    return eps;
}

Eigen::MatrixXd DerivativePath::hess_at(std::size_t t) const {
    Eigen::MatrixXd h(p_bar, p_bar);
    for (int i = 0; i < p_bar; ++i) {
        for (int j = 0; j < p_bar; ++j) {
            h(i, j) = hess(t, i, j);
        }
    }
    return h;
}

DerivativePath derivative_path(const ArmaParams& params, std::span<const double> y, int order) {
    if (order < 0 || order > 2) {
        throw std::invalid_argument("derivative_path: order must be 0, 1 or 2");
    }
    DerivativePath path;
    path.n = y.size();
    path.order = order;
    path.eps = residuals(params, y);
    const std::size_t n = path.n;
    const std::size_t p1 = params.ar.size();
    const std::size_t p2 = params.ma.size();
    const std::size_t pb = p1 + p2;
    path.p_bar = static_cast<int>(pb);
    if (order == 0) {
        return path;
    }

    auto& g = path.grad;
    g.setZero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(pb));
    const auto& beta = params.ma;
    for (std::size_t t = 0; t < n; ++t) {
        const auto row = static_cast<Eigen::Index>(t);
        for (std::size_t i = 1; i <= p1; ++i) {
            g(row, static_cast<Eigen::Index>(i - 1)) = t >= i ? -y[t - i] : 0.0;
        }
        for (std::size_t j = 1; j <= p2; ++j) {
            g(row, static_cast<Eigen::Index>(p1 + j - 1)) = t >= j ? path.eps[t - j] : 0.0;
        }
        for (std::size_t s = 1; s <= std::min(p2, t); ++s) {
            g.row(row) += beta[s - 1] * g.row(row - static_cast<Eigen::Index>(s));
        }
    }
    if (order == 1) {
        return path;
    }

    // Differentiating the gradient recursions once more:
    //   d2e/da_i da_k = sum_s b_s d2e_{t-s}/da_i da_k                       (identically 0)
    //   d2e/da_i db_l = (grad e_{t-l})_i + sum_s b_s d2e_{t-s}/da_i db_l
    //   d2e/db_j db_l = (grad e_{t-l})_{p1+j} + (grad e_{t-j})_{p1+l} + sum_s b_s d2e_{t-s}/db_j db_l
    auto& h = path.hess_data;
    h.assign(n * pb * pb, 0.0);
    auto at = [&](std::size_t t, std::size_t a, std::size_t b) -> double& {
        return h[(t * pb + a) * pb + b];
    };
    auto grad_at = [&](std::size_t t, std::size_t lag, std::size_t k) {
        return t >= lag ? g(static_cast<Eigen::Index>(t - lag), static_cast<Eigen::Index>(k)) : 0.0;
    };
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t a = 0; a < pb; ++a) {
            for (std::size_t b = a; b < pb; ++b) {
                double v = 0.0;
                if (a < p1 && b >= p1) {
                    const std::size_t l = b - p1 + 1;
                    v = grad_at(t, l, a);
                } else if (a >= p1) {
                    const std::size_t j = a - p1 + 1;
                    const std::size_t l = b - p1 + 1;
                    v = grad_at(t, l, a) + grad_at(t, j, b);
                }
                for (std::size_t s = 1; s <= std::min(p2, t); ++s) {
                    v += beta[s - 1] * at(t - s, a, b);
                }
                at(t, a, b) = v;
                at(t, b, a) = v;
            }
        }
    }
    return path;
}

FilterBank filter_bank(const ArmaParams& params, const ArmaParams& true_params, std::size_t length) {
    if (!(params.order() == true_params.order())) {
        throw std::invalid_argument("filter_bank: parameter orders differ");
    }
    const ModelOrder order = params.order();
    const ParamSpace space = ParamSpace::default_for(order);
    for (const auto* p : {&params, &true_params}) {
        auto verdict = validate_params(*p, space);
        if (!verdict.valid()) {
            throw InvalidParamsError(std::move(verdict));
        }
    }
    const Polynomial a1 = lag_polynomial(params.ar);
    const Polynomial a2 = lag_polynomial(params.ma);
    const Polynomial a1_0 = lag_polynomial(true_params.ar);
    const Polynomial a2_0 = lag_polynomial(true_params.ma);

    Polynomial neg_a2_0 = a2_0;
    for (auto& c : neg_a2_0) c = -c;
    const Polynomial den1 = multiply(a2, a1_0);
    const Polynomial num2 = multiply(a1, a2_0);
    const Polynomial den2 = multiply(multiply(a2, a2), a1_0);

    const auto c1 = expand_rational(neg_a2_0, den1, length);
    const auto c2 = expand_rational(num2, den2, length);
    // num2 - den1 vanishes exactly at params == true_params since multiply is symmetric.
    const auto diff = expand_rational(subtract(num2, den1), den1, length);

    FilterBank bank;
    const auto pb = static_cast<std::size_t>(order.p_bar());
    bank.coeffs.setZero(static_cast<Eigen::Index>(pb), static_cast<Eigen::Index>(length));
    for (std::size_t l = 1; l <= pb; ++l) {
        const bool is_ar = l <= static_cast<std::size_t>(order.p1);
        const std::size_t shift = is_ar ? l : l - static_cast<std::size_t>(order.p1);
        const auto& c = is_ar ? c1 : c2;
        for (std::size_t j = shift; j <= length; ++j) {
            bank.coeffs(static_cast<Eigen::Index>(l - 1), static_cast<Eigen::Index>(j - 1)) =
                c[j - shift];
        }
    }
    bank.diff_coeffs.assign(diff.begin() + 1, diff.end());
    return bank;
}

DecayFit decay_fit(std::span<const double> coeffs) {
    if (coeffs.empty()) {
        throw std::invalid_argument("decay_fit: empty coefficient vector");
    }
    DecayFit fit;
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double mag = std::abs(coeffs[k]);
        if (mag == 0.0) continue;
        const double x = static_cast<double>(k + 1);
        const double ly = std::log(mag);
        sx += x;
        sy += ly;
        sxx += x * x;
        sxy += x * ly;
        ++fit.points;
    }
    if (fit.points == 0) {
        fit.identically_zero = true;
        return fit;
    }
    if (fit.points >= 2) {
        const double m = static_cast<double>(fit.points);
        fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    }
    fit.rate = std::max(0.0, -fit.slope);
    for (std::size_t k = 0; k < coeffs.size(); ++k) {
        const double x = static_cast<double>(k + 1);
        fit.envelope = std::max(fit.envelope, std::abs(coeffs[k]) * std::exp(fit.rate * x));
    }
    return fit;
}

}  // namespace armafpe
