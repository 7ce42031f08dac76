#include <catch_amalgamated.hpp>

#include "armafpe/arma_core.hpp"
#include "armafpe/polynomial.hpp"

#include <cmath>
#include <random>

using namespace armafpe;
using Catch::Approx;

namespace {

const ArmaParams kEta0({0.5}, {0.3});

// Central differences of the residual recursion only; no derivative code involved.
std::vector<double> residuals_at(const ArmaParams& p, const Eigen::VectorXd& eta,
                                 const std::vector<double>& y) {
    return residuals(ArmaParams::from_vector(eta, p.order()), y);
}

double rel_err(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(std::abs(numeric), 1.0);
}

ArmaParams random_near(const ArmaParams& center, double radius, std::mt19937_64& rng,
                       const ParamSpace& space) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Eigen::VectorXd c = center.to_vector();
    for (;;) {
        Eigen::VectorXd offset(c.size());
        for (Eigen::Index i = 0; i < c.size(); ++i) offset[i] = u(rng);
        if (offset.norm() > 1.0) continue;
        ArmaParams p = ArmaParams::from_vector(c + radius * offset, center.order());
        if (in_space(p, space)) return p;
    }
}

}  // namespace

TEST_CASE("validate_params examples", "[arma_core]") {
    const auto ar1 = ParamSpace::default_for({1, 0});
    const auto arma11 = ParamSpace::default_for({1, 1});

    CHECK(validate_params(ArmaParams({0.5}, {}), ar1).valid());

    const auto unit = validate_params(ArmaParams({1.0}, {}), ar1);
    CHECK(unit.has(Violation::ArRootInsideMargin));
    CHECK(unit.describe().find("stationarity") != std::string::npos);

    const auto common = validate_params(ArmaParams({0.5}, {0.5}), arma11);
    CHECK(common.has(Violation::CommonRoot));
    CHECK_FALSE(common.has(Violation::ArRootInsideMargin));

    const auto zero = validate_params(ArmaParams({0.0}, {0.0}), arma11);
    CHECK(zero.has(Violation::ZeroEndpoint));

    CHECK(validate_params(ArmaParams({0.5}, {}), arma11).has(Violation::DimensionMismatch));
    CHECK(validate_params(ArmaParams({0.5}, {1.02}), arma11).has(Violation::MaRootInsideMargin));

    ParamSpace narrow = ar1;
    narrow.upper = {0.4};
    CHECK(validate_params(ArmaParams({0.5}, {}), narrow).has(Violation::OutsideBox));
}

TEST_CASE("default box contains every stationary AR(2)", "[arma_core]") {
    const auto space = ParamSpace::default_for({2, 0});
    REQUIRE(space.lower == std::vector<double>{-2.0, -1.0});
    REQUIRE(space.upper == std::vector<double>{2.0, 1.0});
    CHECK(in_space(ArmaParams({1.5, -0.6}, {}), space));
}

TEST_CASE("ArmaParams rejects non-finite coefficients", "[arma_core]") {
    CHECK_THROWS_AS(ArmaParams({std::nan("")}, {}), std::invalid_argument);
    CHECK_THROWS_AS(ArmaParams({0.1}, {INFINITY}), std::invalid_argument);
}

TEST_CASE("simulate with injected innovations", "[arma_core]") {
    SECTION("AR(1)") {
        const auto s = simulate_with_innovations(ArmaParams({0.5}, {}), {1.0, 0.5, -1.0});
        CHECK(s.y == std::vector<double>{1.0, 1.0, -0.5});
    }
    SECTION("MA(1)") {
        const auto s = simulate_with_innovations(ArmaParams({}, {0.3}), {1.0, 1.0});
        REQUIRE(s.y.size() == 2);
        CHECK(s.y[0] == 1.0);
        CHECK(s.y[1] == Approx(0.7).margin(1e-15));
    }
    SECTION("zero forcing") {
        const auto s = simulate_with_innovations(kEta0, std::vector<double>(50, 0.0));
        CHECK(s.y == std::vector<double>(50, 0.0));
    }
    SECTION("invalid parameters") {
        CHECK_THROWS_AS(simulate_with_innovations(ArmaParams({1.0}, {}), {1.0}), InvalidParamsError);
        CHECK_THROWS_AS(simulate(kEta0, 0, NoiseSpec::gaussian(1.0), 1), std::invalid_argument);
    }
}

TEST_CASE("simulate is deterministic in the seed", "[arma_core]") {
    const auto a = simulate(kEta0, 200, NoiseSpec::gaussian(1.0), 42);
    const auto b = simulate(kEta0, 200, NoiseSpec::gaussian(1.0), 42);
    const auto c = simulate(kEta0, 200, NoiseSpec::gaussian(1.0), 43);
    CHECK(a.y == b.y);
    CHECK(a.y != c.y);
    REQUIRE(a.eps);
    CHECK(a.eps->size() == 200);
}

TEST_CASE("residuals", "[arma_core]") {
    SECTION("true parameters recover the innovations") {
        const auto s = simulate(ArmaParams({0.6, -0.2}, {0.4}), 500, NoiseSpec::gaussian(2.0), 9);
        const auto e = residuals(ArmaParams({0.6, -0.2}, {0.4}), s.y);
        REQUIRE(e.size() == s.y.size());
        double worst = 0.0;
        for (std::size_t t = 0; t < e.size(); ++t) worst = std::max(worst, std::abs(e[t] - (*s.eps)[t]));
        CHECK(worst < 1e-12);
    }
    SECTION("AR(1)") {
        const std::vector<double> y{1.0, 2.0, -1.0};
        const auto e = residuals(ArmaParams({0.25}, {}), y);
        CHECK(e == std::vector<double>{1.0, 1.75, -1.5});
    }
    SECTION("MA(1)") {
        const auto e = residuals(ArmaParams({}, {0.3}), std::vector<double>{2.0, 1.0});
        CHECK(e[0] == 2.0);
        CHECK(e[1] == Approx(1.6).margin(1e-15));
    }
}

TEST_CASE("derivative path, AR(1) closed form", "[arma_core]") {
    const std::vector<double> y{1.0, -2.0, 0.5, 3.0};
    const auto path = derivative_path(ArmaParams({0.3}, {}), y, 2);
    CHECK(path.grad(0, 0) == 0.0);
    for (std::size_t t = 1; t < y.size(); ++t) CHECK(path.grad(t, 0) == -y[t - 1]);
    for (double h : path.hess_data) CHECK(h == 0.0);
}

TEST_CASE("derivative path, pure AR block of Hessian is exactly zero", "[arma_core]") {
    const ArmaParams p({0.4, 0.1}, {0.3, -0.2});
    const auto s = simulate(p, 300, NoiseSpec::gaussian(1.0), 5);
    const auto path = derivative_path(p, s.y, 2);
    for (std::size_t t = 0; t < path.n; ++t) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) REQUIRE(path.hess(t, i, j) == 0.0);
        const Eigen::MatrixXd h = path.hess_at(t);
        REQUIRE((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("derivative path, MA(1) at beta = 0", "[arma_core]") {
    const std::vector<double> y{1.0, -0.5, 2.0, 0.25, -1.0};
    const auto path = derivative_path(ArmaParams({}, {0.0}), y, 2);
    // e_t = y_t at beta = 0, so the second derivative is 2 e_{t-2}
    for (std::size_t t = 0; t < y.size(); ++t) {
        const double expected = t >= 2 ? 2.0 * y[t - 2] : 0.0;
        CHECK(path.hess(t, 0, 0) == Approx(expected).margin(1e-15));
    }
}

TEST_CASE("derivative path matches finite differences", "[arma_core]") {
    std::mt19937_64 rng(2024);
    const ArmaParams truth({0.5, -0.3}, {0.4});
    const auto space = ParamSpace::default_for(truth.order());
    const auto s = simulate(truth, 200, NoiseSpec::gaussian(1.0), 77);
    for (int trial = 0; trial < 10; ++trial) {
        const ArmaParams p = random_near(truth, 0.1, rng, space);
        const auto path = derivative_path(p, s.y, 2);
        const Eigen::VectorXd eta = p.to_vector();
        const int k = path.p_bar;
        double worst = 0.0;
        for (int i = 0; i < k; ++i) {
            const double h = 1e-6;
            Eigen::VectorXd up = eta, dn = eta;
            up[i] += h;
            dn[i] -= h;
            const auto eu = residuals_at(p, up, s.y), ed = residuals_at(p, dn, s.y);
            for (std::size_t t = 0; t < path.n; ++t)
                worst = std::max(worst, rel_err(path.grad(t, i), (eu[t] - ed[t]) / (2 * h)));
            for (int j = 0; j < k; ++j) {
                const double g = 1e-4;
                auto shifted = [&](double si, double sj) {
                    Eigen::VectorXd e = eta;
                    e[i] += si * g;
                    e[j] += sj * g;
                    return residuals_at(p, e, s.y);
                };
                const auto pp = shifted(1, 1), pm = shifted(1, -1), mp = shifted(-1, 1),
                           mm = shifted(-1, -1);
                for (std::size_t t = 0; t < path.n; ++t) {
                    const double fd = (pp[t] - pm[t] - mp[t] + mm[t]) / (4 * g * g);
                    worst = std::max(worst, rel_err(path.hess(t, i, j), fd));
                }
            }
        }
        CHECK(worst < 1e-5);
    }
}

TEST_CASE("expand_rational", "[polynomial]") {
    SECTION("geometric series") {
        const auto c = expand_rational(std::vector<double>{1.0}, lag_polynomial(std::vector<double>{0.7}), 30);
        REQUIRE(c.size() == 31);
        for (std::size_t j = 0; j <= 30; ++j) CHECK(c[j] == Approx(std::pow(0.7, j)).epsilon(1e-13));
    }
    SECTION("convolution with the denominator reproduces the numerator") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(-0.4, 0.4);
        for (int trial = 0; trial < 50; ++trial) {
            const Polynomial num{1.0, u(rng), u(rng), u(rng)};
            const Polynomial den{1.0, u(rng), u(rng)};
            const std::size_t L = 40;
            const auto c = expand_rational(num, den, L);
            double worst = 0.0;
            for (std::size_t j = 0; j <= L; ++j) {
                double conv = 0.0;
                for (std::size_t k = 0; k <= j && k < den.size(); ++k) conv += den[k] * c[j - k];
                const double target = j < num.size() ? num[j] : 0.0;
                worst = std::max(worst, std::abs(conv - target));
            }
            CHECK(worst < 1e-12);
        }
    }
    SECTION("equal numerator and denominator") {
        const auto a1 = lag_polynomial(std::vector<double>{0.5});
        const auto a2 = lag_polynomial(std::vector<double>{0.3});
        const auto c = expand_rational(multiply(a1, a2), multiply(a2, a1), 20);
        CHECK(c[0] == 1.0);
        for (std::size_t j = 1; j <= 20; ++j) CHECK(c[j] == 0.0);
    }
    SECTION("denominator must be monic") {
        CHECK_THROWS_AS(expand_rational(std::vector<double>{1.0}, std::vector<double>{2.0, 1.0}, 5),
                        std::invalid_argument);
    }
}

TEST_CASE("polynomial roots", "[polynomial]") {
    const auto r = roots(std::vector<double>{2.0, -3.0, 1.0});  // (z - 1)(z - 2)
    REQUIRE(r.size() == 2);
    std::vector<double> re{r[0].real(), r[1].real()};
    std::sort(re.begin(), re.end());
    CHECK(re[0] == Approx(1.0));
    CHECK(re[1] == Approx(2.0));
    CHECK(roots(std::vector<double>{1.0, 0.0, 0.0}).empty());
    CHECK(roots(std::vector<double>{1.0, -0.5})[0].real() == Approx(2.0));
}

TEST_CASE("filter bank two-route identities", "[arma_core]") {
    std::mt19937_64 rng(17);
    const std::size_t n = 500;
    const std::vector<ArmaParams> truths{kEta0, ArmaParams({0.6, -0.2}, {0.4}), ArmaParams({0.3}, {-0.5, 0.2})};
    for (const auto& truth : truths) {
        const auto space = ParamSpace::default_for(truth.order());
        const auto s = simulate(truth, n, NoiseSpec::gaussian(1.0), 100);
        const auto& eps = *s.eps;
        const auto e0 = residuals(truth, s.y);
        for (int trial = 0; trial < 5; ++trial) {
            const ArmaParams p = random_near(truth, 0.1, rng, space);
            const auto bank = filter_bank(p, truth, n);
            const auto path = derivative_path(p, s.y, 1);
            double worst_grad = 0.0, worst_diff = 0.0;
            for (std::size_t t = 0; t < n; ++t) {
                for (int l = 0; l < path.p_bar; ++l) {
                    double conv = 0.0;
                    for (std::size_t j = 1; j <= t; ++j) conv += bank.coeffs(l, j - 1) * eps[t - j];
                    worst_grad = std::max(worst_grad, std::abs(conv - path.grad(t, l)));
                }
                double conv = 0.0;
                for (std::size_t j = 1; j <= t; ++j) conv += bank.diff_coeffs[j - 1] * eps[t - j];
                worst_diff = std::max(worst_diff, std::abs(conv - (path.eps[t] - e0[t])));
            }
            CHECK(worst_grad < 1e-8);
            CHECK(worst_diff < 1e-8);
        }
    }
}

TEST_CASE("filter bank at the true parameters", "[arma_core]") {
    const auto bank = filter_bank(kEta0, kEta0, 100);
    for (double b : bank.diff_coeffs) CHECK(b == 0.0);
    CHECK(decay_fit(bank.diff_coeffs).identically_zero);
    CHECK_THROWS_AS(filter_bank(ArmaParams({1.0}, {0.3}), kEta0, 10), InvalidParamsError);
}

TEST_CASE("decay_fit", "[arma_core]") {
    SECTION("geometric") {
        std::vector<double> c(40);
        for (std::size_t j = 0; j < c.size(); ++j) c[j] = std::pow(0.5, static_cast<double>(j + 1));
        const auto fit = decay_fit(c);
        CHECK_FALSE(fit.identically_zero);
        CHECK(fit.slope == Approx(-std::log(2.0)).margin(1e-9));
        CHECK(fit.rate == Approx(std::log(2.0)).margin(1e-9));
        for (std::size_t j = 0; j < c.size(); ++j)
            CHECK(std::abs(c[j]) <= fit.envelope * std::exp(-fit.rate * static_cast<double>(j + 1)) * (1 + 1e-12));
    }
    SECTION("perturbed parameters decay") {
        const auto bank = filter_bank(ArmaParams({0.4}, {0.2}), kEta0, 200);
        const Eigen::VectorXd row = bank.coeffs.row(0);
        CHECK(decay_fit(std::span<const double>(row.data(), row.size())).slope < 0.0);
    }
    SECTION("empty input") { CHECK_THROWS_AS(decay_fit(std::span<const double>{}), std::invalid_argument); }
}
