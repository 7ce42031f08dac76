#include <catch_amalgamated.hpp>

#include "armafpe/fisher_diag.hpp"

#include <cmath>
#include <random>

using namespace armafpe;
using Catch::Approx;

namespace {

const ArmaParams kEta0({0.5}, {0.3});

Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int dim) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::MatrixXd m(dim, dim);
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) m(i, j) = u(rng);
    return 0.5 * (m + m.transpose());
}

}  // namespace

TEST_CASE("AR(1) information is the mean squared lag", "[fisher_diag]") {
    const auto s = simulate(ArmaParams({0.6}, {}), 250, NoiseSpec::gaussian(1.0), 21);
    double acc = 0.0;
    for (std::size_t t = 0; t + 1 < s.y.size(); ++t) acc += s.y[t] * s.y[t];
    const double expected = acc / 250.0;
    const auto info = fisher_matrix(ArmaParams({0.6}, {}), s.y);
    CHECK(info.matrix(0, 0) == Approx(expected).epsilon(1e-13));
    CHECK(info.lambda_min == Approx(expected).epsilon(1e-13));
    CHECK(info.lambda_max == info.lambda_min);
}

TEST_CASE("information from the filter form matches the recursion", "[fisher_diag]") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    const std::size_t n = 400;
    const auto s = simulate(kEta0, n, NoiseSpec::gaussian(1.0), 8);
    const auto& eps = *s.eps;
    for (int trial = 0; trial < 5; ++trial) {
        const ArmaParams p({0.5 + u(rng)}, {0.3 + u(rng)});
        if (!in_space(p, ParamSpace::default_for({1, 1}))) continue;
        const auto bank = filter_bank(p, kEta0, n);
        Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2);
        for (std::size_t t = 0; t < n; ++t)
            for (int l = 0; l < 2; ++l)
                for (std::size_t j = 1; j <= t; ++j) rows(t, l) += bank.coeffs(l, j - 1) * eps[t - j];
        const auto filtered = summarize_information(rows, p);
        const auto direct = fisher_matrix(p, s.y);
        CHECK((filtered.matrix - direct.matrix).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("information scales with the data in the pure AR case", "[fisher_diag]") {
    const ArmaParams p({0.4, 0.2}, {});
    const auto s = simulate(p, 300, NoiseSpec::gaussian(1.0), 13);
    const double c = 3.0;
    std::vector<double> scaled(s.y);
    for (auto& v : scaled) v *= c;
    const auto a = fisher_matrix(p, s.y), b = fisher_matrix(p, scaled);
    CHECK(b.matrix.isApprox(c * c * a.matrix, 1e-13));
    CHECK(b.lambda_min == Approx(c * c * a.lambda_min).epsilon(1e-12));
}

TEST_CASE("information is positive semidefinite", "[fisher_diag]") {
    const auto s = simulate(kEta0, 100, NoiseSpec::gaussian(1.0), 2);
    const auto info = fisher_matrix(ArmaParams({0.2}, {-0.4}), s.y);
    CHECK(info.lambda_min >= 0.0);
    CHECK(info.lambda_min <= info.lambda_max);
    CHECK(info.matrix == info.matrix.transpose());
    CHECK_THROWS_AS(fisher_matrix(kEta0, std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("minimum eigenvalue subadditivity", "[fisher_diag]") {
    SECTION("identity") {
        const auto id = Eigen::MatrixXd::Identity(3, 3);
        const auto r = min_eig_subadditivity_check(id, id);
        CHECK(r.holds);
        CHECK(r.slack == Approx(0.0).margin(1e-14));
    }
    SECTION("complementary diagonals") {
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2), b = Eigen::MatrixXd::Zero(2, 2);
        a(0, 0) = 1.0;
        b(1, 1) = 1.0;
        const auto r = min_eig_subadditivity_check(a, b);
        CHECK(r.holds);
        CHECK(r.slack == Approx(1.0).epsilon(1e-14));
    }
    SECTION("random pairs") {
        std::mt19937_64 rng(99);
        for (int k = 0; k < 1000; ++k) {
            const int dim = 1 + static_cast<int>(rng() % 6);
            const auto r = min_eig_subadditivity_check(random_symmetric(rng, dim), random_symmetric(rng, dim));
            REQUIRE(r.holds);
            REQUIRE(r.slack >= -1e-12);
        }
    }
    SECTION("bad input") {
        Eigen::MatrixXd asym(2, 2);
        asym << 1, 2, 0, 1;
        CHECK_THROWS_AS(min_eig_subadditivity_check(asym, asym), std::invalid_argument);
        CHECK_THROWS_AS(min_eig_subadditivity_check(Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(3, 3)),
                        std::invalid_argument);
    }
}

TEST_CASE("grid points", "[fisher_diag]") {
    const auto space = ParamSpace::default_for({1, 1});
    GridSpec grid{kEta0, 0.1, 3};
    // (0.4, 0.4) has a common root and is dropped
    const auto pts = grid_points(grid, space);
    REQUIRE(pts.size() == 8);
    auto near = [](const ArmaParams& a, const ArmaParams& b) {
        return (a.to_vector() - b.to_vector()).norm() < 1e-15;
    };
    CHECK(near(pts.front(), ArmaParams({0.4}, {0.2})));
    CHECK(near(pts[1], ArmaParams({0.4}, {0.3})));
    CHECK(near(pts.back(), ArmaParams({0.6}, {0.4})));

    grid.points_per_axis = 5;
    const auto five = grid_points(grid, space);
    CHECK(five.size() == 24);

    grid.points_per_axis = 4;
    CHECK_THROWS_AS(grid.validate(), std::invalid_argument);
}

TEST_CASE("grid supremum of the inverse eigenvalue", "[fisher_diag]") {
    const auto space = ParamSpace::default_for({1, 1});
    const auto s = simulate(kEta0, 300, NoiseSpec::gaussian(1.0), 31);

    SECTION("singleton grid") {
        const auto r = grid_sup_inverse_eig(s.y, GridSpec{kEta0, 0.1, 1}, 2.0, space);
        const double lmin = fisher_matrix(kEta0, s.y).lambda_min;
        CHECK(r.points == 1);
        CHECK(r.value == Approx(std::pow(lmin, -2.0)).epsilon(1e-14));
        CHECK(r.argmax == kEta0);
    }
    SECTION("refinement never decreases the value") {
        const auto coarse = grid_sup_inverse_eig(s.y, GridSpec{kEta0, 0.1, 3}, 2.0, space);
        const auto fine = grid_sup_inverse_eig(s.y, GridSpec{kEta0, 0.1, 5}, 2.0, space);
        CHECK(fine.value >= coarse.value);
    }
    SECTION("several orders in one pass") {
        const std::vector<double> qs{1.0, 2.0, 4.0};
        const GridSpec grid{kEta0, 0.1, 5};
        const auto all = grid_sup_inverse_eig(s.y, grid, qs, space);
        REQUIRE(all.size() == 3);
        for (std::size_t k = 0; k < qs.size(); ++k)
            CHECK(all[k].value == grid_sup_inverse_eig(s.y, grid, qs[k], space).value);
    }
    SECTION("errors") {
        CHECK_THROWS_AS(grid_sup_inverse_eig(s.y, GridSpec{kEta0, 0.1, 3}, 0.5, space), std::invalid_argument);
        CHECK_THROWS_AS(grid_sup_inverse_eig(s.y, GridSpec{ArmaParams({3.0}, {0.3}), 0.01, 1}, 2.0, space),
                        std::invalid_argument);
    }
}

TEST_CASE("degenerate information gives an infinite statistic", "[fisher_diag]") {
    const std::vector<double> zeros(50, 0.0);
    const auto r = grid_sup_inverse_eig(zeros, GridSpec{ArmaParams({0.5}, {}), 0.1, 3}, 2.0,
                                        ParamSpace::default_for({1, 0}));
    CHECK(r.degenerate);
    CHECK(std::isinf(r.value));
}
