#include "armafpe/estimator.hpp"

#include "armafpe/fisher_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace armafpe {

namespace {

constexpr int kMaxHalvings = 30;
constexpr int kMaxDampingRaises = 60;
constexpr int kMaxRejectionDraws = 1'000'000;

double squared_sum(std::span<const double> eps) {
    double sum = 0.0;
    double carry = 0.0;
    for (double e : eps) {
        const double v = e * e;
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

// max_i |J_i' e| / (|J_i| |e|); invariant to rescaling the data.
double gradient_cosine(const Eigen::Ref<const Eigen::MatrixXd>& jac, const Eigen::Ref<const Eigen::VectorXd>& r,
                       const Eigen::VectorXd& g) {
    const double rn = r.norm();
    if (rn == 0.0) return 0.0;
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.size(); ++i) {
        const double cn = jac.col(i).norm();
        if (cn > 0.0) worst = std::max(worst, std::abs(g[i]) / (cn * rn));
    }
    return worst;
}

struct LmRun {
    Eigen::VectorXd eta;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

LmRun levenberg_marquardt(std::span<const double> y, ModelOrder order, const ParamSpace& space,
                          const ArmaParams& start, const FitConfig& config) {
    LmRun run;
    run.eta = start.to_vector();
    auto path = derivative_path(start, y, 1);
    run.objective = squared_sum(path.eps);
    run.trace.push_back(run.objective);
    double damping = config.initial_damping;

    for (run.iterations = 0; run.iterations < config.max_iters; ++run.iterations) {
        const Eigen::Map<const Eigen::VectorXd> r(path.eps.data(),
                                                  static_cast<Eigen::Index>(path.eps.size()));
        const Eigen::VectorXd g = path.grad.transpose() * r;
        if (gradient_cosine(path.grad, r, g) < config.grad_tol) {
            run.converged = true;
            break;
        }
        const Eigen::MatrixXd jtj = path.grad.transpose() * path.grad;
        const double floor = 1e-12 * std::max(1.0, jtj.diagonal().maxCoeff());
        const Eigen::VectorXd scale = jtj.diagonal().cwiseMax(floor);

        bool accepted = false;
        bool tiny_step = false;
        for (int raise = 0; raise < kMaxDampingRaises; ++raise) {
            Eigen::MatrixXd h = jtj;
            h.diagonal() += damping * scale;
            Eigen::VectorXd delta = -h.ldlt().solve(g);
            if (!delta.allFinite()) {
                damping *= config.damping_up;
                continue;
            }
            if (delta.norm() < config.step_tol) {
                tiny_step = true;
                break;
            }
            auto trial = ArmaParams::from_vector(run.eta + delta, order);
            bool feasible = in_space(trial, space);
            for (int halving = 0; !feasible && halving < kMaxHalvings; ++halving) {
                delta *= 0.5;
                trial = ArmaParams::from_vector(run.eta + delta, order);
                feasible = in_space(trial, space);
            }
            if (!feasible) {
                damping *= config.damping_up;
                continue;
            }
            const auto trial_eps = residuals(trial, y);
            const double trial_objective = squared_sum(trial_eps);
            if (trial_objective < run.objective) {
                // Gain ratio of actual to linearized reduction, with the model
                // ||e + J delta||^2 = S + 2 g.delta + delta' J'J delta.
                const double predicted = -(2.0 * g.dot(delta) + delta.dot(jtj * delta));
                const double gain = (run.objective - trial_objective) / predicted;
                run.eta += delta;
                run.objective = trial_objective;
                run.trace.push_back(trial_objective);
                path = derivative_path(trial, y, 1);
                if (gain > 0.75) {
                    damping *= config.damping_down;
                } else if (gain < 0.25) {
                    damping *= config.damping_up;
                }
                accepted = true;
                tiny_step = delta.norm() < config.step_tol;
                break;
            }
            damping *= config.damping_up;
        }
        if (tiny_step) {
            run.converged = true;
            ++run.iterations;
            break;
        }
        if (!accepted) {
            ++run.iterations;
            break;
        }
    }
    return run;
}

}  // namespace

double compensated_sum(std::span<const double> values) {
    double sum = 0.0;
    double carry = 0.0;
    for (double v : values) {
        const double t = sum + v;
        carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
        sum = t;
    }
    return sum + carry;
}

double sum_of_squares(const ArmaParams& params, std::span<const double> y) {
    return squared_sum(residuals(params, y));
}

void FitConfig::validate() const {
    if (max_iters < 1) {
        throw FitError(FitError::Kind::BadConfig, "max_iters must be at least 1");
    }
    if (!(grad_tol > 0.0) || !(step_tol > 0.0) || !(initial_damping > 0.0)) {
        throw FitError(FitError::Kind::BadConfig, "tolerances and initial damping must be positive");
    }
    if (!(damping_up > 1.0) || !(damping_down > 0.0 && damping_down < 1.0)) {
        throw FitError(FitError::Kind::BadConfig, "damping factors need up > 1 and 0 < down < 1");
    }
    if (starts.empty() && random_starts < 0) {
        throw FitError(FitError::Kind::BadConfig, "random_starts must be nonnegative");
    }
}

std::vector<ArmaParams> default_starts(ModelOrder order, const ParamSpace& space,
                                       std::uint64_t seed, int random_draws) {
    order.validate();
    space.validate();
    const auto dim = static_cast<Eigen::Index>(space.dimension());
    if (dim != order.p_bar()) {
        throw FitError(FitError::Kind::BadConfig, "parameter space dimension does not match order");
    }
    std::vector<ArmaParams> starts;
    Eigen::VectorXd center(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const auto k = static_cast<std::size_t>(i);
        center[i] = 0.5 * (space.lower[k] + space.upper[k]);
    }
    auto center_params = ArmaParams::from_vector(center, order);
    if (in_space(center_params, space)) {
        starts.push_back(std::move(center_params));
    }

    std::mt19937_64 engine(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int attempts = 0;
    while (static_cast<int>(starts.size()) < random_draws + 1) {
        if (++attempts > kMaxRejectionDraws) {
            throw FitError(FitError::Kind::NoFeasibleStart,
                           "could not draw a start point inside the parameter space");
        }
        Eigen::VectorXd eta(dim);
        for (Eigen::Index i = 0; i < dim; ++i) {
            const auto k = static_cast<std::size_t>(i);
            eta[i] = space.lower[k] + (space.upper[k] - space.lower[k]) * unit(engine);
        }
        auto candidate = ArmaParams::from_vector(eta, order);
        if (in_space(candidate, space)) {
            starts.push_back(std::move(candidate));
        }
    }
    return starts;
}

FitReport fit(std::span<const double> y, ModelOrder order, const ParamSpace& space,
              const FitConfig& config) {
    order.validate();
    space.validate();
    config.validate();
    if (space.dimension() != static_cast<std::size_t>(order.p_bar())) {
        throw FitError(FitError::Kind::BadConfig, "parameter space dimension does not match order");
    }
    if (y.size() <= static_cast<std::size_t>(order.p_bar())) {
        throw FitError(FitError::Kind::TooFewObservations,
                       "need more observations than parameters (n > p1 + p2)");
    }
    const std::vector<ArmaParams> starts =
        config.starts.empty() ? default_starts(order, space, config.seed, config.random_starts)
                              : config.starts;

    std::optional<LmRun> best;
    int best_index = -1;
    for (std::size_t k = 0; k < starts.size(); ++k) {
        const auto& start = starts[k];
        if (!(start.order() == order) || !in_space(start, space)) {
            continue;
        }
        auto run = levenberg_marquardt(y, order, space, start, config);
        if (!best || run.objective < best->objective) {
            best = std::move(run);
            best_index = static_cast<int>(k);
        }
    }
    if (!best) {
        throw FitError(FitError::Kind::NoFeasibleStart, "no start point lies inside the parameter space");
    }

    FitReport report;
    report.estimate = ArmaParams::from_vector(best->eta, order);
    report.objective = sum_of_squares(report.estimate, y);
    report.sigma2_hat = report.objective / static_cast<double>(y.size());
    report.iterations = best->iterations;
    report.converged = best->converged;
    report.start_index = best_index;
    report.objective_trace = std::move(best->trace);
    const auto info = fisher_matrix(report.estimate, y);
    report.info_matrix = info.matrix;
    report.lambda_min = info.lambda_min;
    return report;
}

double predict_one_step(const ArmaParams& params, std::span<const double> y) {
    const std::size_t n = y.size();
    const auto eps = residuals(params, y);
    double g = 0.0;
    for (std::size_t i = 1; i <= std::min(params.ar.size(), n); ++i) {
        g += params.ar[i - 1] * y[n - i];
    }
    for (std::size_t j = 1; j <= std::min(params.ma.size(), n); ++j) {
        g -= params.ma[j - 1] * eps[n - j];
    }
    return g;
}

double fpe(double objective, std::size_t n, int p_bar) {
    if (p_bar < 0 || n <= static_cast<std::size_t>(p_bar)) {
        throw std::invalid_argument("fpe: need n > p_bar");
    }
    const double nn = static_cast<double>(n);
    const double pb = static_cast<double>(p_bar);
    return (nn + pb) / ((nn - pb) * nn) * objective;
}

double fpe(const FitReport& report, std::size_t n, int p_bar) {
    return fpe(report.objective, n, p_bar);
}

Selection select_order(std::span<const double> y, std::span<const ModelOrder> candidates,
                       const SpaceFactory& space_for, const FitConfig& config) {
    if (candidates.empty()) {
        throw std::invalid_argument("select_order: empty candidate list");
    }
    Selection out;
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < candidates.size(); ++k) {
        CandidateOutcome outcome;
        outcome.order = candidates[k];
        try {
            auto report = fit(y, candidates[k], space_for(candidates[k]), config);
            outcome.fpe = fpe(report, y.size(), candidates[k].p_bar());
            outcome.report = std::move(report);
        } catch (const std::exception& e) {
            outcome.error = e.what();
        }
        out.table.push_back(std::move(outcome));
        const auto& cur = out.table.back();
        if (!cur.report) continue;
        if (!best) {
            best = k;
            continue;
        }
        const auto& inc = out.table[*best];
        // Later index loses every exact tie, so list order is the final tie-break.
        if (cur.fpe < inc.fpe || (cur.fpe == inc.fpe && cur.order.p_bar() < inc.order.p_bar())) {
            best = k;
        }
    }
    if (!best) {
        throw std::invalid_argument("select_order: every candidate fit failed");
    }
    out.chosen = out.table[*best].order;
    return out;
}

}  // namespace armafpe
