#include "armafpe/noise.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace armafpe {

void NoiseSpec::validate() const {
    if (!std::isfinite(sigma2) || sigma2 < 0.0) {
        throw std::invalid_argument("noise variance must be finite and nonnegative");
    }
    if (family == Family::StudentT && !(dof > 2.0)) {
        throw std::invalid_argument("Student-t noise needs more than 2 degrees of freedom");
    }
}

bool NoiseSpec::has_moment(double order) const {
    return family == Family::Gaussian || order < dof;
}

std::string NoiseSpec::family_name() const {
    return family == Family::Gaussian ? "gaussian" : "student_t";
}

std::vector<double> draw_innovations(const NoiseSpec& spec, std::size_t n, std::uint64_t seed) {
    spec.validate();
    std::vector<double> out(n, 0.0);
    if (spec.sigma2 == 0.0) {
        return out;
    }
    std::mt19937_64 engine(seed);
    const double sigma = std::sqrt(spec.sigma2);
    if (spec.family == NoiseSpec::Family::Gaussian) {
        std::normal_distribution<double> dist(0.0, sigma);
        for (auto& e : out) {
            e = dist(engine);
        }
    } else {
        // Var(t_dof) = dof / (dof - 2).
        const double scale = sigma * std::sqrt((spec.dof - 2.0) / spec.dof);
        std::student_t_distribution<double> dist(spec.dof);
        for (auto& e : out) {
            e = scale * dist(engine);
        }
    }
    return out;
}

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t rep) {
    // Chained rather than xor-combined so (n, rep) and (rep, n) land on different streams.
    std::uint64_t h = mix64(master_seed);
    h = mix64(h ^ (n * 0xD6E8FEB86659FD93ULL));
    h = mix64(h ^ (rep * 0xA0761D6478BD642FULL));
    return h;
}

}  // namespace armafpe
