#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace armafpe {

/// Innovation distribution used by the simulator.
///
/// Gaussian(0, sigma2), or a Student-t with `dof` degrees of freedom rescaled
/// to variance sigma2. The Student-t family has finite absolute moments only
/// of order below `dof`, so experiments that need E|eps|^q must use dof > q.
/// sigma2 = 0 is allowed and yields identically zero innovations.
struct NoiseSpec {
    enum class Family { Gaussian, StudentT };

    Family family = Family::Gaussian;
    double sigma2 = 1.0;
    double dof = 0.0;

    static NoiseSpec gaussian(double sigma2) { return {Family::Gaussian, sigma2, 0.0}; }
    static NoiseSpec student_t(double sigma2, double dof) {
        return {Family::StudentT, sigma2, dof};
    }

    /// Throws std::invalid_argument on negative variance or dof <= 2 for Student-t.
    void validate() const;

    /// True when E|eps|^order is finite.
    bool has_moment(double order) const;

    std::string family_name() const;
};

/// n i.i.d. draws from `spec`, deterministic in `seed` (std::mt19937_64 stream).
std::vector<double> draw_innovations(const NoiseSpec& spec, std::size_t n, std::uint64_t seed);

/// splitmix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the stream owned by replication `rep` at sample size `n`.
///
/// A pure function of its three arguments, so a replication's stream does not
/// depend on the replication count or on the execution schedule.
std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t n, std::uint64_t rep);

}  // namespace armafpe
