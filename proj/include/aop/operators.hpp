#pragma once

#include "aop/evo.hpp"
#include "aop/rng.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace aop {

enum Operator : std::size_t { kSbx = 0, kDeRand = 1, kDeBest = 2 };
inline constexpr std::size_t kOperatorCount = 3;

/// Usage proportions over (SBX pipeline, DE/rand/1, DE/best/1).
struct PortfolioAction {
    std::array<double, kOperatorCount> p{1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};

    static PortfolioAction vertex(Operator op) {
        PortfolioAction a;
        a.p = {0.0, 0.0, 0.0};
        a.p[op] = 1.0;
        return a;
    }
    /// Nonnegative and summing to one within tol.
    bool valid(double tol = 1e-9) const;
};

struct OperatorParams {
    double pc = 1.0;
    double eta_c = 20.0;
    double pm = 0.0;  // 0 means 1/D, resolved by for_dimension()
    double eta_m = 20.0;
    double F = 0.5;
    double CR = 1.0;

    static OperatorParams for_dimension(std::size_t D) {
        OperatorParams p;
        p.pm = 1.0 / static_cast<double>(D);
        return p;
    }
    void validate() const;
};

struct Bounds {
    std::span<const double> lower;
    std::span<const double> upper;
};

/// Largest-remainder apportionment; remainder ties go to the lower index.
std::array<std::size_t, kOperatorCount> allocate_counts(const PortfolioAction& action,
                                                        std::size_t n_offspring);

/// SBX spread factor for a uniform draw u in [0, 1).
double sbx_spread_factor(double u, double eta_c);

/// Children before clipping, for the given per-variable uniforms.
std::array<double, 2> sbx_variable(double p1, double p2, double beta);

std::array<std::vector<double>, 2> sbx_pair(std::span<const double> parent1,
                                            std::span<const double> parent2,
                                            const OperatorParams& params, Bounds bounds,
                                            CounterRng& rng);

std::vector<double> polynomial_mutation(std::span<const double> x, const OperatorParams& params,
                                        Bounds bounds, CounterRng& rng);

/// base + F * (r2 - r3) crossed binomially into target with rate CR; at least
/// one coordinate always comes from the mutant. Used by both DE variants.
std::vector<double> de_trial(std::span<const double> base, std::span<const double> r2,
                             std::span<const double> r3, std::span<const double> target,
                             const OperatorParams& params, Bounds bounds, CounterRng& rng);

std::vector<double> de_rand_1(std::span<const double> r1, std::span<const double> r2,
                              std::span<const double> r3, std::span<const double> target,
                              const OperatorParams& params, Bounds bounds, CounterRng& rng);

std::vector<double> de_best_1(std::span<const double> best, std::span<const double> r2,
                              std::span<const double> r3, std::span<const double> target,
                              const OperatorParams& params, Bounds bounds, CounterRng& rng);

/// Index of the DE/best/1 base vector: a uniform member of the first front
/// under the population's comparator.
std::size_t pick_best(std::span<const Solution> pop, bool use_constraints, CounterRng& rng);

/// count distinct indices in [0, n) excluding `exclude` entries.
std::vector<std::size_t> distinct_indices(std::size_t n, std::size_t count,
                                          std::span<const std::size_t> exclude, CounterRng& rng);

/// Offspring decision vectors, SBX block first, then DE/rand/1, then DE/best/1.
/// Population members must carry rank and crowding for the tournaments.
std::vector<std::vector<double>> generate_offspring(const Population& pop,
                                                    const PortfolioAction& action,
                                                    std::size_t n_offspring,
                                                    const OperatorParams& params, Bounds bounds,
                                                    bool use_constraints, CounterRng& rng);

}  // namespace aop
