#pragma once

#include "aop/problems.hpp"
#include "aop/rng.hpp"

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

namespace aop {

inline constexpr double kBoundaryCrowding = std::numeric_limits<double>::infinity();

struct Solution {
    std::vector<double> x;
    Evaluation eval;
    double crowding = 0.0;
    std::size_t rank = 0;

    const std::vector<double>& f() const { return eval.objectives; }
    double cv() const { return eval.cv; }
    bool feasible() const { return eval.feasible(); }
};

struct Population {
    std::vector<Solution> members;
    std::size_t capacity = 0;

    std::size_t size() const { return members.size(); }
    bool empty() const { return members.empty(); }
    const Solution& operator[](std::size_t i) const { return members[i]; }
    Solution& operator[](std::size_t i) { return members[i]; }
};

enum class Ordering { Precedes, Follows, Incomparable };

/// Pareto dominance for minimization.
Ordering pareto_compare(std::span<const double> fa, std::span<const double> fb);

/// Feasibility first, then lower violation, then Pareto dominance.
Ordering constrained_compare(const Solution& a, const Solution& b);

inline Ordering compare(const Solution& a, const Solution& b, bool use_constraints) {
    return use_constraints ? constrained_compare(a, b) : pareto_compare(a.f(), b.f());
}

/// Fronts of member indices, each in ascending index order.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Solution> pop,
                                                        bool use_constraints);

/// Sets `crowding` on the listed members of pop. Boundary members of each
/// objective get kBoundaryCrowding; interior members get the sum over
/// objectives of (next - prev) / (2 * range).
void crowding_distance(std::span<Solution> pop, std::span<const std::size_t> front);

/// Convenience overload over a whole span.
void crowding_distance(std::span<Solution> front);

/// Recomputes rank and crowding of every member under the comparator.
void assign_rank_and_crowding(std::span<Solution> pop, bool use_constraints);

/// Fill by fronts, truncate the splitting front by descending crowding
/// (stable by index). Result is in input order and has rank/crowding set.
Population environmental_selection(std::vector<Solution> candidates, std::size_t n,
                                   bool use_constraints);

/// n uniform random evaluated solutions.
Population initialize_population(const ProblemDescriptor& problem, std::size_t n,
                                 EvaluationBudget& budget, CounterRng& rng);

/// Binary tournament on (rank, crowding); ties go to the lower index.
std::size_t binary_tournament(std::span<const Solution> pop, CounterRng& rng);

}  // namespace aop
