#pragma once

#include "aop/evo.hpp"
#include "aop/operators.hpp"
#include "aop/problems.hpp"
#include "aop/rng.hpp"

#include <cstddef>
#include <stdexcept>

namespace aop {

class BudgetExhausted : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two cooperating populations: `constrained` selects under constrained
/// dominance, `helper` under plain dominance on the unconstrained relaxation.
/// Both select over the union of themselves and all offspring.
struct HostState {
    const ProblemDescriptor* problem = nullptr;
    Population constrained;
    Population helper;
    EvaluationBudget budget{0};
    OperatorParams params;
    CounterRng rng;
    std::size_t generation = 0;

    std::size_t capacity() const { return constrained.capacity; }
    Bounds bounds() const { return {problem->lower, problem->upper}; }
};

/// Evaluates one random population of N (charging N units) and seeds both
/// populations with it.
HostState initialize_host(const ProblemDescriptor& problem, std::size_t n,
                          std::size_t max_evaluations, const OperatorParams& params,
                          CounterRng rng);

/// One generation: each population breeds half of N offspring with the same
/// portfolio, all offspring are evaluated (N units), then each population
/// selects. Returns the number of offspring. Throws BudgetExhausted, leaving
/// the state untouched, when the budget cannot cover the generation.
std::size_t step_generation(HostState& state, const PortfolioAction& action);

}  // namespace aop
