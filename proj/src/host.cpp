#include "aop/host.hpp"

#include "aop/errors.hpp"

namespace aop {

HostState initialize_host(const ProblemDescriptor& problem, std::size_t n,
                          std::size_t max_evaluations, const OperatorParams& params,
                          CounterRng rng) {
    if (n < 4) throw InvalidInput("host: population size must be at least 4");
    params.validate();
    HostState state;
    state.problem = &problem;
    state.budget = EvaluationBudget(max_evaluations);
    state.params = params;
    state.rng = rng;
    if (!state.budget.can_afford(n)) {
        throw BudgetExhausted("host: budget " + std::to_string(max_evaluations) +
                              " cannot cover initialization of " + std::to_string(n));
    }
    state.constrained = initialize_population(problem, n, state.budget, state.rng);
    state.helper = state.constrained;
    assign_rank_and_crowding(state.constrained.members, true);
    assign_rank_and_crowding(state.helper.members, false);
    return state;
}

std::size_t step_generation(HostState& state, const PortfolioAction& action) {
    const std::size_t n = state.capacity();
    if (state.constrained.size() != n || state.helper.size() != n) {
        throw InvalidInput("step_generation: populations are not at capacity");
    }
    if (!state.budget.can_afford(n)) {
        throw BudgetExhausted("step_generation: " + std::to_string(state.budget.remaining()) +
                              " evaluations left, generation needs " + std::to_string(n));
    }
    const std::size_t n1 = n / 2;
    const std::size_t n2 = n - n1;
    auto x1 = generate_offspring(state.constrained, action, n1, state.params, state.bounds(), true,
                                 state.rng);
    auto x2 = generate_offspring(state.helper, action, n2, state.params, state.bounds(), false,
                                 state.rng);

    std::vector<Solution> offspring;
    offspring.reserve(n);
    for (auto* block : {&x1, &x2}) {
        for (auto& x : *block) {
            Solution s;
            s.eval = state.budget.evaluate(*state.problem, x);
            s.x = std::move(x);
            offspring.push_back(std::move(s));
        }
    }

    std::vector<Solution> pool1 = state.constrained.members;
    pool1.insert(pool1.end(), offspring.begin(), offspring.end());
    std::vector<Solution> pool2 = std::move(state.helper.members);
    pool2.insert(pool2.end(), std::make_move_iterator(offspring.begin()),
                 std::make_move_iterator(offspring.end()));
    state.constrained = environmental_selection(std::move(pool1), n, true);
    state.helper = environmental_selection(std::move(pool2), n, false);
    ++state.generation;
    return offspring.size();
}

}  // namespace aop
