#include "aop/evo.hpp"

#include "aop/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace aop {

Ordering pareto_compare(std::span<const double> fa, std::span<const double> fb) {
    bool a_better = false;
    bool b_better = false;
    for (std::size_t k = 0; k < fa.size(); ++k) {
        if (fa[k] < fb[k]) a_better = true;
        else if (fb[k] < fa[k]) b_better = true;
        if (a_better && b_better) return Ordering::Incomparable;
    }
    if (a_better) return Ordering::Precedes;
    if (b_better) return Ordering::Follows;
    return Ordering::Incomparable;
}

Ordering constrained_compare(const Solution& a, const Solution& b) {
    const bool fa = a.feasible();
    const bool fb = b.feasible();
    if (fa && !fb) return Ordering::Precedes;
    if (!fa && fb) return Ordering::Follows;
    if (!fa && !fb) {
        if (a.cv() < b.cv()) return Ordering::Precedes;
        if (b.cv() < a.cv()) return Ordering::Follows;
        return Ordering::Incomparable;
    }
    return pareto_compare(a.f(), b.f());
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const Solution> pop,
                                                        bool use_constraints) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominates(n);
    std::vector<std::size_t> dominated_by(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            switch (compare(pop[i], pop[j], use_constraints)) {
                case Ordering::Precedes:
                    dominates[i].push_back(j);
                    ++dominated_by[j];
                    break;
                case Ordering::Follows:
                    dominates[j].push_back(i);
                    ++dominated_by[i];
                    break;
                case Ordering::Incomparable:
                    break;
            }
        }
    }
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<std::size_t> current;
    for (std::size_t i = 0; i < n; ++i) {
        if (dominated_by[i] == 0) current.push_back(i);
    }
    while (!current.empty()) {
        std::vector<std::size_t> next;
        for (auto i : current) {
            for (auto j : dominates[i]) {
                if (--dominated_by[j] == 0) next.push_back(j);
            }
        }
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(current));
        current = std::move(next);
    }
    return fronts;
}

void crowding_distance(std::span<Solution> pop, std::span<const std::size_t> front) {
    if (front.empty()) return;
    for (auto i : front) pop[i].crowding = 0.0;
    if (front.size() <= 2) {
        for (auto i : front) pop[i].crowding = kBoundaryCrowding;
        return;
    }
    const std::size_t m = pop[front[0]].f().size();
    std::vector<std::size_t> order(front.begin(), front.end());
    for (std::size_t k = 0; k < m; ++k) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return pop[a].f()[k] < pop[b].f()[k];
        });
        const double lo = pop[order.front()].f()[k];
        const double hi = pop[order.back()].f()[k];
        pop[order.front()].crowding = kBoundaryCrowding;
        pop[order.back()].crowding = kBoundaryCrowding;
        const double range = hi - lo;
        if (!(range > 0.0)) continue;
        for (std::size_t r = 1; r + 1 < order.size(); ++r) {
            auto& s = pop[order[r]];
            if (s.crowding == kBoundaryCrowding) continue;
            s.crowding += (pop[order[r + 1]].f()[k] - pop[order[r - 1]].f()[k]) / (2.0 * range);
        }
    }
}

void crowding_distance(std::span<Solution> front) {
    std::vector<std::size_t> all(front.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    crowding_distance(front, all);
}

void assign_rank_and_crowding(std::span<Solution> pop, bool use_constraints) {
    auto fronts = nondominated_sort(pop, use_constraints);
    for (std::size_t r = 0; r < fronts.size(); ++r) {
        for (auto i : fronts[r]) pop[i].rank = r;
        crowding_distance(pop, fronts[r]);
    }
}

Population environmental_selection(std::vector<Solution> candidates, std::size_t n,
                                   bool use_constraints) {
    if (candidates.size() < n) {
        throw InvalidInput("environmental_selection: " + std::to_string(candidates.size()) +
                           " candidates for " + std::to_string(n) + " slots");
    }
    auto fronts = nondominated_sort(candidates, use_constraints);
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (const auto& front : fronts) {
        if (chosen.size() + front.size() <= n) {
            chosen.insert(chosen.end(), front.begin(), front.end());
            if (chosen.size() == n) break;
            continue;
        }
        crowding_distance(candidates, front);
        std::vector<std::size_t> order(front.begin(), front.end());
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return candidates[a].crowding > candidates[b].crowding;
        });
        order.resize(n - chosen.size());
        chosen.insert(chosen.end(), order.begin(), order.end());
        break;
    }
    std::sort(chosen.begin(), chosen.end());
    Population out;
    out.capacity = n;
    out.members.reserve(n);
    for (auto i : chosen) out.members.push_back(std::move(candidates[i]));
    assign_rank_and_crowding(out.members, use_constraints);
    return out;
}

Population initialize_population(const ProblemDescriptor& problem, std::size_t n,
                                 EvaluationBudget& budget, CounterRng& rng) {
    if (n < 2) throw InvalidInput("initialize_population: N must be at least 2");
    Population pop;
    pop.capacity = n;
    pop.members.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Solution s;
        s.x.resize(problem.D);
        for (std::size_t d = 0; d < problem.D; ++d) {
            s.x[d] = problem.lower[d] + (problem.upper[d] - problem.lower[d]) * rng.uniform();
        }
        s.eval = budget.evaluate(problem, s.x);
        pop.members.push_back(std::move(s));
    }
    return pop;
}

std::size_t binary_tournament(std::span<const Solution> pop, CounterRng& rng) {
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::size_t a = pick(rng);
    std::size_t b = pick(rng);
    if (b < a) std::swap(a, b);
    const auto& sa = pop[a];
    const auto& sb = pop[b];
    if (sb.rank < sa.rank) return b;
    if (sb.rank == sa.rank && sb.crowding > sa.crowding) return b;
    return a;
}

}  // namespace aop
