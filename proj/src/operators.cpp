#include "aop/operators.hpp"

#include "aop/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace aop {

bool PortfolioAction::valid(double tol) const {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

void OperatorParams::validate() const {
    auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!unit(pc) || !unit(pm) || !unit(CR)) {
        throw InvalidInput("operator params: pc, pm and CR must lie in [0, 1]");
    }
    if (!(eta_c > 0.0) || !(eta_m > 0.0)) {
        throw InvalidInput("operator params: distribution indices must be positive");
    }
    if (!(F >= 0.0)) throw InvalidInput("operator params: F must be nonnegative");
}

std::array<std::size_t, kOperatorCount> allocate_counts(const PortfolioAction& action,
                                                        std::size_t n_offspring) {
    std::array<std::size_t, kOperatorCount> counts{};
    std::array<double, kOperatorCount> frac{};
    long long assigned = 0;
    for (std::size_t k = 0; k < kOperatorCount; ++k) {
        const double share = std::max(0.0, action.p[k]) * static_cast<double>(n_offspring);
        const double whole = std::floor(share);
        counts[k] = static_cast<std::size_t>(whole);
        frac[k] = share - whole;
        assigned += static_cast<long long>(counts[k]);
    }
    long long remainder = static_cast<long long>(n_offspring) - assigned;
    std::array<std::size_t, kOperatorCount> order{0, 1, 2};
    if (remainder >= 0) {
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
        for (std::size_t r = 0; remainder > 0; ++r, --remainder) ++counts[order[r % kOperatorCount]];
    } else {
        // Only reachable when the proportions sum slightly above one.
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return frac[a] < frac[b]; });
        for (std::size_t r = 0; remainder < 0; ++r) {
            auto k = order[r % kOperatorCount];
            if (counts[k] > 0) {
                --counts[k];
                ++remainder;
            }
        }
    }
    return counts;
}

double sbx_spread_factor(double u, double eta_c) {
    const double e = 1.0 / (eta_c + 1.0);
    if (u <= 0.5) return std::pow(2.0 * u, e);
    return std::pow(1.0 / (2.0 * (1.0 - u)), e);
}

std::array<double, 2> sbx_variable(double p1, double p2, double beta) {
    return {0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
            0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2)};
}

std::array<std::vector<double>, 2> sbx_pair(std::span<const double> parent1,
                                            std::span<const double> parent2,
                                            const OperatorParams& params, Bounds bounds,
                                            CounterRng& rng) {
    if (parent1.size() != parent2.size()) throw InvalidInput("sbx_pair: parent length mismatch");
    std::array<std::vector<double>, 2> children{
        std::vector<double>(parent1.begin(), parent1.end()),
        std::vector<double>(parent2.begin(), parent2.end())};
    for (std::size_t d = 0; d < parent1.size(); ++d) {
        const double apply = rng.uniform();
        const double u = rng.uniform();
        if (apply >= params.pc || parent1[d] == parent2[d]) continue;
        const auto c = sbx_variable(parent1[d], parent2[d], sbx_spread_factor(u, params.eta_c));
        children[0][d] = std::clamp(c[0], bounds.lower[d], bounds.upper[d]);
        children[1][d] = std::clamp(c[1], bounds.lower[d], bounds.upper[d]);
    }
    return children;
}

std::vector<double> polynomial_mutation(std::span<const double> x, const OperatorParams& params,
                                        Bounds bounds, CounterRng& rng) {
    std::vector<double> y(x.begin(), x.end());
    const double e = params.eta_m + 1.0;
    for (std::size_t d = 0; d < y.size(); ++d) {
        const double apply = rng.uniform();
        const double r = rng.uniform();
        if (apply >= params.pm) continue;
        const double lo = bounds.lower[d];
        const double hi = bounds.upper[d];
        const double span = hi - lo;
        const double d1 = (y[d] - lo) / span;
        const double d2 = (hi - y[d]) / span;
        double dq;
        if (r < 0.5) {
            const double v = 2.0 * r + (1.0 - 2.0 * r) * std::pow(1.0 - d1, e);
            dq = std::pow(v, 1.0 / e) - 1.0;
        } else {
            const double v = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * std::pow(1.0 - d2, e);
            dq = 1.0 - std::pow(v, 1.0 / e);
        }
        y[d] = std::clamp(y[d] + dq * span, lo, hi);
    }
    return y;
}

std::vector<double> de_trial(std::span<const double> base, std::span<const double> r2,
                             std::span<const double> r3, std::span<const double> target,
                             const OperatorParams& params, Bounds bounds, CounterRng& rng) {
    const std::size_t n = base.size();
    if (r2.size() != n || r3.size() != n || target.size() != n) {
        throw InvalidInput("differential evolution: vector length mismatch");
    }
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const std::size_t forced = pick(rng);
    std::vector<double> trial(n);
    for (std::size_t d = 0; d < n; ++d) {
        const double u = rng.uniform();
        const double v = base[d] + params.F * (r2[d] - r3[d]);
        trial[d] = (u < params.CR || d == forced) ? v : target[d];
        trial[d] = std::clamp(trial[d], bounds.lower[d], bounds.upper[d]);
    }
    return trial;
}

std::vector<double> de_rand_1(std::span<const double> r1, std::span<const double> r2,
                              std::span<const double> r3, std::span<const double> target,
                              const OperatorParams& params, Bounds bounds, CounterRng& rng) {
    return de_trial(r1, r2, r3, target, params, bounds, rng);
}

std::vector<double> de_best_1(std::span<const double> best, std::span<const double> r2,
                              std::span<const double> r3, std::span<const double> target,
                              const OperatorParams& params, Bounds bounds, CounterRng& rng) {
    return de_trial(best, r2, r3, target, params, bounds, rng);
}

std::vector<std::size_t> distinct_indices(std::size_t n, std::size_t count,
                                          std::span<const std::size_t> exclude, CounterRng& rng) {
    std::vector<std::size_t> pool;
    pool.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (std::find(exclude.begin(), exclude.end(), i) == exclude.end()) pool.push_back(i);
    }
    if (pool.size() < count) {
        throw InvalidInput("differential evolution: need " + std::to_string(count) +
                           " distinct candidates, have " + std::to_string(pool.size()));
    }
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
    }
    pool.resize(count);
    return pool;
}

std::size_t pick_best(std::span<const Solution> pop, bool use_constraints, CounterRng& rng) {
    auto fronts = nondominated_sort(pop, use_constraints);
    const auto& first = fronts.front();
    std::uniform_int_distribution<std::size_t> pick(0, first.size() - 1);
    return first[pick(rng)];
}

std::vector<std::vector<double>> generate_offspring(const Population& pop,
                                                    const PortfolioAction& action,
                                                    std::size_t n_offspring,
                                                    const OperatorParams& params, Bounds bounds,
                                                    bool use_constraints, CounterRng& rng) {
    if (n_offspring < 1) throw InvalidInput("generate_offspring: n_offspring must be positive");
    if (!action.valid(1e-9)) throw InvalidInput("generate_offspring: action is not on the simplex");
    const auto counts = allocate_counts(action, n_offspring);
    const std::span<const Solution> members(pop.members);
    std::vector<std::vector<double>> out;
    out.reserve(n_offspring);

    while (out.size() < counts[kSbx]) {
        const auto& a = members[binary_tournament(members, rng)].x;
        const auto& b = members[binary_tournament(members, rng)].x;
        auto children = sbx_pair(a, b, params, bounds, rng);
        for (auto& c : children) {
            if (out.size() < counts[kSbx]) out.push_back(polynomial_mutation(c, params, bounds, rng));
        }
    }

    std::size_t target = 0;
    for (std::size_t i = 0; i < counts[kDeRand]; ++i, ++target) {
        const std::size_t t = target % members.size();
        // The target is excluded whenever that still leaves three candidates.
        const std::size_t ex[] = {t};
        const auto r = distinct_indices(members.size(), 3,
                                        std::span(ex, members.size() > 3 ? 1 : 0), rng);
        auto trial = de_rand_1(members[r[0]].x, members[r[1]].x, members[r[2]].x, members[t].x,
                               params, bounds, rng);
        out.push_back(polynomial_mutation(trial, params, bounds, rng));
    }

    if (counts[kDeBest] > 0) {
        const auto first = nondominated_sort(members, use_constraints).front();
        std::uniform_int_distribution<std::size_t> pick(0, first.size() - 1);
        for (std::size_t i = 0; i < counts[kDeBest]; ++i, ++target) {
            const std::size_t t = target % members.size();
            const std::size_t best = first[pick(rng)];
            const std::size_t ex[] = {best, t};
            const auto r = distinct_indices(members.size(), 2,
                                            std::span(ex, members.size() > 3 ? 2 : 1), rng);
            auto trial = de_best_1(members[best].x, members[r[0]].x, members[r[1]].x,
                                   members[t].x, params, bounds, rng);
            out.push_back(polynomial_mutation(trial, params, bounds, rng));
        }
    }
    return out;
}

}  // namespace aop
