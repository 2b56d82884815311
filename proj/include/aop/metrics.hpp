#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aop {

using PointSet = std::vector<std::vector<double>>;

struct IndicatorConfig {
    std::vector<double> ideal;
    std::vector<double> reference;
    std::size_t mc_samples = 10000;
    std::uint64_t mc_seed = 0x5eed;

    void validate() const;
};

/// Exact dominated volume of a 2-D set w.r.t. reference, in raw units.
/// Points that do not strictly dominate the reference are ignored.
double dominated_volume_2d(const PointSet& points, std::span<const double> reference);

/// Fraction of the normalized [ideal, reference] box dominated by the set.
/// Exact sweep for M = 2, seeded Monte Carlo for M >= 3. Empty effective
/// sets give 0.
double hypervolume(const PointSet& points, const IndicatorConfig& config);

/// Monte Carlo estimate in any dimension (also used to cross-check the sweep).
double hypervolume_monte_carlo(const PointSet& points, const IndicatorConfig& config);

/// Mean distance from each reference point to its nearest attained point.
/// NaN when the attained set is empty.
double igd(const PointSet& reference_front, const PointSet& attained);

enum class Verdict { Better, Worse, Similar };

char verdict_symbol(Verdict v);

struct RankSumResult {
    double p_value = 1.0;
    Verdict verdict = Verdict::Similar;
    bool exact = false;
};

/// Two-sided Wilcoxon rank-sum test of a against b on lower-is-better samples.
/// Exact null distribution when the smaller sample has at most 10 values and
/// there are no ties, otherwise the tie-corrected normal approximation with
/// continuity correction. NaN values rank worst. The verdict is from a's
/// point of view: Better when significant and a's median is lower.
RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                double alpha = 0.05);

/// Exact two-sided p-value of the rank sum of the first sample, no ties.
double rank_sum_exact_p(std::size_t n1, std::size_t n2, double rank_sum_first);

double median(std::vector<double> values);

}  // namespace aop
