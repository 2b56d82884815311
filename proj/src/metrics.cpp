#include "aop/metrics.hpp"

#include "aop/errors.hpp"
#include "aop/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>

namespace aop {

void IndicatorConfig::validate() const {
    if (ideal.size() != reference.size() || ideal.size() < 2) {
        throw InvalidInput("indicator config: ideal and reference need equal length >= 2");
    }
    for (std::size_t k = 0; k < ideal.size(); ++k) {
        if (!(ideal[k] < reference[k])) {
            throw InvalidInput("indicator config: ideal must be below reference in every objective");
        }
    }
    if (mc_samples < 1) throw InvalidInput("indicator config: mc_samples must be positive");
}

double dominated_volume_2d(const PointSet& points, std::span<const double> reference) {
    std::vector<std::array<double, 2>> pts;
    pts.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != 2) throw InvalidInput("dominated_volume_2d: points must be 2-D");
        if (p[0] < reference[0] && p[1] < reference[1]) pts.push_back({p[0], p[1]});
    }
    std::sort(pts.begin(), pts.end());
    // Staircase of nondominated points: f1 ascending, f2 strictly descending.
    std::vector<std::array<double, 2>> stairs;
    double best = reference[1];
    for (const auto& p : pts) {
        if (p[1] < best) {
            stairs.push_back(p);
            best = p[1];
        }
    }
    double volume = 0.0;
    for (std::size_t i = 0; i < stairs.size(); ++i) {
        const double right = i + 1 < stairs.size() ? stairs[i + 1][0] : reference[0];
        volume += (right - stairs[i][0]) * (reference[1] - stairs[i][1]);
    }
    return volume;
}

namespace {

/// Normalized into the unit box, lower side clamped at 0; points that do not
/// strictly dominate the reference corner are dropped.
PointSet normalize_into_box(const PointSet& points, const IndicatorConfig& config) {
    const std::size_t m = config.reference.size();
    PointSet out;
    out.reserve(points.size());
    for (const auto& p : points) {
        if (p.size() != m) throw InvalidInput("hypervolume: point dimension mismatch");
        std::vector<double> y(m);
        bool inside = true;
        for (std::size_t k = 0; k < m && inside; ++k) {
            y[k] = std::max(0.0, (p[k] - config.ideal[k]) / (config.reference[k] - config.ideal[k]));
            inside = y[k] < 1.0;
        }
        if (inside) out.push_back(std::move(y));
    }
    return out;
}

double unit_box_monte_carlo(const PointSet& pts, std::size_t m, std::size_t samples,
                            std::uint64_t seed) {
    if (pts.empty()) return 0.0;
    CounterRng rng(seed);
    std::vector<double> u(m);
    std::size_t hits = 0;
    for (std::size_t s = 0; s < samples; ++s) {
        for (auto& v : u) v = rng.uniform();
        for (const auto& p : pts) {
            bool dominated = true;
            for (std::size_t k = 0; k < m && dominated; ++k) dominated = p[k] <= u[k];
            if (dominated) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(samples);
}

}  // namespace

double hypervolume(const PointSet& points, const IndicatorConfig& config) {
    config.validate();
    const auto pts = normalize_into_box(points, config);
    if (pts.empty()) return 0.0;
    const std::size_t m = config.reference.size();
    if (m == 2) {
        const double unit[2] = {1.0, 1.0};
        return dominated_volume_2d(pts, unit);
    }
    return unit_box_monte_carlo(pts, m, config.mc_samples, config.mc_seed);
}

double hypervolume_monte_carlo(const PointSet& points, const IndicatorConfig& config) {
    config.validate();
    return unit_box_monte_carlo(normalize_into_box(points, config), config.reference.size(),
                                config.mc_samples, config.mc_seed);
}

double igd(const PointSet& reference_front, const PointSet& attained) {
    if (reference_front.empty()) throw InvalidInput("igd: empty reference front");
    if (attained.empty()) return std::numeric_limits<double>::quiet_NaN();
    const std::size_t m = reference_front.front().size();
    double total = 0.0;
    for (const auto& r : reference_front) {
        double best = std::numeric_limits<double>::infinity();
        for (const auto& a : attained) {
            if (a.size() != m || r.size() != m) throw InvalidInput("igd: dimension mismatch");
            double d2 = 0.0;
            for (std::size_t k = 0; k < m; ++k) d2 += (r[k] - a[k]) * (r[k] - a[k]);
            best = std::min(best, d2);
        }
        total += std::sqrt(best);
    }
    return total / static_cast<double>(reference_front.size());
}

char verdict_symbol(Verdict v) {
    switch (v) {
        case Verdict::Better: return '+';
        case Verdict::Worse: return '-';
        case Verdict::Similar: return '=';
    }
    return '=';
}

double median(std::vector<double> values) {
    if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
    for (auto& v : values) {
        if (std::isnan(v)) v = std::numeric_limits<double>::infinity();
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    const double lo = values[n / 2 - 1];
    const double hi = values[n / 2];
    if (std::isinf(lo) || std::isinf(hi)) return hi;
    return 0.5 * (lo + hi);
}

double rank_sum_exact_p(std::size_t n1, std::size_t n2, double rank_sum_first) {
    const std::size_t n = n1 + n2;
    const std::size_t max_sum = n1 * n;
    // ways[k][s]: subsets of {1..i} with k elements summing to s.
    std::vector<std::vector<double>> ways(n1 + 1, std::vector<double>(max_sum + 1, 0.0));
    ways[0][0] = 1.0;
    for (std::size_t i = 1; i <= n; ++i) {
        for (std::size_t k = std::min(i, n1); k >= 1; --k) {
            for (std::size_t s = max_sum; s >= i; --s) ways[k][s] += ways[k - 1][s - i];
        }
    }
    const auto& dist = ways[n1];
    const double total = std::accumulate(dist.begin(), dist.end(), 0.0);
    const auto w = static_cast<std::size_t>(std::llround(rank_sum_first));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= max_sum; ++s) {
        if (s <= w) lower += dist[s];
        if (s >= w) upper += dist[s];
    }
    return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

RankSumResult wilcoxon_rank_sum(std::span<const double> a, std::span<const double> b,
                                double alpha) {
    if (a.empty() || b.empty()) throw InvalidInput("wilcoxon_rank_sum: empty sample");
    const std::size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::pair<double, std::size_t>> all;
    all.reserve(n);
    for (std::size_t i = 0; i < n1; ++i) all.emplace_back(std::isnan(a[i]) ? inf : a[i], i);
    for (std::size_t i = 0; i < n2; ++i) all.emplace_back(std::isnan(b[i]) ? inf : b[i], n1 + i);
    std::sort(all.begin(), all.end());

    std::vector<double> rank(n);
    double tie_term = 0.0;
    bool ties = false;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && all[j + 1].first == all[i].first) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) rank[all[k].second] = avg;
        const double t = static_cast<double>(j - i + 1);
        if (t > 1) {
            ties = true;
            tie_term += t * t * t - t;
        }
        i = j + 1;
    }
    double w1 = 0.0;
    for (std::size_t i = 0; i < n1; ++i) w1 += rank[i];

    RankSumResult res;
    const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2), dn = static_cast<double>(n);
    if (std::min(n1, n2) <= 10 && !ties) {
        res.exact = true;
        res.p_value = rank_sum_exact_p(n1, n2, w1);
    } else {
        const double u1 = w1 - dn1 * (dn1 + 1.0) / 2.0;
        const double mu = dn1 * dn2 / 2.0;
        const double var = dn1 * dn2 / 12.0 * ((dn + 1.0) - tie_term / (dn * (dn - 1.0)));
        if (!(var > 0.0)) {
            res.p_value = 1.0;
        } else {
            const double z = std::max(0.0, std::abs(u1 - mu) - 0.5) / std::sqrt(var);
            res.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
        }
    }
    if (res.p_value < alpha) {
        const double ma = median(std::vector<double>(a.begin(), a.end()));
        const double mb = median(std::vector<double>(b.begin(), b.end()));
        bool a_better;
        if (ma != mb) {
            a_better = ma < mb;
        } else {
            a_better = w1 / dn1 < (dn * (dn + 1.0) / 2.0 - w1) / dn2;
        }
        res.verdict = a_better ? Verdict::Better : Verdict::Worse;
    }
    return res;
}

}  // namespace aop
