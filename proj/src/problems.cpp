#include "aop/problems.hpp"

#include "aop/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>

namespace aop {

namespace {

std::string describe(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        os << (i ? ", " : "") << x[i];
    }
    os << ')';
    return os.str();
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double d) { return std::isfinite(d); });
}

double sq(double v) { return v * v; }

}  // namespace

double cv_aggregate(std::span<const double> g_values, std::span<const double> h_values,
                    double delta) {
    if (!(delta > 0.0)) {
        throw InvalidInput("cv_aggregate: delta must be positive");
    }
    if (!all_finite(g_values) || !all_finite(h_values)) {
        throw NumericalDomainError("cv_aggregate: non-finite constraint value");
    }
    double cv = 0.0;
    for (double g : g_values) {
        cv += std::max(0.0, g);
    }
    for (double h : h_values) {
        cv += std::max(0.0, std::abs(h) - delta);
    }
    return cv;
}

void ProblemDescriptor::validate() const {
    if (name.empty()) throw InvalidInput("problem without a name");
    if (M < 2) throw InvalidInput(name + ": need at least two objectives");
    if (D < 1) throw InvalidInput(name + ": need at least one decision variable");
    if (lower.size() != D || upper.size() != D) {
        throw InvalidInput(name + ": bound vectors must have length D");
    }
    for (std::size_t i = 0; i < D; ++i) {
        if (!(lower[i] < upper[i])) {
            throw InvalidInput(name + ": lower bound not below upper bound at index " +
                               std::to_string(i));
        }
    }
    if (!(delta > 0.0)) throw InvalidInput(name + ": delta must be positive");
    if (!raw) throw InvalidInput(name + ": no evaluator");
    if (!hv_reference.empty() && hv_reference.size() != M) {
        throw InvalidInput(name + ": hv_reference must have length M");
    }
    if (!hv_ideal.empty() && hv_ideal.size() != M) {
        throw InvalidInput(name + ": hv_ideal must have length M");
    }
}

Evaluation evaluate(const ProblemDescriptor& problem, std::span<const double> x) {
    if (x.size() != problem.D) {
        throw InvalidInput(problem.name + ": decision vector has length " +
                           std::to_string(x.size()) + ", expected " + std::to_string(problem.D));
    }
    Evaluation e;
    e.objectives.assign(problem.M, 0.0);
    e.g_values.assign(problem.p, 0.0);
    e.h_values.assign(problem.q, 0.0);
    problem.raw(x, e);
    if (e.objectives.size() != problem.M || e.g_values.size() != problem.p ||
        e.h_values.size() != problem.q) {
        throw InvalidInput(problem.name + ": evaluator changed output dimensions");
    }
    if (!all_finite(e.objectives) || !all_finite(e.g_values) || !all_finite(e.h_values)) {
        throw NumericalDomainError(problem.name + ": non-finite output at x = " + describe(x));
    }
    e.cv = cv_aggregate(e.g_values, e.h_values, problem.delta);
    return e;
}

std::vector<std::size_t> nondominated_indices(const std::vector<std::vector<double>>& points) {
    std::vector<std::size_t> order(points.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (points.empty()) return order;
    const std::size_t m = points.front().size();
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return points[a] < points[b]; });
    std::vector<std::size_t> kept;
    if (m == 2) {
        double best_f2 = std::numeric_limits<double>::infinity();
        for (auto i : order) {
            if (points[i][1] < best_f2) {
                kept.push_back(i);
                best_f2 = points[i][1];
            }
        }
        return kept;
    }
    // Lexicographic order: a point can only be dominated by an earlier one.
    for (auto i : order) {
        bool dominated = false;
        for (auto j : kept) {
            bool all_le = true;
            for (std::size_t k = 0; k < m && all_le; ++k) all_le = points[j][k] <= points[i][k];
            if (all_le) {
                dominated = true;  // includes exact duplicates
                break;
            }
        }
        if (!dominated) kept.push_back(i);
    }
    return kept;
}

std::vector<std::vector<double>> front_objectives(const std::vector<FrontPoint>& front) {
    std::vector<std::vector<double>> out;
    out.reserve(front.size());
    for (const auto& p : front) out.push_back(p.f);
    return out;
}

std::vector<FrontPoint> sample_reference_front(const ProblemDescriptor& problem, std::size_t n) {
    if (!problem.has_front()) {
        throw UnsupportedOperation(problem.name + ": no reference-front generator registered");
    }
    if (n < 1) throw InvalidInput("sample_reference_front: n must be at least 1");

    auto candidates = problem.front_candidates(problem);
    // Feasibility filter with re-evaluation, so every emitted preimage is feasible.
    std::vector<FrontPoint> feasible;
    feasible.reserve(candidates.size());
    for (auto& c : candidates) {
        auto e = evaluate(problem, c.x);
        if (e.feasible()) {
            c.f = std::move(e.objectives);
            feasible.push_back(std::move(c));
        }
    }
    auto objs = front_objectives(feasible);
    auto nd = nondominated_indices(objs);
    if (nd.empty()) {
        throw UnsupportedOperation(problem.name + ": front generator produced no feasible point");
    }
    // nd is sorted lexicographically, i.e. by f1 first.
    std::vector<FrontPoint> front;
    front.reserve(nd.size());
    for (auto i : nd) front.push_back(std::move(feasible[i]));
    if (front.size() <= n) return front;

    // Normalized arc length, then the first unused point at or after each target.
    const std::size_t m = problem.M;
    std::vector<double> lo(m, std::numeric_limits<double>::infinity());
    std::vector<double> hi(m, -std::numeric_limits<double>::infinity());
    for (const auto& p : front) {
        for (std::size_t k = 0; k < m; ++k) {
            lo[k] = std::min(lo[k], p.f[k]);
            hi[k] = std::max(hi[k], p.f[k]);
        }
    }
    std::vector<double> arc(front.size(), 0.0);
    for (std::size_t i = 1; i < front.size(); ++i) {
        double d2 = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const double range = hi[k] > lo[k] ? hi[k] - lo[k] : 1.0;
            d2 += sq((front[i].f[k] - front[i - 1].f[k]) / range);
        }
        arc[i] = arc[i - 1] + std::sqrt(d2);
    }
    std::vector<FrontPoint> out;
    out.reserve(n);
    std::vector<bool> used(front.size(), false);
    std::size_t cursor = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double target = n == 1 ? 0.0 : arc.back() * static_cast<double>(j) / static_cast<double>(n - 1);
        std::size_t i = static_cast<std::size_t>(
            std::lower_bound(arc.begin(), arc.end(), target) - arc.begin());
        i = std::max(i, cursor);
        // Leave enough points for the remaining targets.
        i = std::min(i, front.size() - (n - j));
        while (used[i]) ++i;
        used[i] = true;
        cursor = i + 1;
        out.push_back(front[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Built-in problems

namespace {

/// Full tensor grid over a 2-D box.
std::vector<FrontPoint> grid_2d(const ProblemDescriptor& p, std::size_t steps) {
    std::vector<FrontPoint> pts;
    pts.reserve(steps * steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const double x0 = p.lower[0] + (p.upper[0] - p.lower[0]) * static_cast<double>(i) / static_cast<double>(steps - 1);
        for (std::size_t j = 0; j < steps; ++j) {
            const double x1 = p.lower[1] + (p.upper[1] - p.lower[1]) * static_cast<double>(j) / static_cast<double>(steps - 1);
            pts.push_back({{x0, x1}, {}});
        }
    }
    return pts;
}

constexpr std::size_t kGridSteps = 2001;

ProblemDescriptor make_bnh() {
    ProblemDescriptor p;
    p.name = "BNH";
    p.M = 2;
    p.D = 2;
    p.lower = {0.0, 0.0};
    p.upper = {5.0, 3.0};
    p.p = 2;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = 4.0 * x[0] * x[0] + 4.0 * x[1] * x[1];
        e.objectives[1] = sq(x[0] - 5.0) + sq(x[1] - 5.0);
        e.g_values[0] = sq(x[0] - 5.0) + x[1] * x[1] - 25.0;
        e.g_values[1] = 7.7 - sq(x[0] - 8.0) - sq(x[1] + 3.0);
    };
    p.front_candidates = [](const ProblemDescriptor& d) { return grid_2d(d, kGridSteps); };
    return p;
}

ProblemDescriptor make_srn() {
    ProblemDescriptor p;
    p.name = "SRN";
    p.M = 2;
    p.D = 2;
    p.lower = {-20.0, -20.0};
    p.upper = {20.0, 20.0};
    p.p = 2;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = 2.0 + sq(x[0] - 2.0) + sq(x[1] - 1.0);
        e.objectives[1] = 9.0 * x[0] - sq(x[1] - 1.0);
        e.g_values[0] = x[0] * x[0] + x[1] * x[1] - 225.0;
        e.g_values[1] = x[0] - 3.0 * x[1] + 10.0;
    };
    p.front_candidates = [](const ProblemDescriptor& d) { return grid_2d(d, kGridSteps); };
    return p;
}

ProblemDescriptor make_tnk() {
    ProblemDescriptor p;
    p.name = "TNK";
    p.M = 2;
    p.D = 2;
    p.lower = {0.0, 0.0};
    p.upper = {std::numbers::pi, std::numbers::pi};
    p.p = 2;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = x[0];
        e.objectives[1] = x[1];
        // atan2 equals atan(x1/x2) on the interior and stays finite at x2 = 0.
        e.g_values[0] = -x[0] * x[0] - x[1] * x[1] + 1.0 + 0.1 * std::cos(16.0 * std::atan2(x[0], x[1]));
        e.g_values[1] = sq(x[0] - 0.5) + sq(x[1] - 0.5) - 0.5;
    };
    p.front_candidates = [](const ProblemDescriptor& d) { return grid_2d(d, kGridSteps); };
    return p;
}

ProblemDescriptor make_osy() {
    ProblemDescriptor p;
    p.name = "OSY";
    p.M = 2;
    p.D = 6;
    p.lower = {0.0, 0.0, 1.0, 0.0, 1.0, 0.0};
    p.upper = {10.0, 10.0, 5.0, 6.0, 5.0, 10.0};
    p.p = 6;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = -(25.0 * sq(x[0] - 2.0) + sq(x[1] - 2.0) + sq(x[2] - 1.0) +
                            sq(x[3] - 4.0) + sq(x[4] - 1.0));
        double s = 0.0;
        for (double v : x) s += v * v;
        e.objectives[1] = s;
        e.g_values[0] = -(x[0] + x[1] - 2.0);
        e.g_values[1] = -(6.0 - x[0] - x[1]);
        e.g_values[2] = -(2.0 - x[1] + x[0]);
        e.g_values[3] = -(2.0 - x[0] + 3.0 * x[1]);
        e.g_values[4] = -(4.0 - sq(x[2] - 3.0) - x[3]);
        e.g_values[5] = -(sq(x[4] - 3.0) + x[5] - 4.0);
    };
    // The Pareto set lies on five segments with x4 = x6 = 0. Each segment is
    // gridded over a range wider than its optimal part; the filters trim it.
    p.front_candidates = [](const ProblemDescriptor&) {
        constexpr std::size_t steps = 20001;
        std::vector<FrontPoint> pts;
        pts.reserve(5 * steps);
        auto lin = [](double a, double b, std::size_t i) {
            return a + (b - a) * static_cast<double>(i) / static_cast<double>(steps - 1);
        };
        for (std::size_t i = 0; i < steps; ++i) {
            const double t15 = lin(1.0, 5.0, i);
            pts.push_back({{5.0, 1.0, t15, 0.0, 5.0, 0.0}, {}});
            pts.push_back({{5.0, 1.0, t15, 0.0, 1.0, 0.0}, {}});
            const double c = lin(2.0, 5.0, i);
            pts.push_back({{c, (c - 2.0) / 3.0, 1.0, 0.0, 1.0, 0.0}, {}});
            pts.push_back({{0.0, 2.0, t15, 0.0, 1.0, 0.0}, {}});
            const double a = lin(0.0, 2.0, i);
            pts.push_back({{a, 2.0 - a, 1.0, 0.0, 1.0, 0.0}, {}});
        }
        return pts;
    };
    return p;
}

ProblemDescriptor make_constr() {
    ProblemDescriptor p;
    p.name = "CONSTR";
    p.M = 2;
    p.D = 2;
    p.lower = {0.1, 0.0};
    p.upper = {1.0, 5.0};
    p.p = 2;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = x[0];
        e.objectives[1] = (1.0 + x[1]) / x[0];
        e.g_values[0] = 6.0 - x[1] - 9.0 * x[0];
        e.g_values[1] = 1.0 + x[1] - 9.0 * x[0];
    };
    p.front_candidates = [](const ProblemDescriptor& d) { return grid_2d(d, kGridSteps); };
    return p;
}

constexpr std::size_t kSynthD = 10;

double synth_tail(double v) { return v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v); }

ProblemDescriptor make_synth_mm() {
    ProblemDescriptor p;
    p.name = "SYNTH-MM";
    p.M = 2;
    p.D = kSynthD;
    p.lower.assign(kSynthD, -1.0);
    p.upper.assign(kSynthD, 1.0);
    p.lower[0] = 0.0;
    p.p = 1;
    p.raw = [](std::span<const double> x, Evaluation& e) {
        double g = 1.0 + 10.0 * static_cast<double>(x.size() - 1);
        for (std::size_t i = 1; i < x.size(); ++i) g += synth_tail(x[i]);
        const double f1 = x[0];
        const double f2 = g * (1.0 - std::sqrt(x[0] / g));
        e.objectives[0] = f1;
        e.objectives[1] = f2;
        e.g_values[0] = 1.0 + 0.3 * std::sin(5.0 * std::numbers::pi * f1) - f1 - f2;
    };
    // For fixed x1, f2 increases with g, and g increases with x2 on [0, 0.5]
    // when the remaining tail variables are 0. The lowest feasible f2 is the
    // unconstrained value (g = 1) or the constraint boundary, found by bisection
    // on x2 keeping the upper (feasible) bracket.
    p.front_candidates = [](const ProblemDescriptor& d) {
        constexpr std::size_t steps = 200001;
        std::vector<FrontPoint> pts;
        pts.reserve(steps);
        for (std::size_t i = 0; i < steps; ++i) {
            std::vector<double> x(kSynthD, 0.0);
            x[0] = static_cast<double>(i) / static_cast<double>(steps - 1);
            if (!evaluate(d, x).feasible()) {
                double lo = 0.0, hi = 0.5;
                x[1] = hi;
                if (!evaluate(d, x).feasible()) continue;
                for (int it = 0; it < 80; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    x[1] = mid;
                    if (evaluate(d, x).feasible()) hi = mid; else lo = mid;
                }
                x[1] = hi;
            }
            pts.push_back({std::move(x), {}});
        }
        return pts;
    };
    return p;
}

struct Registry {
    std::mutex mutex;
    std::deque<ProblemDescriptor> extra;
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void attach_hv_box(ProblemDescriptor& problem, const std::vector<std::vector<double>>& front) {
    if (front.empty()) throw InvalidInput(problem.name + ": empty front for HV box");
    const std::size_t m = problem.M;
    std::vector<double> ideal(m, std::numeric_limits<double>::infinity());
    std::vector<double> nadir(m, -std::numeric_limits<double>::infinity());
    for (const auto& f : front) {
        for (std::size_t k = 0; k < m; ++k) {
            ideal[k] = std::min(ideal[k], f[k]);
            nadir[k] = std::max(nadir[k], f[k]);
        }
    }
    std::vector<double> ref(m);
    for (std::size_t k = 0; k < m; ++k) {
        double range = nadir[k] - ideal[k];
        if (!(range > 0.0)) range = std::max(1.0, std::abs(nadir[k]));
        ref[k] = nadir[k] + 0.1 * range;
    }
    problem.hv_ideal = std::move(ideal);
    problem.hv_reference = std::move(ref);
}

const std::vector<ProblemDescriptor>& builtin_problems() {
    static const std::vector<ProblemDescriptor> problems = [] {
        std::vector<ProblemDescriptor> v;
        v.push_back(make_bnh());
        v.push_back(make_srn());
        v.push_back(make_tnk());
        v.push_back(make_osy());
        v.push_back(make_constr());
        v.push_back(make_synth_mm());
        for (auto& p : v) {
            p.validate();
            attach_hv_box(p, front_objectives(sample_reference_front(p, kDefaultFrontSize)));
        }
        return v;
    }();
    return problems;
}

void register_problem(ProblemDescriptor problem) {
    problem.validate();
    if (problem.hv_reference.empty() && problem.has_front()) {
        attach_hv_box(problem, front_objectives(sample_reference_front(problem, kDefaultFrontSize)));
    }
    for (const auto& b : builtin_problems()) {
        if (b.name == problem.name) throw InvalidInput("problem already registered: " + problem.name);
    }
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    for (const auto& e : r.extra) {
        if (e.name == problem.name) throw InvalidInput("problem already registered: " + problem.name);
    }
    r.extra.push_back(std::move(problem));
}

const ProblemDescriptor& find_problem(const std::string& name) {
    for (const auto& p : builtin_problems()) {
        if (p.name == name) return p;
    }
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    for (const auto& p : r.extra) {
        if (p.name == name) return p;
    }
    throw InvalidInput("unknown problem: " + name);
}

std::size_t problem_index(const std::string& name) {
    const auto& b = builtin_problems();
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i].name == name) return i;
    }
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    for (std::size_t i = 0; i < r.extra.size(); ++i) {
        if (r.extra[i].name == name) return b.size() + i;
    }
    throw InvalidInput("unknown problem: " + name);
}

std::vector<std::string> problem_names() {
    std::vector<std::string> names;
    for (const auto& p : builtin_problems()) names.push_back(p.name);
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    for (const auto& p : r.extra) names.push_back(p.name);
    return names;
}

// ---------------------------------------------------------------------------
// Cache files

namespace {

std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

std::string front_cache_filename(const std::string& problem) { return problem + ".front"; }

void write_front_cache(std::ostream& out, const std::string& problem,
                       const std::vector<std::vector<double>>& front) {
    const std::size_t m = front.empty() ? 0 : front.front().size();
    out << "# problem=" << problem << " n=" << front.size() << " M=" << m << '\n';
    for (const auto& f : front) {
        for (std::size_t k = 0; k < f.size(); ++k) {
            out << (k ? " " : "") << shortest(f[k]);
        }
        out << '\n';
    }
}

std::vector<std::vector<double>> read_front_cache(std::istream& in, std::string* problem) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("# problem=", 0) != 0) {
        throw IoError("front cache: missing header line");
    }
    std::istringstream hs(header.substr(2));
    std::string name_tok, n_tok, m_tok;
    hs >> name_tok >> n_tok >> m_tok;
    if (name_tok.rfind("problem=", 0) != 0 || n_tok.rfind("n=", 0) != 0 || m_tok.rfind("M=", 0) != 0) {
        throw IoError("front cache: malformed header: " + header);
    }
    std::size_t n = 0, m = 0;
    try {
        n = std::stoul(n_tok.substr(2));
        m = std::stoul(m_tok.substr(2));
    } catch (const std::exception&) {
        throw IoError("front cache: malformed header: " + header);
    }
    if (problem) *problem = name_tok.substr(8);
    std::vector<std::vector<double>> front;
    front.reserve(n);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> f;
        std::string tok;
        while (ls >> tok) {
            double v = 0.0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc() || res.ptr != tok.data() + tok.size()) {
                throw IoError("front cache: bad number '" + tok + "'");
            }
            f.push_back(v);
        }
        if (f.size() != m) throw IoError("front cache: row with wrong dimension");
        front.push_back(std::move(f));
    }
    if (front.size() != n) throw IoError("front cache: row count does not match header");
    return front;
}

std::shared_ptr<const std::vector<std::vector<double>>> reference_front(
    const ProblemDescriptor& problem, const std::string& cache_dir) {
    static std::mutex mutex;
    static std::map<std::string, std::shared_ptr<const std::vector<std::vector<double>>>> memo;
    const std::string key = cache_dir + "|" + problem.name;
    {
        std::lock_guard lock(mutex);
        if (auto it = memo.find(key); it != memo.end()) return it->second;
    }
    std::shared_ptr<const std::vector<std::vector<double>>> front;
    if (!cache_dir.empty()) {
        const auto path = std::filesystem::path(cache_dir) / front_cache_filename(problem.name);
        std::ifstream in(path);
        if (in) {
            front = std::make_shared<const std::vector<std::vector<double>>>(read_front_cache(in));
        }
    }
    if (!front) {
        front = std::make_shared<const std::vector<std::vector<double>>>(
            front_objectives(sample_reference_front(problem, kDefaultFrontSize)));
    }
    std::lock_guard lock(mutex);
    return memo.emplace(key, front).first->second;
}

}  // namespace aop
