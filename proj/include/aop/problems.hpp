#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace aop {

/// Objective values, raw constraint values and the aggregated violation of
/// one decision vector. Inequalities follow the g(x) <= 0 convention and
/// equalities h(x) = 0.
struct Evaluation {
    std::vector<double> objectives;
    std::vector<double> g_values;
    std::vector<double> h_values;
    double cv = 0.0;

    bool feasible() const { return cv == 0.0; }
};

/// Sum of positive inequality values plus equality residuals beyond delta.
double cv_aggregate(std::span<const double> g_values, std::span<const double> h_values,
                    double delta);

/// A point of a constrained Pareto front together with the decision vector
/// that produces it.
struct FrontPoint {
    std::vector<double> x;
    std::vector<double> f;
};

struct ProblemDescriptor;

/// Writes objectives, g and h for x into the evaluation. Must be pure.
using RawEvaluator = std::function<void(std::span<const double> x, Evaluation& out)>;

/// Returns a dense candidate set on or near the constrained front; the
/// sampler filters and thins it.
using FrontCandidates = std::function<std::vector<FrontPoint>(const ProblemDescriptor&)>;

struct ProblemDescriptor {
    std::string name;
    std::size_t M = 2;
    std::size_t D = 1;
    std::vector<double> lower;
    std::vector<double> upper;
    std::size_t p = 0;
    std::size_t q = 0;
    double delta = 1e-4;
    RawEvaluator raw;
    FrontCandidates front_candidates;  // empty when no front is known
    /// Ideal point and HV reference point of the default reference front.
    std::vector<double> hv_ideal;
    std::vector<double> hv_reference;

    /// Throws InvalidInput on inconsistent dimensions or bounds.
    void validate() const;
    bool has_front() const { return static_cast<bool>(front_candidates); }
};

/// Pure evaluation; does not touch any budget.
Evaluation evaluate(const ProblemDescriptor& problem, std::span<const double> x);

/// Counts function evaluations against an optional cap.
class EvaluationBudget {
public:
    explicit EvaluationBudget(std::size_t max_evaluations) : max_(max_evaluations) {}

    Evaluation evaluate(const ProblemDescriptor& problem, std::span<const double> x) {
        auto e = aop::evaluate(problem, x);
        ++consumed_;
        return e;
    }

    std::size_t consumed() const { return consumed_; }
    std::size_t max() const { return max_; }
    std::size_t remaining() const { return consumed_ >= max_ ? 0 : max_ - consumed_; }
    bool can_afford(std::size_t n) const { return consumed_ + n <= max_; }

private:
    std::size_t max_;
    std::size_t consumed_ = 0;
};

inline constexpr std::size_t kDefaultFrontSize = 1000;

/// n mutually nondominated feasible points spread along the constrained front.
std::vector<FrontPoint> sample_reference_front(const ProblemDescriptor& problem, std::size_t n);

/// Objective vectors only.
std::vector<std::vector<double>> front_objectives(const std::vector<FrontPoint>& front);

/// Indices of the points not dominated by any other point (minimization).
/// Duplicates are kept once.
std::vector<std::size_t> nondominated_indices(const std::vector<std::vector<double>>& points);

/// BNH, SRN, TNK, OSY, CONSTR and SYNTH-MM with HV boxes attached.
const std::vector<ProblemDescriptor>& builtin_problems();

/// Lookup in the built-ins and in anything added with register_problem().
const ProblemDescriptor& find_problem(const std::string& name);
/// Position of the problem in builtin order (registered problems follow).
std::size_t problem_index(const std::string& name);
std::vector<std::string> problem_names();

/// Adds a problem to the process-wide registry. If the descriptor has a front
/// generator but no HV box, the box is derived from its reference front.
void register_problem(ProblemDescriptor problem);

/// Ideal point and reference point derived from a front: the reference is the
/// nadir pushed outward by 10% of the ideal-nadir range.
void attach_hv_box(ProblemDescriptor& problem, const std::vector<std::vector<double>>& front);

// Reference-front cache files.
void write_front_cache(std::ostream& out, const std::string& problem,
                       const std::vector<std::vector<double>>& front);
std::vector<std::vector<double>> read_front_cache(std::istream& in, std::string* problem = nullptr);

/// Cached front for a problem: read from `cache_dir/<name>.front` when that
/// file exists, otherwise generated. Memoized for the default size.
std::shared_ptr<const std::vector<std::vector<double>>> reference_front(
    const ProblemDescriptor& problem, const std::string& cache_dir = "");

std::string front_cache_filename(const std::string& problem);

}  // namespace aop
