#pragma once

#include "aop/agent.hpp"
#include "aop/operators.hpp"

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aop {

enum class VariantKind : std::size_t {
    Aop = 0,
    GaOnly = 1,
    DeRandOnly = 2,
    DeBestOnly = 3,
    FixedPortfolio = 4,
};

struct Variant {
    VariantKind kind = VariantKind::Aop;
    PortfolioAction fixed;  // used by FixedPortfolio

    /// aop | ga-only | de-rand-only | de-best-only | fixed-portfolio:a,b,c
    static Variant parse(const std::string& text);
    std::string name() const;
    /// Name safe for file names.
    std::string slug() const;
    std::size_t index() const { return static_cast<std::size_t>(kind); }
    bool uses_agent() const { return kind == VariantKind::Aop; }
    /// The pinned action of non-agent variants.
    PortfolioAction pinned_action() const;
};

/// Agent hyperparameters a run may override.
struct AgentOverrides {
    std::optional<double> gamma, tau, actor_lr, critic_lr, sigma_start, sigma_end;
    std::optional<std::size_t> batch_size, replay_capacity, hidden;

    AgentConfig apply(AgentConfig base) const;
};

struct RunConfig {
    std::string problem = "BNH";
    Variant variant;
    std::size_t pop = 100;
    std::size_t fe = 20000;
    std::uint64_t seed = 0;         // seed index within a batch
    std::uint64_t global_seed = 0;  // shared by all runs of an experiment
    AgentOverrides agent;
    DispersionFormula dispersion = DispersionFormula::Variance;
    std::string out_dir;
    std::string fronts_dir;  // optional reference-front cache directory

    /// Throws ConfigError.
    void validate() const;
};

struct TraceRow {
    std::size_t gen = 0;
    std::size_t fe = 0;
    double hv = 0.0;
    double igd = 0.0;
    double feasible_ratio = 0.0;
    PortfolioAction action;
    double reward = 0.0;
    double critic_loss = 0.0;  // NaN when no training happened
};

struct MemberSnapshot {
    std::vector<double> x;
    std::vector<double> f;
    double cv = 0.0;
};

struct RunResult {
    std::string problem;
    std::string variant;
    std::uint64_t seed = 0;
    std::vector<MemberSnapshot> final_population;
    std::vector<TraceRow> trace;
    double final_igd = 0.0;
    double final_hv = 0.0;
    double final_feasible_ratio = 0.0;
    std::size_t consumed_fe = 0;
    std::size_t fe_max = 0;
    std::size_t pop = 0;
    double wall_seconds = 0.0;
};

/// Runs the full optimize-observe-train loop. Deterministic in (config, seed).
RunResult run_single(const RunConfig& config);

/// Feasible objective vectors of a snapshot.
std::vector<std::vector<double>> feasible_objectives(const std::vector<MemberSnapshot>& pop);

struct BatchCell {
    std::string problem;
    std::string variant;
    std::uint64_t seed = 0;
    std::optional<RunResult> result;
    std::string error;  // nonempty when the run failed
};

/// Cells sorted by (problem, variant, seed) in configuration order.
struct ResultMatrix {
    std::vector<BatchCell> cells;

    std::vector<std::string> failures() const;
};

/// Every config is run for seed indices 0..seeds-1 (the config's own seed
/// field is ignored). Up to `parallelism` runs execute concurrently.
ResultMatrix run_batch(const std::vector<RunConfig>& configs, std::size_t seeds,
                       std::size_t parallelism);

/// One line per run as written to results.csv.
struct SummaryRow {
    std::string problem;
    std::string variant;
    std::uint64_t seed = 0;
    double final_igd = 0.0;
    double final_hv = 0.0;
    double feasible_ratio = 0.0;
    std::size_t consumed_fe = 0;
    std::string status = "ok";
};

std::vector<SummaryRow> summarize(const ResultMatrix& matrix);

struct ComparisonTable {
    std::string text;
    std::string csv;
    /// Per variant: counts of +, -, = across problems.
    std::map<std::string, std::array<std::size_t, 3>> counts;
};

/// Mean (std) of final IGD per problem and variant, the rank-sum verdict of
/// each variant against the baseline, the best mean of each row marked,
/// and a +/-/= footer.
ComparisonTable compare_table(const std::vector<SummaryRow>& rows, const std::string& baseline,
                              double alpha = 0.05);

// Files.
std::string trace_csv(const std::vector<TraceRow>& trace);
std::string population_csv(const std::vector<MemberSnapshot>& pop);
std::string summary_csv(const std::vector<SummaryRow>& rows);
std::vector<SummaryRow> parse_summary_csv(const std::string& text);

/// Creates the directory if needed and checks that it is writable.
void ensure_writable_dir(const std::string& dir);

/// One trace per run, a population snapshot per run and a mean trace per
/// (problem, variant) cell, plus results.csv. Existing results.csv rows with
/// other keys are kept.
void emit_traces(const ResultMatrix& matrix, const std::string& out_dir);

std::string run_file_stem(const std::string& problem, const std::string& variant_slug,
                          std::uint64_t seed);

/// Mean HV and IGD per generation index over the runs of one cell.
std::string aggregate_csv(const std::vector<const RunResult*>& runs);

/// key = value lines with '#' comments.
std::map<std::string, std::string> parse_key_values(const std::string& text);

struct BatchPlan {
    std::vector<RunConfig> configs;
    std::size_t seeds = 10;
    std::size_t jobs = 1;
    std::string out_dir = "results";
};

/// Builds a plan from config-file keys: problems, variants, pop, fe, seed,
/// seeds, jobs, out, fronts_dir, dispersion and agent overrides (gamma, tau,
/// actor_lr, critic_lr, batch_size, replay_capacity, sigma_start, sigma_end,
/// hidden). Unknown keys are a ConfigError.
BatchPlan plan_from_keys(const std::map<std::string, std::string>& keys);

std::string format_double(double v);

}  // namespace aop
