#include "aop/harness.hpp"

#include "aop/errors.hpp"
#include "aop/host.hpp"
#include "aop/metrics.hpp"
#include "aop/problems.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace aop {

namespace fs = std::filesystem;

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    const auto t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError("bad number for " + what + ": '" + s + "'");
    }
    return v;
}

std::uint64_t parse_count(const std::string& s, const std::string& what) {
    std::uint64_t v = 0;
    const auto t = trim(s);
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc() || res.ptr != t.data() + t.size()) {
        throw ConfigError("bad integer for " + what + ": '" + s + "'");
    }
    return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// Variants

Variant Variant::parse(const std::string& text) {
    Variant v;
    if (text == "aop") v.kind = VariantKind::Aop;
    else if (text == "ga-only") v.kind = VariantKind::GaOnly;
    else if (text == "de-rand-only") v.kind = VariantKind::DeRandOnly;
    else if (text == "de-best-only") v.kind = VariantKind::DeBestOnly;
    else if (text.rfind("fixed-portfolio", 0) == 0) {
        v.kind = VariantKind::FixedPortfolio;
        const auto colon = text.find(':');
        if (colon == std::string::npos) {
            throw ConfigError("fixed-portfolio needs proportions, e.g. fixed-portfolio:0.5,0.3,0.2");
        }
        const auto parts = split(text.substr(colon + 1), ',');
        if (parts.size() != kOperatorCount) throw ConfigError("fixed-portfolio needs three proportions");
        for (std::size_t k = 0; k < kOperatorCount; ++k) v.fixed.p[k] = parse_double(parts[k], "portfolio");
        if (!v.fixed.valid(1e-9)) throw ConfigError("fixed-portfolio proportions must lie on the simplex");
    } else {
        throw ConfigError("unknown variant: " + text);
    }
    return v;
}

std::string Variant::name() const {
    switch (kind) {
        case VariantKind::Aop: return "aop";
        case VariantKind::GaOnly: return "ga-only";
        case VariantKind::DeRandOnly: return "de-rand-only";
        case VariantKind::DeBestOnly: return "de-best-only";
        case VariantKind::FixedPortfolio:
            return "fixed-portfolio:" + format_double(fixed.p[0]) + "," + format_double(fixed.p[1]) +
                   "," + format_double(fixed.p[2]);
    }
    return "aop";
}

std::string Variant::slug() const {
    std::string s = name();
    for (auto& c : s) {
        if (c == ':' || c == ',') c = '_';
    }
    return s;
}

PortfolioAction Variant::pinned_action() const {
    switch (kind) {
        case VariantKind::GaOnly: return PortfolioAction::vertex(kSbx);
        case VariantKind::DeRandOnly: return PortfolioAction::vertex(kDeRand);
        case VariantKind::DeBestOnly: return PortfolioAction::vertex(kDeBest);
        case VariantKind::FixedPortfolio: return fixed;
        case VariantKind::Aop: break;
    }
    return PortfolioAction{};
}

AgentConfig AgentOverrides::apply(AgentConfig c) const {
    if (gamma) c.gamma = *gamma;
    if (tau) c.tau = *tau;
    if (actor_lr) c.actor_lr = *actor_lr;
    if (critic_lr) c.critic_lr = *critic_lr;
    if (sigma_start) c.sigma_start = *sigma_start;
    if (sigma_end) c.sigma_end = *sigma_end;
    if (batch_size) c.batch_size = *batch_size;
    if (replay_capacity) c.replay_capacity = *replay_capacity;
    if (hidden) {
        c.actor_hidden.assign(2, *hidden);
        c.critic_hidden.assign(2, *hidden);
    }
    return c;
}

void RunConfig::validate() const {
    try {
        find_problem(problem);
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
    if (pop < 4 || pop % 2 != 0) throw ConfigError("population size must be even and at least 4");
    if (fe < 2 * pop) throw ConfigError("evaluation budget must be at least twice the population size");
    if (variant.kind == VariantKind::FixedPortfolio && !variant.fixed.valid(1e-9)) {
        throw ConfigError("fixed portfolio is not on the simplex");
    }
    try {
        agent.apply(AgentConfig::for_objectives(find_problem(problem).M)).validate();
    } catch (const InvalidInput& e) {
        throw ConfigError(e.what());
    }
}

// ---------------------------------------------------------------------------
// Single run

std::vector<std::vector<double>> feasible_objectives(const std::vector<MemberSnapshot>& pop) {
    std::vector<std::vector<double>> out;
    for (const auto& m : pop) {
        if (m.cv == 0.0) out.push_back(m.f);
    }
    return out;
}

namespace {

std::vector<std::vector<double>> objectives_of(const Population& pop, bool feasible_only) {
    std::vector<std::vector<double>> out;
    out.reserve(pop.size());
    for (const auto& s : pop.members) {
        if (!feasible_only || s.feasible()) out.push_back(s.f());
    }
    return out;
}

double feasible_ratio(const Population& pop) {
    std::size_t n = 0;
    for (const auto& s : pop.members) n += s.feasible() ? 1 : 0;
    return static_cast<double>(n) / static_cast<double>(pop.size());
}

}  // namespace

RunResult run_single(const RunConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    const ProblemDescriptor& problem = find_problem(config.problem);
    const auto front = reference_front(problem, config.fronts_dir);
    IndicatorConfig indicators;
    indicators.ideal = problem.hv_ideal;
    indicators.reference = problem.hv_reference;

    const auto run_rng = CounterRng::from_ids(
        {config.global_seed, problem_index(config.problem), config.variant.index(), config.seed});
    CounterRng agent_rng = run_rng.split(2);
    CounterRng init_rng = run_rng.split(3);

    HostState host = initialize_host(problem, config.pop, config.fe,
                                     OperatorParams::for_dimension(problem.D), run_rng.split(1));

    std::optional<DdpgAgent> agent;
    if (config.variant.uses_agent()) {
        agent.emplace(config.agent.apply(AgentConfig::for_objectives(problem.M)), init_rng);
    }
    StateNormalizer normalize;
    auto observe = [&] {
        return normalize(extract_state(host.constrained.members, host.budget.consumed(), config.fe,
                                       config.dispersion));
    };
    EvolutionState state = observe();
    double hv_prev = hypervolume(objectives_of(host.constrained, false), indicators);

    RunResult result;
    result.problem = config.problem;
    result.variant = config.variant.name();
    result.seed = config.seed;
    result.fe_max = config.fe;
    result.pop = config.pop;

    while (host.budget.can_afford(config.pop)) {
        const PortfolioAction action =
            agent ? agent->select_action(state, true, agent_rng) : config.variant.pinned_action();
        step_generation(host, action);

        const double hv_new = hypervolume(objectives_of(host.constrained, false), indicators);
        const double reward = compute_reward(hv_prev, hv_new);
        EvolutionState next = observe();
        const bool terminal = !host.budget.can_afford(config.pop);

        double loss = kNaN;
        if (agent) {
            agent->store_transition({state, action, reward, next, terminal});
            if (auto diag = agent->train_step(agent_rng)) loss = diag->critic_loss;
        }

        TraceRow row;
        row.gen = host.generation;
        row.fe = host.budget.consumed();
        row.hv = hv_new;
        row.igd = igd(*front, objectives_of(host.constrained, true));
        row.feasible_ratio = feasible_ratio(host.constrained);
        row.action = action;
        row.reward = reward;
        row.critic_loss = loss;
        result.trace.push_back(row);

        state = std::move(next);
        hv_prev = hv_new;
    }

    for (const auto& s : host.constrained.members) {
        result.final_population.push_back({s.x, s.f(), s.cv()});
    }
    result.final_igd = igd(*front, feasible_objectives(result.final_population));
    result.final_hv = hv_prev;
    result.final_feasible_ratio = feasible_ratio(host.constrained);
    result.consumed_fe = host.budget.consumed();
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

// ---------------------------------------------------------------------------
// Batches

std::vector<std::string> ResultMatrix::failures() const {
    std::vector<std::string> out;
    for (const auto& c : cells) {
        if (!c.error.empty()) {
            out.push_back(c.problem + " / " + c.variant + " / seed " + std::to_string(c.seed) + ": " + c.error);
        }
    }
    return out;
}

ResultMatrix run_batch(const std::vector<RunConfig>& configs, std::size_t seeds,
                       std::size_t parallelism) {
    if (seeds < 1) throw ConfigError("batch needs at least one seed");
    std::vector<RunConfig> tasks;
    for (const auto& c : configs) {
        for (std::uint64_t s = 0; s < seeds; ++s) {
            RunConfig t = c;
            t.seed = s;
            tasks.push_back(std::move(t));
        }
    }
    ResultMatrix matrix;
    matrix.cells.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            auto& cell = matrix.cells[i];
            cell.problem = tasks[i].problem;
            cell.variant = tasks[i].variant.name();
            cell.seed = tasks[i].seed;
            try {
                cell.result = run_single(tasks[i]);
            } catch (const std::exception& e) {
                cell.error = e.what();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(parallelism, tasks.size()));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return matrix;
}

std::vector<SummaryRow> summarize(const ResultMatrix& matrix) {
    std::vector<SummaryRow> rows;
    for (const auto& c : matrix.cells) {
        SummaryRow r;
        r.problem = c.problem;
        r.variant = c.variant;
        r.seed = c.seed;
        if (c.result) {
            r.final_igd = c.result->final_igd;
            r.final_hv = c.result->final_hv;
            r.feasible_ratio = c.result->final_feasible_ratio;
            r.consumed_fe = c.result->consumed_fe;
        } else {
            r.final_igd = r.final_hv = r.feasible_ratio = kNaN;
            r.status = "failed";
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Comparison tables

namespace {

struct CellStats {
    std::vector<double> igd;
    double mean = kNaN;
    double stddev = kNaN;
    bool any_nan = false;
};

CellStats stats_of(std::vector<double> values) {
    CellStats s;
    s.igd = values;
    std::vector<double> finite;
    for (double v : values) {
        if (std::isfinite(v)) finite.push_back(v);
        else s.any_nan = true;
    }
    if (finite.empty()) return s;
    double sum = 0.0;
    for (double v : finite) sum += v;
    s.mean = sum / static_cast<double>(finite.size());
    double ss = 0.0;
    for (double v : finite) ss += (v - s.mean) * (v - s.mean);
    s.stddev = finite.size() > 1 ? std::sqrt(ss / static_cast<double>(finite.size() - 1)) : 0.0;
    return s;
}

std::string sci(double v, int digits) {
    if (std::isnan(v)) return "NaN";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*e", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

}  // namespace

ComparisonTable compare_table(const std::vector<SummaryRow>& rows, const std::string& baseline,
                              double alpha) {
    std::vector<std::string> problems, variants;
    std::map<std::pair<std::string, std::string>, std::vector<double>> cells;
    for (const auto& r : rows) {
        if (std::find(problems.begin(), problems.end(), r.problem) == problems.end()) problems.push_back(r.problem);
        if (std::find(variants.begin(), variants.end(), r.variant) == variants.end()) variants.push_back(r.variant);
        cells[{r.problem, r.variant}].push_back(r.status == "ok" ? r.final_igd : kNaN);
    }
    if (std::find(variants.begin(), variants.end(), baseline) == variants.end()) {
        throw ConfigError("baseline variant not present in results: " + baseline);
    }
    // Baseline first, then the rest in order of appearance.
    std::stable_partition(variants.begin(), variants.end(), [&](const std::string& v) { return v == baseline; });

    ComparisonTable table;
    for (const auto& v : variants) table.counts[v] = {0, 0, 0};
    std::ostringstream csv;
    csv << "problem,variant,runs,mean_igd,std_igd,median_igd,p_value,verdict,best\n";

    const std::size_t w0 = 10, wc = 28;
    std::ostringstream text;
    text << pad("problem", w0);
    for (const auto& v : variants) text << pad(v, wc);
    text << '\n';

    for (const auto& p : problems) {
        std::map<std::string, CellStats> stats;
        for (const auto& v : variants) stats[v] = stats_of(cells[{p, v}]);
        // Best mean of the row; cells with failed or infeasible runs rank last.
        std::string best;
        for (int pass = 0; pass < 2 && best.empty(); ++pass) {
            double best_mean = std::numeric_limits<double>::infinity();
            for (const auto& v : variants) {
                const auto& s = stats[v];
                if (std::isnan(s.mean) || (pass == 0 && s.any_nan)) continue;
                if (s.mean < best_mean) {
                    best_mean = s.mean;
                    best = v;
                }
            }
        }
        const auto& base = stats[baseline].igd;
        text << pad(p, w0);
        for (const auto& v : variants) {
            const auto& s = stats[v];
            std::string verdict = "";
            double pval = kNaN;
            if (!s.igd.empty() && !base.empty()) {
                const auto res = wilcoxon_rank_sum(s.igd, base, alpha);
                pval = res.p_value;
                verdict = std::string(1, verdict_symbol(res.verdict));
                auto& c = table.counts[v];
                ++c[res.verdict == Verdict::Better ? 0 : res.verdict == Verdict::Worse ? 1 : 2];
            }
            std::string cell = sci(s.mean, 4) + " (" + sci(s.stddev, 2) + ")";
            if (v != baseline) cell += " " + verdict;
            if (v == best) cell += " *";
            text << pad(cell, wc);
            csv << p << ',' << v << ',' << s.igd.size() << ',' << format_double(s.mean) << ','
                << format_double(s.stddev) << ',' << format_double(median(s.igd)) << ','
                << format_double(pval) << ',' << verdict << ',' << (v == best ? 1 : 0) << '\n';
        }
        text << '\n';
    }
    text << pad("+/-/=", w0);
    for (const auto& v : variants) {
        const auto& c = table.counts[v];
        const std::string cell = v == baseline ? "(baseline)"
                                               : std::to_string(c[0]) + "/" + std::to_string(c[1]) +
                                                     "/" + std::to_string(c[2]);
        text << pad(cell, wc);
    }
    text << '\n';
    table.text = text.str();
    table.csv = csv.str();
    return table;
}

// ---------------------------------------------------------------------------
// Files

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    os << "gen,fe,hv,igd,feasible_ratio,p_sbx,p_derand,p_debest,reward,critic_loss\n";
    for (const auto& r : trace) {
        os << r.gen << ',' << r.fe << ',' << format_double(r.hv) << ',' << format_double(r.igd) << ','
           << format_double(r.feasible_ratio) << ',' << format_double(r.action.p[0]) << ','
           << format_double(r.action.p[1]) << ',' << format_double(r.action.p[2]) << ','
           << format_double(r.reward) << ',' << format_double(r.critic_loss) << '\n';
    }
    return os.str();
}

std::string population_csv(const std::vector<MemberSnapshot>& pop) {
    std::ostringstream os;
    if (pop.empty()) return "cv\n";
    for (std::size_t d = 0; d < pop.front().x.size(); ++d) os << 'x' << d + 1 << ',';
    for (std::size_t k = 0; k < pop.front().f.size(); ++k) os << 'f' << k + 1 << ',';
    os << "cv\n";
    for (const auto& m : pop) {
        for (double v : m.x) os << format_double(v) << ',';
        for (double v : m.f) os << format_double(v) << ',';
        os << format_double(m.cv) << '\n';
    }
    return os.str();
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream os;
    os << "problem,variant,seed,final_igd,final_hv,feasible_ratio,consumed_fe,status\n";
    for (const auto& r : rows) {
        os << r.problem << ',' << '"' << r.variant << '"' << ',' << r.seed << ','
           << format_double(r.final_igd) << ',' << format_double(r.final_hv) << ','
           << format_double(r.feasible_ratio) << ',' << r.consumed_fe << ',' << r.status << '\n';
    }
    return os.str();
}

std::vector<SummaryRow> parse_summary_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.rfind("problem,variant,seed", 0) != 0) {
        throw IoError("results.csv: missing header");
    }
    std::vector<SummaryRow> rows;
    while (std::getline(is, line)) {
        if (trim(line).empty()) continue;
        // The variant is quoted because fixed portfolios contain commas.
        std::vector<std::string> fields;
        std::string cur;
        bool quoted = false;
        for (char c : line) {
            if (c == '"') quoted = !quoted;
            else if (c == ',' && !quoted) {
                fields.push_back(cur);
                cur.clear();
            } else {
                cur += c;
            }
        }
        fields.push_back(cur);
        if (fields.size() != 8) throw IoError("results.csv: malformed row: " + line);
        SummaryRow r;
        try {
            r.problem = fields[0];
            r.variant = fields[1];
            r.seed = parse_count(fields[2], "seed");
            r.final_igd = parse_double(fields[3], "final_igd");
            r.final_hv = parse_double(fields[4], "final_hv");
            r.feasible_ratio = parse_double(fields[5], "feasible_ratio");
            r.consumed_fe = parse_count(fields[6], "consumed_fe");
            r.status = trim(fields[7]);
        } catch (const ConfigError& e) {
            throw IoError(std::string("results.csv: ") + e.what());
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

void ensure_writable_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) throw IoError("cannot create directory: " + dir);
    const auto probe = fs::path(dir) / ".write_probe";
    {
        std::ofstream out(probe);
        if (!out || !(out << "ok")) throw IoError("directory is not writable: " + dir);
    }
    fs::remove(probe, ec);
}

std::string run_file_stem(const std::string& problem, const std::string& variant_slug,
                          std::uint64_t seed) {
    return problem + "__" + variant_slug + "__s" + std::to_string(seed);
}

std::string aggregate_csv(const std::vector<const RunResult*>& runs) {
    std::ostringstream os;
    os << "gen,fe,mean_hv,mean_igd,runs\n";
    std::size_t gens = 0;
    for (const auto* r : runs) gens = std::max(gens, r->trace.size());
    for (std::size_t g = 0; g < gens; ++g) {
        double hv = 0.0, igd_sum = 0.0;
        std::size_t n = 0, n_igd = 0;
        std::size_t fe = 0;
        for (const auto* r : runs) {
            if (g >= r->trace.size()) continue;
            const auto& row = r->trace[g];
            fe = row.fe;
            hv += row.hv;
            ++n;
            if (std::isfinite(row.igd)) {
                igd_sum += row.igd;
                ++n_igd;
            }
        }
        os << g + 1 << ',' << fe << ',' << format_double(hv / static_cast<double>(n)) << ','
           << format_double(n_igd ? igd_sum / static_cast<double>(n_igd) : kNaN) << ',' << n << '\n';
    }
    return os.str();
}

namespace {

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw IoError("cannot write " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

}  // namespace

void emit_traces(const ResultMatrix& matrix, const std::string& out_dir) {
    ensure_writable_dir(out_dir);
    const fs::path dir(out_dir);
    std::map<std::pair<std::string, std::string>, std::vector<const RunResult*>> groups;
    std::map<std::pair<std::string, std::string>, std::string> slugs;
    for (const auto& c : matrix.cells) {
        if (!c.result) continue;
        const std::string slug = Variant::parse(c.variant).slug();
        const auto stem = run_file_stem(c.problem, slug, c.seed);
        write_file(dir / (stem + ".csv"), trace_csv(c.result->trace));
        write_file(dir / (stem + "__population.csv"), population_csv(c.result->final_population));
        groups[{c.problem, c.variant}].push_back(&*c.result);
        slugs[{c.problem, c.variant}] = slug;
    }
    for (const auto& [key, runs] : groups) {
        write_file(dir / (key.first + "__" + slugs[key] + "__mean.csv"), aggregate_csv(runs));
    }

    // Merge into results.csv, replacing rows with the same key.
    auto fresh = summarize(matrix);
    std::vector<SummaryRow> merged;
    const auto results_path = dir / "results.csv";
    if (fs::exists(results_path)) {
        for (auto& r : parse_summary_csv(read_file(results_path))) {
            const bool replaced = std::any_of(fresh.begin(), fresh.end(), [&](const SummaryRow& f) {
                return f.problem == r.problem && f.variant == r.variant && f.seed == r.seed;
            });
            if (!replaced) merged.push_back(std::move(r));
        }
    }
    merged.insert(merged.end(), fresh.begin(), fresh.end());
    write_file(results_path, summary_csv(merged));
}

// ---------------------------------------------------------------------------
// Config files

std::map<std::string, std::string> parse_key_values(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream is(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        if (trim(line).empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
        out[key] = trim(line.substr(eq + 1));
    }
    return out;
}

BatchPlan plan_from_keys(const std::map<std::string, std::string>& keys) {
    BatchPlan plan;
    RunConfig base;
    std::vector<std::string> problems = problem_names();
    std::vector<std::string> variants = {"aop", "ga-only", "de-rand-only", "de-best-only"};
    for (const auto& [k, v] : keys) {
        if (k == "problems") problems = split(v, ',');
        else if (k == "variants") {
            // Fixed portfolios carry commas; separate variants with ';' or whitespace.
            variants.clear();
            std::istringstream is(v);
            std::string tok;
            while (is >> tok) {
                for (auto& part : split(tok, ';')) {
                    if (!part.empty()) variants.push_back(part);
                }
            }
            if (variants.size() == 1 && variants[0].find(',') != std::string::npos &&
                variants[0].rfind("fixed-portfolio", 0) != 0) {
                variants = split(variants[0], ',');
            }
        }
        else if (k == "pop") base.pop = parse_count(v, k);
        else if (k == "fe") base.fe = parse_count(v, k);
        else if (k == "seed") base.global_seed = parse_count(v, k);
        else if (k == "seeds") plan.seeds = parse_count(v, k);
        else if (k == "jobs") plan.jobs = parse_count(v, k);
        else if (k == "out") plan.out_dir = v;
        else if (k == "fronts_dir") base.fronts_dir = v;
        else if (k == "dispersion") {
            if (v == "variance") base.dispersion = DispersionFormula::Variance;
            else if (v == "literal") base.dispersion = DispersionFormula::LiteralPrinted;
            else throw ConfigError("dispersion must be 'variance' or 'literal'");
        }
        else if (k == "gamma") base.agent.gamma = parse_double(v, k);
        else if (k == "tau") base.agent.tau = parse_double(v, k);
        else if (k == "actor_lr") base.agent.actor_lr = parse_double(v, k);
        else if (k == "critic_lr") base.agent.critic_lr = parse_double(v, k);
        else if (k == "sigma_start") base.agent.sigma_start = parse_double(v, k);
        else if (k == "sigma_end") base.agent.sigma_end = parse_double(v, k);
        else if (k == "batch_size") base.agent.batch_size = parse_count(v, k);
        else if (k == "replay_capacity") base.agent.replay_capacity = parse_count(v, k);
        else if (k == "hidden") base.agent.hidden = parse_count(v, k);
        else throw ConfigError("unknown config key: " + k);
    }
    for (const auto& p : problems) {
        for (const auto& v : variants) {
            RunConfig c = base;
            c.problem = p;
            c.variant = Variant::parse(v);
            c.validate();
            plan.configs.push_back(std::move(c));
        }
    }
    return plan;
}

}  // namespace aop
