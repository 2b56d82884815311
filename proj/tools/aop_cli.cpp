#include "aop/errors.hpp"
#include "aop/harness.hpp"
#include "aop/problems.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kRuntime = 3, kIo = 4 };

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw aop::IoError("cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void spit(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content)) throw aop::IoError("cannot write " + path.string());
}

void report(const aop::ResultMatrix& m) {
    for (const auto& f : m.failures()) std::cerr << "run failed: " << f << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained multi-objective EA with an adaptive operator portfolio"};
    app.require_subcommand(1);

    aop::RunConfig run_cfg;
    std::string run_variant = "aop";
    std::string run_out = "results";
    auto* run = app.add_subcommand("run", "Run one configuration for one seed");
    run->add_option("--problem", run_cfg.problem, "Problem name")->required();
    run->add_option("--variant", run_variant, "aop | ga-only | de-rand-only | de-best-only | fixed-portfolio:a,b,c");
    run->add_option("--pop", run_cfg.pop, "Population size N");
    run->add_option("--fe", run_cfg.fe, "Evaluation budget");
    run->add_option("--seed", run_cfg.seed, "Seed index");
    run->add_option("--global-seed", run_cfg.global_seed, "Experiment seed");
    run->add_option("--out", run_out, "Output directory");
    run->add_option("--fronts", run_cfg.fronts_dir, "Reference-front cache directory");

    std::string batch_config;
    std::optional<std::size_t> batch_seeds, batch_jobs;
    std::optional<std::string> batch_out;
    auto* batch = app.add_subcommand("batch", "Run every configuration of a config file for several seeds");
    batch->add_option("--config", batch_config, "key = value config file")->required();
    batch->add_option("--seeds", batch_seeds, "Seeds per configuration");
    batch->add_option("--jobs", batch_jobs, "Concurrent runs");
    batch->add_option("--out", batch_out, "Output directory");

    std::string cmp_in = "results";
    std::string cmp_baseline = "aop";
    double cmp_alpha = 0.05;
    auto* compare = app.add_subcommand("compare", "Tabulate final IGD of a results directory");
    compare->add_option("--in", cmp_in, "Directory holding results.csv");
    compare->add_option("--baseline", cmp_baseline, "Baseline variant");
    compare->add_option("--alpha", cmp_alpha, "Significance level");

    std::string fronts_problem = "all";
    std::size_t fronts_n = aop::kDefaultFrontSize;
    std::string fronts_out = "fronts";
    auto* fronts = app.add_subcommand("fronts", "Regenerate reference-front cache files");
    fronts->add_option("--problem", fronts_problem, "Problem name or 'all'");
    fronts->add_option("--n", fronts_n, "Points per front");
    fronts->add_option("--out", fronts_out, "Cache directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*run) {
            run_cfg.variant = aop::Variant::parse(run_variant);
            run_cfg.validate();
            aop::ensure_writable_dir(run_out);
            aop::ResultMatrix m;
            aop::BatchCell cell{run_cfg.problem, run_cfg.variant.name(), run_cfg.seed, {}, {}};
            cell.result = aop::run_single(run_cfg);
            m.cells.push_back(std::move(cell));
            aop::emit_traces(m, run_out);
            const auto& r = *m.cells.front().result;
            std::cout << r.problem << ' ' << r.variant << " seed " << r.seed << ": igd "
                      << aop::format_double(r.final_igd) << " hv " << aop::format_double(r.final_hv)
                      << " feasible " << aop::format_double(r.final_feasible_ratio) << " fe "
                      << r.consumed_fe << '\n';
        } else if (*batch) {
            auto plan = aop::plan_from_keys(aop::parse_key_values(slurp(batch_config)));
            if (batch_seeds) plan.seeds = *batch_seeds;
            if (batch_jobs) plan.jobs = *batch_jobs;
            if (batch_out) plan.out_dir = *batch_out;
            aop::ensure_writable_dir(plan.out_dir);
            const auto m = aop::run_batch(plan.configs, plan.seeds, plan.jobs);
            aop::emit_traces(m, plan.out_dir);
            report(m);
            std::cout << m.cells.size() << " runs, " << m.failures().size() << " failed\n";
            if (!m.failures().empty()) return kRuntime;
        } else if (*compare) {
            const auto rows = aop::parse_summary_csv(slurp((fs::path(cmp_in) / "results.csv").string()));
            const auto table = aop::compare_table(rows, cmp_baseline, cmp_alpha);
            spit(fs::path(cmp_in) / "comparison.txt", table.text);
            spit(fs::path(cmp_in) / "comparison.csv", table.csv);
            std::cout << table.text;
        } else if (*fronts) {
            aop::ensure_writable_dir(fronts_out);
            std::vector<std::string> names =
                fronts_problem == "all" ? aop::problem_names() : std::vector<std::string>{fronts_problem};
            for (const auto& name : names) {
                const auto& problem = aop::find_problem(name);
                const auto front = aop::front_objectives(aop::sample_reference_front(problem, fronts_n));
                const auto path = fs::path(fronts_out) / aop::front_cache_filename(name);
                std::ofstream out(path);
                if (!out) throw aop::IoError("cannot write " + path.string());
                aop::write_front_cache(out, name, front);
                if (!out) throw aop::IoError("cannot write " + path.string());
                std::cout << name << ": " << front.size() << " points -> " << path.string() << '\n';
            }
        }
    } catch (const aop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const aop::InvalidInput& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const aop::IoError& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return kIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntime;
    }
    return kOk;
}
