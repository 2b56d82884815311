#include "aop/errors.hpp"
#include "aop/harness.hpp"
#include "aop/metrics.hpp"
#include "aop/problems.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

using namespace aop;
namespace fs = std::filesystem;

namespace {

RunConfig small(const std::string& problem, const std::string& variant, std::size_t fe = 800) {
    RunConfig c;
    c.problem = problem;
    c.variant = Variant::parse(variant);
    c.pop = 20;
    c.fe = fe;
    return c;
}

std::string read(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("aop_test_" + name);
    fs::remove_all(dir);
    return dir;
}

void register_failing_problem() {
    static bool done = false;
    if (done) return;
    done = true;
    ProblemDescriptor p;
    p.name = "FAILING";
    p.D = 1;
    p.lower = {0.0};
    p.upper = {1.0};
    p.raw = [](std::span<const double> x, Evaluation& e) {
        e.objectives[0] = x[0];
        e.objectives[1] = x[0] >= 0.5 ? 1.0 - x[0] : std::numeric_limits<double>::quiet_NaN();
    };
    p.front_candidates = [](const ProblemDescriptor&) {
        std::vector<FrontPoint> pts;
        for (int i = 50; i <= 100; ++i) pts.push_back({{i / 100.0}, {}});
        return pts;
    };
    register_problem(std::move(p));
}

SummaryRow row(const std::string& problem, const std::string& variant, std::uint64_t seed, double igd) {
    SummaryRow r;
    r.problem = problem;
    r.variant = variant;
    r.seed = seed;
    r.final_igd = igd;
    return r;
}

}  // namespace

TEST_CASE("variant names") {
    for (const char* name : {"aop", "ga-only", "de-rand-only", "de-best-only"}) {
        CHECK(Variant::parse(name).name() == name);
    }
    const auto fx = Variant::parse("fixed-portfolio:0.5,0.25,0.25");
    CHECK(fx.kind == VariantKind::FixedPortfolio);
    CHECK(fx.pinned_action().p == std::array<double, 3>{0.5, 0.25, 0.25});
    CHECK(fx.slug() == "fixed-portfolio_0.5_0.25_0.25");
    CHECK(Variant::parse(fx.name()).pinned_action().p == fx.pinned_action().p);
    CHECK_THROWS_AS(Variant::parse("sbx"), ConfigError);
    CHECK_THROWS_AS(Variant::parse("fixed-portfolio:0.5,0.6,0.1"), ConfigError);
    CHECK_THROWS_AS(Variant::parse("fixed-portfolio"), ConfigError);
}

TEST_CASE("run config validation") {
    auto c = small("BNH", "aop");
    CHECK_NOTHROW(c.validate());
    c.pop = 21;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small("BNH", "aop");
    c.fe = 39;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = small("NOPE", "aop");
    CHECK_THROWS_AS(run_single(c), ConfigError);
    c = small("BNH", "aop");
    c.agent.gamma = 1.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("single-operator variants pin the action") {
    const auto r = run_single(small("TNK", "ga-only"));
    REQUIRE(!r.trace.empty());
    for (const auto& t : r.trace) {
        CHECK(t.action.p == std::array<double, 3>{1.0, 0.0, 0.0});
        CHECK(std::isnan(t.critic_loss));
    }
    const auto d = run_single(small("TNK", "de-best-only"));
    for (const auto& t : d.trace) CHECK(t.action.p == std::array<double, 3>{0.0, 0.0, 1.0});
}

TEST_CASE("budget arithmetic") {
    const auto one = run_single(small("BNH", "aop", 40));
    CHECK(one.trace.size() == 1);
    CHECK(one.consumed_fe == 40);

    const auto r = run_single(small("CONSTR", "aop", 810));
    CHECK(r.consumed_fe <= 810);
    CHECK(r.consumed_fe + 20 > 810);
    CHECK(r.trace.size() == 39);
    for (std::size_t i = 1; i < r.trace.size(); ++i) CHECK(r.trace[i].fe > r.trace[i - 1].fe);
    CHECK(r.trace.back().fe == r.consumed_fe);
}

TEST_CASE("aop actions lie on the simplex and the agent trains") {
    const auto r = run_single(small("SRN", "aop", 2000));
    bool trained = false;
    for (const auto& t : r.trace) {
        CHECK(t.action.valid(1e-9));
        trained = trained || std::isfinite(t.critic_loss);
    }
    CHECK(trained);
}

TEST_CASE("final IGD is recomputed from the snapshot") {
    const auto r = run_single(small("TNK", "aop"));
    const auto front = reference_front(find_problem("TNK"));
    CHECK(r.final_igd == igd(*front, feasible_objectives(r.final_population)));
    CHECK(r.final_igd == r.trace.back().igd);
    CHECK(r.final_population.size() == 20);
}

TEST_CASE("runs are deterministic") {
    const auto a = run_single(small("OSY", "aop"));
    const auto b = run_single(small("OSY", "aop"));
    CHECK(trace_csv(a.trace) == trace_csv(b.trace));
    auto other = small("OSY", "aop");
    other.seed = 1;
    CHECK(trace_csv(run_single(other).trace) != trace_csv(a.trace));
}

TEST_CASE("trace CSV layout") {
    const auto r = run_single(small("BNH", "ga-only", 80));
    const auto csv = trace_csv(r.trace);
    std::istringstream is(csv);
    std::string header;
    std::getline(is, header);
    CHECK(header == "gen,fe,hv,igd,feasible_ratio,p_sbx,p_derand,p_debest,reward,critic_loss");
    std::string line;
    std::size_t rows = 0;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == r.trace.size());
}

TEST_CASE("batches are independent of parallelism") {
    const std::vector<RunConfig> configs{small("TNK", "aop", 200), small("BNH", "de-rand-only", 200)};
    const auto serial = run_batch(configs, 3, 1);
    const auto parallel = run_batch(configs, 3, 4);
    REQUIRE(serial.cells.size() == 6);
    REQUIRE(parallel.cells.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(serial.cells[i].problem == parallel.cells[i].problem);
        CHECK(serial.cells[i].seed == parallel.cells[i].seed);
        CHECK(trace_csv(serial.cells[i].result->trace) == trace_csv(parallel.cells[i].result->trace));
    }
    CHECK(serial.cells[0].seed == 0);
    CHECK(serial.cells[2].seed == 2);
    CHECK(serial.cells[3].problem == "BNH");
    CHECK_THROWS_AS(run_batch(configs, 0, 1), ConfigError);
}

TEST_CASE("a failing run does not stop the batch") {
    register_failing_problem();
    const std::vector<RunConfig> configs{small("FAILING", "ga-only", 200), small("TNK", "ga-only", 200)};
    const auto m = run_batch(configs, 2, 1);
    REQUIRE(m.failures().size() == 2);
    CHECK(m.failures()[0].find("FAILING") != std::string::npos);
    CHECK(m.cells[2].result.has_value());
    CHECK(m.cells[3].result.has_value());
    const auto rows = summarize(m);
    CHECK(rows[0].status == "failed");
    CHECK(rows[3].status == "ok");
}

TEST_CASE("comparison against itself is all similar") {
    std::vector<SummaryRow> rows;
    for (const char* p : {"BNH", "TNK"}) {
        for (std::uint64_t s = 0; s < 5; ++s) {
            rows.push_back(row(p, "aop", s, 1.0 + s));
            rows.push_back(row(p, "ga-only", s, 1.0 + s));
        }
    }
    const auto t = compare_table(rows, "aop");
    CHECK(t.counts.at("aop") == std::array<std::size_t, 3>{0, 0, 2});
    CHECK(t.counts.at("ga-only") == std::array<std::size_t, 3>{0, 0, 2});
    CHECK(t.text.find("0/0/2") != std::string::npos);
}

TEST_CASE("a uniformly better variant gets a plus") {
    std::vector<SummaryRow> rows;
    for (std::uint64_t s = 0; s < 30; ++s) {
        rows.push_back(row("SRN", "aop", s, 10.0 + s));
        rows.push_back(row("SRN", "de-rand-only", s, 1.0 + 0.01 * s));
    }
    const auto t = compare_table(rows, "aop");
    CHECK(t.counts.at("de-rand-only") == std::array<std::size_t, 3>{1, 0, 0});
    CHECK(t.text.find("+ *") != std::string::npos);
    CHECK(t.csv.find("SRN,de-rand-only,30,") != std::string::npos);
}

TEST_CASE("all-NaN cells render as NaN and rank worst") {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<SummaryRow> rows;
    for (std::uint64_t s = 0; s < 5; ++s) {
        rows.push_back(row("OSY", "aop", s, 2.0 + s));
        rows.push_back(row("OSY", "de-best-only", s, nan));
    }
    const auto t = compare_table(rows, "aop");
    CHECK(t.text.find("NaN (NaN)") != std::string::npos);
    CHECK(t.counts.at("de-best-only")[1] == 1);
    CHECK(t.text.find("(") < t.text.find("*"));
    CHECK_THROWS_AS(compare_table(rows, "ga-only"), ConfigError);
}

TEST_CASE("emitted files") {
    const auto dir = scratch("emit");
    const std::vector<RunConfig> configs{small("TNK", "aop", 200), small("TNK", "fixed-portfolio:0.2,0.3,0.5", 200)};
    const auto m = run_batch(configs, 2, 1);
    emit_traces(m, dir.string());
    const auto stem = run_file_stem("TNK", "aop", 1);
    CHECK(fs::exists(dir / (stem + ".csv")));
    CHECK(fs::exists(dir / (stem + "__population.csv")));
    CHECK(fs::exists(dir / "TNK__fixed-portfolio_0.2_0.3_0.5__mean.csv"));
    const auto mean = read(dir / "TNK__aop__mean.csv");
    std::size_t lines = std::count(mean.begin(), mean.end(), '\n');
    CHECK(lines == 1 + m.cells[0].result->trace.size());

    const auto first = read(dir / (stem + ".csv"));
    const auto results = read(dir / "results.csv");
    emit_traces(m, dir.string());
    CHECK(read(dir / (stem + ".csv")) == first);
    CHECK(read(dir / "results.csv") == results);
    const auto rows = parse_summary_csv(results);
    CHECK(rows.size() == 4);
    CHECK(rows[2].variant == "fixed-portfolio:0.2,0.3,0.5");
    fs::remove_all(dir);
}

TEST_CASE("single-seed aggregate equals the trace") {
    const auto r = run_single(small("CONSTR", "de-rand-only", 200));
    const auto agg = aggregate_csv({&r});
    std::istringstream a(agg), t(trace_csv(r.trace));
    std::string la, lt;
    std::getline(a, la);
    std::getline(t, lt);
    while (std::getline(a, la) && std::getline(t, lt)) {
        std::vector<std::string> fa, ft;
        std::string cell;
        for (std::istringstream s(la); std::getline(s, cell, ',');) fa.push_back(cell);
        for (std::istringstream s(lt); std::getline(s, cell, ',');) ft.push_back(cell);
        CHECK(fa[0] == ft[0]);
        CHECK(fa[1] == ft[1]);
        CHECK(fa[2] == ft[2]);
        CHECK(fa[3] == ft[3]);
        CHECK(fa[4] == "1");
    }
}

TEST_CASE("unwritable output directory") {
    const auto dir = scratch("blocked");
    fs::create_directories(dir);
    {
        std::ofstream(dir / "file") << "x";
    }
    CHECK_THROWS_AS(ensure_writable_dir((dir / "file" / "sub").string()), IoError);
    fs::remove_all(dir);
}

TEST_CASE("summary CSV round trip") {
    std::vector<SummaryRow> rows{row("BNH", "aop", 3, 0.125), row("TNK", "fixed-portfolio:0.5,0.5,0", 1,
                                                                    std::numeric_limits<double>::quiet_NaN())};
    rows[1].status = "failed";
    const auto back = parse_summary_csv(summary_csv(rows));
    REQUIRE(back.size() == 2);
    CHECK(back[0].final_igd == 0.125);
    CHECK(back[1].variant == "fixed-portfolio:0.5,0.5,0");
    CHECK(std::isnan(back[1].final_igd));
    CHECK(back[1].status == "failed");
    CHECK_THROWS_AS(parse_summary_csv("nonsense\n"), IoError);
}

TEST_CASE("config files") {
    const auto keys = parse_key_values(
        "# experiment\nproblems = BNH, TNK\nvariants = aop de-rand-only\npop = 40  # small\nfe = 400\n"
        "seeds = 3\njobs = 2\nactor_lr = 0.001\nhidden = 16\n");
    const auto plan = plan_from_keys(keys);
    REQUIRE(plan.configs.size() == 4);
    CHECK(plan.seeds == 3);
    CHECK(plan.jobs == 2);
    CHECK(plan.configs[1].problem == "BNH");
    CHECK(plan.configs[1].variant.name() == "de-rand-only");
    CHECK(plan.configs[0].pop == 40);
    CHECK(*plan.configs[0].agent.actor_lr == 0.001);
    CHECK(plan.configs[0].agent.apply(AgentConfig{}).actor_hidden == std::vector<std::size_t>{16, 16});

    const auto defaults = plan_from_keys({});
    CHECK(defaults.configs.size() == 4 * problem_names().size());
    CHECK(defaults.configs[0].pop == 100);
    CHECK(defaults.configs[0].fe == 20000);
    CHECK(defaults.seeds == 10);

    CHECK_THROWS_AS(plan_from_keys({{"colour", "blue"}}), ConfigError);
    CHECK_THROWS_AS(plan_from_keys({{"pop", "many"}}), ConfigError);
    CHECK_THROWS_AS(parse_key_values("no equals sign\n"), ConfigError);
}
