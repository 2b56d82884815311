// Acceptance checks. `acceptance` runs every criterion; `acceptance <k>` runs one.
// Each criterion prints a single PASS/FAIL line and the exit status is nonzero
// when any selected criterion fails.

#include "aop/agent.hpp"
#include "aop/harness.hpp"
#include "aop/metrics.hpp"
#include "aop/operators.hpp"
#include "aop/problems.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

using namespace aop;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// 1 -------------------------------------------------------------------------

Outcome gradient_oracle() {
    const auto t0 = Clock::now();
    CounterRng rng(101);
    double worst = 0.0;
    std::size_t checked = 0;
    for (int net = 0; net < 50; ++net) {
        const std::size_t layers = 1 + rng() % 3;
        auto width = [&] { return static_cast<std::size_t>(1 + rng() % 16); };
        const std::size_t state = 2 + rng() % 7;

        // Actor: state -> hidden... -> 3, softmax head.
        std::vector<std::size_t> adims{state};
        std::vector<Activation> aacts;
        for (std::size_t l = 0; l + 1 < layers; ++l) {
            adims.push_back(width());
            aacts.push_back(Activation::Tanh);
        }
        adims.push_back(3);
        aacts.push_back(Activation::Softmax);
        const Mlp actor(adims, aacts, rng);
        const Eigen::VectorXd sx = Eigen::VectorXd::Random(static_cast<Eigen::Index>(state));
        std::vector<Eigen::Index> all_inputs(state);
        for (std::size_t k = 0; k < state; ++k) all_inputs[k] = static_cast<Eigen::Index>(k);
        auto ra = oracle::check_gradients(actor, sx, Eigen::VectorXd::Random(3), all_inputs);

        // Critic: (state, action) -> hidden... -> 1; the action coordinates are
        // the last three inputs.
        std::vector<std::size_t> cdims{state + 3};
        std::vector<Activation> cacts;
        for (std::size_t l = 0; l + 1 < layers; ++l) {
            cdims.push_back(width());
            cacts.push_back(Activation::Tanh);
        }
        cdims.push_back(1);
        cacts.push_back(Activation::Identity);
        const Mlp critic(cdims, cacts, rng);
        Eigen::VectorXd cx(static_cast<Eigen::Index>(state + 3));
        cx.head(static_cast<Eigen::Index>(state)) = sx;
        cx.tail(3) = softmax(Eigen::VectorXd::Random(3));
        const Eigen::Index action_coords[] = {static_cast<Eigen::Index>(state), static_cast<Eigen::Index>(state + 1),
                                              static_cast<Eigen::Index>(state + 2)};
        auto rc = oracle::check_gradients(critic, cx, Eigen::VectorXd::Ones(1), action_coords);

        worst = std::max({worst, ra.worst_relative_error, rc.worst_relative_error});
        checked += ra.checked + rc.checked;
    }
    const double t = seconds_since(t0);
    return {worst < 1e-4 && t < 10.0,
            std::to_string(checked) + " gradients, worst relative error " + fmt("%.2e", worst) + ", " +
                fmt("%.2f", t) + " s"};
}

// 2 -------------------------------------------------------------------------

Outcome ddpg_stub() {
    const auto t0 = Clock::now();
    CounterRng rng(202);
    bool ok = true;
    std::string masses;
    for (int trial = 0; trial < 5; ++trial) {
        std::array<double, 3> w{};
        do {
            const auto a = dirichlet_uniform(rng);
            w = a.p;
        } while (std::abs(*std::max_element(w.begin(), w.end()) -
                          [&] { auto v = w; std::sort(v.begin(), v.end()); return v[1]; }()) < 1e-3);
        const auto out = oracle::run_bandit_stub(w, 1000 + static_cast<std::uint64_t>(trial));
        const double mass = out.action.p[out.argmax];
        ok = ok && mass > 0.9;
        masses += (trial ? " " : "") + fmt("%.3f", mass);
    }
    const double t = seconds_since(t0);
    return {ok && t < 30.0, "mass on argmax w*: " + masses + ", " + fmt("%.2f", t) + " s"};
}

// 3 -------------------------------------------------------------------------

Outcome hv_oracle() {
    const auto t0 = Clock::now();
    IndicatorConfig unit;
    unit.ideal = {0.0, 0.0};
    unit.reference = {1.0, 1.0};
    CounterRng rng(303);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        PointSet pts(1 + rng() % 20, std::vector<double>(2));
        for (auto& p : pts) for (auto& v : p) v = rng.uniform();
        worst = std::max(worst, std::abs(hypervolume(pts, unit) - oracle::grid_box_union(pts, 3000)));
    }
    const double ref[] = {3.0, 3.0};
    const double two = dominated_volume_2d({{1, 2}, {2, 1}}, ref);
    const double t = seconds_since(t0);
    return {worst < 1e-3 && std::abs(two - 3.0) <= 1e-9 && t < 60.0,
            "worst |sweep - grid| " + fmt("%.2e", worst) + ", two-point case " + fmt("%.12f", two) + ", " +
                fmt("%.2f", t) + " s"};
}

// 4 -------------------------------------------------------------------------

Outcome indicator_identities() {
    const auto front = *reference_front(find_problem("CONSTR"));
    const double self = igd(front, front);

    IndicatorConfig unit;
    unit.ideal = {0.0, 0.0};
    unit.reference = {1.0, 1.0};
    CounterRng rng(404);
    std::size_t violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        PointSet pts(1 + rng() % 10, std::vector<double>(2));
        for (auto& p : pts) for (auto& v : p) v = 1.2 * rng.uniform() - 0.1;
        const double before = hypervolume(pts, unit);
        pts.push_back({1.2 * rng.uniform() - 0.1, 1.2 * rng.uniform() - 0.1});
        if (hypervolume(pts, unit) < before) ++violations;
    }
    const auto w = wilcoxon_rank_sum(std::vector<double>{1, 2, 3}, std::vector<double>{4, 5, 6});
    return {self == 0.0 && violations == 0 && w.exact && w.p_value == 0.1,
            "IGD(R,R)=" + format_double(self) + ", monotonicity violations " + std::to_string(violations) +
                "/1000, rank-sum p=" + format_double(w.p_value)};
}

// 5 -------------------------------------------------------------------------

Outcome arithmetic_units() {
    std::vector<std::string> failed;
    auto expect = [&](bool ok, const std::string& what) { if (!ok) failed.push_back(what); };

    const double g1[] = {-1.0, 0.5};
    expect(cv_aggregate(g1, {}, 1e-4) == 0.5, "cv g=(-1,0.5)");
    const double h2[] = {0.3};
    expect(cv_aggregate({}, h2, 1e-4) == 0.3 - 1e-4, "cv h=0.3");
    const double g3[] = {-2.0, -3.0};
    const double h3[] = {0.00005};
    expect(cv_aggregate(g3, h3, 1e-4) == 0.0, "cv all satisfied");

    CounterRng rng(505);
    DdpgAgent agent(AgentConfig::for_objectives(2), rng);
    expect(agent.critic_target(1.0, 2.0, false) == 2.96, "critic target");

    const Mlp& source = agent.actor();
    const std::size_t dims[] = {6, 64, 64, 3};
    const Activation acts[] = {Activation::Tanh, Activation::Tanh, Activation::Softmax};
    Mlp copy(dims, acts, rng);
    const auto before = copy.parameters();
    Mlp unchanged = copy;
    copy.soft_update_from(source, 1.0);
    expect(copy.parameters() == source.parameters(), "soft update tau=1");
    unchanged.soft_update_from(source, 0.0);
    expect(unchanged.parameters() == before, "soft update tau=0");

    auto act = [](double a, double b, double c) { PortfolioAction p; p.p = {a, b, c}; return p; };
    using C = std::array<std::size_t, 3>;
    expect(allocate_counts(act(0.5, 0.3, 0.2), 10) == C{5, 3, 2}, "allocate (0.5,0.3,0.2)");
    expect(allocate_counts(act(1, 0, 0), 50) == C{50, 0, 0}, "allocate vertex");
    expect(allocate_counts(act(1.0 / 3, 1.0 / 3, 1.0 / 3), 100) == C{34, 33, 33}, "allocate thirds");

    std::string detail = failed.empty() ? "cv, critic target 2.96, soft-update endpoints, apportionment exact"
                                        : "mismatch:";
    for (const auto& f : failed) detail += " [" + f + "]";
    return {failed.empty(), detail};
}

// 6 -------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Outcome determinism() {
    const auto t0 = Clock::now();
    const fs::path root = fs::temp_directory_path() / "aop_acceptance_determinism";
    fs::remove_all(root);
    std::size_t identical = 0;
    std::string bad;
    for (const auto& name : problem_names()) {
        std::string files[2];
        for (int rep = 0; rep < 2; ++rep) {
            const auto dir = root / (name + "_" + std::to_string(rep));
            const std::string cmd = std::string("\"") + AOP_CLI_PATH + "\" run --problem " + name +
                                    " --variant aop --pop 100 --fe 20000 --seed 0 --out \"" + dir.string() +
                                    "\" > /dev/null";
            if (std::system(cmd.c_str()) != 0) return {false, "cli run failed for " + name};
            files[rep] = slurp(dir / (run_file_stem(name, "aop", 0) + ".csv"));
        }
        if (!files[0].empty() && files[0] == files[1]) ++identical;
        else bad += " " + name;
    }
    fs::remove_all(root);
    const double t = seconds_since(t0);
    return {identical == problem_names().size() && t < 300.0,
            std::to_string(identical) + "/" + std::to_string(problem_names().size()) +
                " problems byte-identical" + (bad.empty() ? "" : " (differs:" + bad + ")") + ", " +
                fmt("%.1f", t) + " s"};
}

// 7-9 -----------------------------------------------------------------------

struct Ablation {
    ResultMatrix matrix;
    double seconds = 0.0;
};

const Ablation& ablation() {
    static std::optional<Ablation> cache;
    if (cache) return *cache;
    const auto t0 = Clock::now();
    std::vector<RunConfig> configs;
    for (const auto& p : problem_names()) {
        for (const char* v : {"aop", "ga-only", "de-rand-only", "de-best-only"}) {
            RunConfig c;
            c.problem = p;
            c.variant = Variant::parse(v);
            c.pop = 100;
            c.fe = 20000;
            configs.push_back(c);
        }
    }
    const std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
    cache = Ablation{run_batch(configs, 10, jobs), 0.0};
    cache->seconds = seconds_since(t0);
    return *cache;
}

std::map<std::string, std::map<std::string, std::vector<double>>> final_igd_by_cell(const ResultMatrix& m) {
    std::map<std::string, std::map<std::string, std::vector<double>>> out;
    for (const auto& c : m.cells) {
        out[c.problem][c.variant].push_back(c.result ? c.result->final_igd : std::nan(""));
    }
    return out;
}

Outcome ablation_property() {
    const auto& ab = ablation();
    if (!ab.matrix.failures().empty()) return {false, "run failures: " + ab.matrix.failures().front()};
    const auto cells = final_igd_by_cell(ab.matrix);
    bool within_all = true;
    std::string ratios;
    for (const auto& p : problem_names()) {
        const double mine = median(cells.at(p).at("aop"));
        double best = std::numeric_limits<double>::infinity();
        for (const char* v : {"ga-only", "de-rand-only", "de-best-only"}) best = std::min(best, median(cells.at(p).at(v)));
        const double ratio = mine / best;
        within_all = within_all && mine <= 1.2 * best;
        ratios += " " + p + "=" + fmt("%.3f", ratio);
    }
    bool beats_all = true;
    std::string pvals;
    for (const char* v : {"ga-only", "de-rand-only", "de-best-only"}) {
        const auto r = wilcoxon_rank_sum(cells.at("SYNTH-MM").at("aop"), cells.at("SYNTH-MM").at(v));
        beats_all = beats_all && r.verdict == Verdict::Better && r.p_value < 0.05;
        pvals += std::string(" ") + v + ":" + verdict_symbol(r.verdict) + fmt("(p=%.3g)", r.p_value);
    }
    return {within_all && beats_all && ab.seconds < 1800.0,
            std::string("(a) ") + (within_all ? "ok" : "violated") + ", median ratio aop/best-single:" + ratios +
                "; (b) " + (beats_all ? "ok" : "violated") + ", SYNTH-MM aop vs" + pvals + "; " +
                fmt("%.0f", ab.seconds) + " s for " + std::to_string(ab.matrix.cells.size()) + " runs"};
}

Outcome feasibility_property() {
    const auto& ab = ablation();
    std::map<std::string, int> good;
    for (const auto& c : ab.matrix.cells) {
        if (c.variant == "aop" && c.result && c.result->final_feasible_ratio >= 0.95) ++good[c.problem];
    }
    bool ok = true;
    std::string detail = "seeds with >= 95% feasible:";
    for (const auto& p : problem_names()) {
        ok = ok && good[p] >= 8;
        detail += " " + p + "=" + std::to_string(good[p]) + "/10";
    }
    return {ok, detail};
}

Outcome budget_accounting() {
    const auto& ab = ablation();
    std::size_t ok = 0;
    for (const auto& c : ab.matrix.cells) {
        if (!c.result) continue;
        const auto& r = *c.result;
        if (r.consumed_fe <= r.fe_max && r.fe_max < r.consumed_fe + r.pop && r.trace.back().fe == r.consumed_fe) ++ok;
    }
    return {ok == ab.matrix.cells.size(),
            std::to_string(ok) + "/" + std::to_string(ab.matrix.cells.size()) + " runs satisfy consumed <= FE_max < consumed + N"};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"gradient oracle", gradient_oracle},
        {"DDPG stub convergence", ddpg_stub},
        {"hypervolume oracle", hv_oracle},
        {"indicator identities", indicator_identities},
        {"unit arithmetic", arithmetic_units},
        {"determinism", determinism},
        {"ablation property", ablation_property},
        {"feasibility property", feasibility_property},
        {"budget accounting", budget_accounting},
    };
    std::vector<std::size_t> selected;
    for (int i = 1; i < argc; ++i) {
        const int k = std::atoi(argv[i]);
        if (k < 1 || k > static_cast<int>(criteria.size())) {
            std::cerr << "usage: acceptance [criterion 1-" << criteria.size() << "]...\n";
            return 2;
        }
        selected.push_back(static_cast<std::size_t>(k - 1));
    }
    if (selected.empty()) {
        for (std::size_t k = 0; k < criteria.size(); ++k) selected.push_back(k);
    }
    int failures = 0;
    for (auto k : selected) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
                  << "): " << o.detail << std::endl;
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
