#pragma once

#include "aop/evo.hpp"
#include "aop/mlp.hpp"
#include "aop/operators.hpp"
#include "aop/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <deque>
#include <iosfwd>
#include <optional>
#include <vector>

namespace aop {

/// Population features observed by the agent: per-objective mean and
/// dispersion, mean constraint violation and consumed-budget fraction.
struct EvolutionState {
    std::vector<double> con;
    std::vector<double> div;
    double fea = 0.0;
    double lambda = 0.0;
    bool normalized = false;

    std::size_t dim() const { return con.size() + div.size() + 2; }
    Eigen::VectorXd as_vector() const;
    bool operator==(const EvolutionState&) const = default;
};

enum class DispersionFormula {
    Variance,        // sum((f - mean)^2) / N
    LiteralPrinted,  // (sum(f) - mean)^2 / N, kept for comparison
};

/// Raw (unnormalized) state of a population.
EvolutionState extract_state(std::span<const Solution> pop, std::size_t consumed,
                             std::size_t budget,
                             DispersionFormula formula = DispersionFormula::Variance);

/// Scales con, div and fea by their magnitude in the first state it sees
/// (zero baselines become 1), then clips to [-10, 10]. lambda passes through.
class StateNormalizer {
public:
    static constexpr double kClip = 10.0;

    EvolutionState operator()(const EvolutionState& raw);
    bool has_baseline() const { return baseline_.has_value(); }

private:
    std::optional<EvolutionState> baseline_;
};

inline double compute_reward(double prev_hv, double new_hv) { return new_hv - prev_hv; }

struct Transition {
    EvolutionState s;
    PortfolioAction a;
    double r = 0.0;
    EvolutionState s_next;
    bool terminal = false;
};

/// Bounded FIFO; the oldest record is evicted first.
class ReplayPool {
public:
    explicit ReplayPool(std::size_t capacity = 2048);

    void push(Transition t);
    std::size_t size() const { return records_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& operator[](std::size_t i) const { return records_[i]; }
    const std::deque<Transition>& records() const { return records_; }

private:
    std::size_t capacity_;
    std::deque<Transition> records_;
};

struct AgentConfig {
    std::size_t state_dim = 6;
    std::vector<std::size_t> actor_hidden{64, 64};
    std::vector<std::size_t> critic_hidden{64, 64};
    double gamma = 0.98;
    double tau = 0.005;
    double actor_lr = 1e-4;
    double critic_lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::size_t batch_size = 32;
    std::size_t replay_capacity = 2048;
    double sigma_start = 0.5;
    double sigma_end = 0.05;

    static AgentConfig for_objectives(std::size_t M) {
        AgentConfig c;
        c.state_dim = 2 * M + 2;
        return c;
    }
    void validate() const;
};

struct TrainDiagnostics {
    double critic_loss = 0.0;
    double mean_q = 0.0;
};

class DdpgAgent {
public:
    DdpgAgent(const AgentConfig& config, CounterRng& init_rng);

    const AgentConfig& config() const { return config_; }
    const Mlp& actor() const { return actor_; }
    const Mlp& critic() const { return critic_; }
    const Mlp& target_actor() const { return target_actor_; }
    const Mlp& target_critic() const { return target_critic_; }
    Mlp& actor() { return actor_; }
    Mlp& critic() { return critic_; }
    Mlp& target_actor() { return target_actor_; }
    Mlp& target_critic() { return target_critic_; }
    const ReplayPool& pool() const { return pool_; }

    /// Exploration noise scale at budget fraction lambda.
    double sigma(double lambda) const;

    /// Uniform Dirichlet sample while the pool is smaller than a batch;
    /// afterwards softmax of the actor logits, with Gaussian logit noise when
    /// exploring. The noise scale follows the state's lambda.
    PortfolioAction select_action(const EvolutionState& s, bool explore, CounterRng& rng) const;
    PortfolioAction select_action(const EvolutionState& s, bool explore, double sigma,
                                  CounterRng& rng) const;
    PortfolioAction deterministic_action(const EvolutionState& s) const;
    bool warming_up() const { return pool_.size() < config_.batch_size; }

    void store_transition(Transition t);

    /// One critic step, one actor step and the target blends. Returns nullopt
    /// (no training) while the pool is smaller than the batch size. Throws
    /// NumericalDivergence on a non-finite loss.
    std::optional<TrainDiagnostics> train_step(CounterRng& rng);

    double critic_target(double reward, double next_q, bool terminal) const {
        return terminal ? reward : reward + config_.gamma * next_q;
    }

    void save(std::ostream& out) const;
    /// Throws CheckpointFormatError; when `expected` is given the stored
    /// architecture must match it.
    static DdpgAgent load(std::istream& in, const AgentConfig* expected = nullptr);

private:
    DdpgAgent() = default;

    AgentConfig config_;
    Mlp actor_, critic_, target_actor_, target_critic_;
    ReplayPool pool_;
};

/// Uniform sample from the 3-simplex.
PortfolioAction dirichlet_uniform(CounterRng& rng);

}  // namespace aop
