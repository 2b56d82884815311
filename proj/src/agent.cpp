#include "aop/agent.hpp"

#include "aop/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

namespace aop {

Eigen::VectorXd EvolutionState::as_vector() const {
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim()));
    Eigen::Index k = 0;
    for (double c : con) v(k++) = c;
    for (double d : div) v(k++) = d;
    v(k++) = fea;
    v(k++) = lambda;
    return v;
}

EvolutionState extract_state(std::span<const Solution> pop, std::size_t consumed,
                             std::size_t budget, DispersionFormula formula) {
    if (pop.empty()) throw InvalidInput("extract_state: empty population");
    if (budget == 0 || consumed > budget) {
        throw InvalidInput("extract_state: consumed evaluations outside [0, budget]");
    }
    const std::size_t m = pop.front().f().size();
    const double n = static_cast<double>(pop.size());
    EvolutionState s;
    s.con.assign(m, 0.0);
    s.div.assign(m, 0.0);
    for (const auto& sol : pop) {
        for (std::size_t i = 0; i < m; ++i) s.con[i] += sol.f()[i];
        s.fea += sol.cv();
    }
    for (std::size_t i = 0; i < m; ++i) s.con[i] /= n;
    s.fea /= n;
    for (std::size_t i = 0; i < m; ++i) {
        if (formula == DispersionFormula::Variance) {
            double acc = 0.0;
            for (const auto& sol : pop) acc += (sol.f()[i] - s.con[i]) * (sol.f()[i] - s.con[i]);
            s.div[i] = acc / n;
        } else {
            const double centered = s.con[i] * n - s.con[i];
            s.div[i] = centered * centered / n;
        }
    }
    s.lambda = static_cast<double>(consumed) / static_cast<double>(budget);
    return s;
}

EvolutionState StateNormalizer::operator()(const EvolutionState& raw) {
    if (raw.normalized) return raw;
    if (!baseline_) baseline_ = raw;
    const auto& base = *baseline_;
    auto scale = [](double v, double b) {
        const double d = std::abs(b) > 0.0 ? std::abs(b) : 1.0;
        return std::clamp(v / d, -kClip, kClip);
    };
    EvolutionState s = raw;
    for (std::size_t i = 0; i < s.con.size(); ++i) s.con[i] = scale(raw.con[i], base.con[i]);
    for (std::size_t i = 0; i < s.div.size(); ++i) s.div[i] = scale(raw.div[i], base.div[i]);
    s.fea = scale(raw.fea, base.fea);
    s.normalized = true;
    return s;
}

ReplayPool::ReplayPool(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw InvalidInput("replay pool: capacity must be positive");
}

void ReplayPool::push(Transition t) {
    if (records_.size() == capacity_) records_.pop_front();
    records_.push_back(std::move(t));
}

void AgentConfig::validate() const {
    if (state_dim == 0) throw InvalidInput("agent: state dimension must be positive");
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidInput("agent: gamma must lie in [0, 1)");
    if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("agent: tau must lie in (0, 1]");
    if (batch_size == 0) throw InvalidInput("agent: batch size must be positive");
    if (replay_capacity < batch_size) throw InvalidInput("agent: replay capacity below batch size");
    if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) throw InvalidInput("agent: learning rates must be positive");
    if (!(sigma_start >= 0.0) || !(sigma_end >= 0.0)) throw InvalidInput("agent: sigma must be nonnegative");
    for (auto w : actor_hidden) if (w == 0) throw InvalidInput("agent: zero-width actor layer");
    for (auto w : critic_hidden) if (w == 0) throw InvalidInput("agent: zero-width critic layer");
}

namespace {

struct Architecture {
    std::vector<std::size_t> dims;
    std::vector<Activation> acts;
};

Architecture actor_architecture(const AgentConfig& c) {
    Architecture a;
    a.dims.push_back(c.state_dim);
    for (auto w : c.actor_hidden) {
        a.dims.push_back(w);
        a.acts.push_back(Activation::Tanh);
    }
    a.dims.push_back(kOperatorCount);
    a.acts.push_back(Activation::Softmax);
    return a;
}

Architecture critic_architecture(const AgentConfig& c) {
    Architecture a;
    a.dims.push_back(c.state_dim + kOperatorCount);
    for (auto w : c.critic_hidden) {
        a.dims.push_back(w);
        a.acts.push_back(Activation::Tanh);
    }
    a.dims.push_back(1);
    a.acts.push_back(Activation::Identity);
    return a;
}

Eigen::VectorXd action_vector(const PortfolioAction& a) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(kOperatorCount));
    for (std::size_t k = 0; k < kOperatorCount; ++k) v(static_cast<Eigen::Index>(k)) = a.p[k];
    return v;
}

Eigen::VectorXd concat(const Eigen::VectorXd& s, const Eigen::VectorXd& a) {
    Eigen::VectorXd v(s.size() + a.size());
    v << s, a;
    return v;
}

PortfolioAction to_action(const Eigen::VectorXd& p) {
    PortfolioAction a;
    for (std::size_t k = 0; k < kOperatorCount; ++k) a.p[k] = p(static_cast<Eigen::Index>(k));
    return a;
}

}  // namespace

PortfolioAction dirichlet_uniform(CounterRng& rng) {
    // Normalized unit exponentials.
    std::array<double, kOperatorCount> e{};
    double sum = 0.0;
    for (auto& v : e) {
        v = -std::log1p(-rng.uniform());
        sum += v;
    }
    PortfolioAction a;
    if (!(sum > 0.0)) return a;
    for (std::size_t k = 0; k < kOperatorCount; ++k) a.p[k] = e[k] / sum;
    return a;
}

DdpgAgent::DdpgAgent(const AgentConfig& config, CounterRng& init_rng)
    : config_(config), pool_(config.replay_capacity) {
    config_.validate();
    const auto aa = actor_architecture(config_);
    const auto ca = critic_architecture(config_);
    actor_ = Mlp(aa.dims, aa.acts, init_rng);
    critic_ = Mlp(ca.dims, ca.acts, init_rng);
    target_actor_ = actor_;
    target_critic_ = critic_;
}

double DdpgAgent::sigma(double lambda) const {
    const double t = std::clamp(lambda, 0.0, 1.0);
    return config_.sigma_start + (config_.sigma_end - config_.sigma_start) * t;
}

PortfolioAction DdpgAgent::deterministic_action(const EvolutionState& s) const {
    return to_action(actor_.forward(s.as_vector()));
}

PortfolioAction DdpgAgent::select_action(const EvolutionState& s, bool explore,
                                         CounterRng& rng) const {
    return select_action(s, explore, sigma(s.lambda), rng);
}

PortfolioAction DdpgAgent::select_action(const EvolutionState& s, bool explore, double sigma,
                                         CounterRng& rng) const {
    if (explore && warming_up()) return dirichlet_uniform(rng);
    MlpCache cache;
    const Eigen::VectorXd p = actor_.forward(s.as_vector(), &cache);
    if (!explore || sigma == 0.0) return to_action(p);
    Eigen::VectorXd logits = cache.pre.back();
    std::normal_distribution<double> noise(0.0, sigma);
    for (Eigen::Index k = 0; k < logits.size(); ++k) logits(k) += noise(rng);
    return to_action(softmax(logits));
}

void DdpgAgent::store_transition(Transition t) {
    if (t.s.dim() != config_.state_dim || t.s_next.dim() != config_.state_dim) {
        throw InvalidInput("store_transition: state dimension " + std::to_string(t.s.dim()) +
                           ", agent expects " + std::to_string(config_.state_dim));
    }
    pool_.push(std::move(t));
}

std::optional<TrainDiagnostics> DdpgAgent::train_step(CounterRng& rng) {
    const std::size_t bs = config_.batch_size;
    if (pool_.size() < bs) return std::nullopt;

    // Mini-batch without replacement.
    std::vector<std::size_t> idx(pool_.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < bs; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    idx.resize(bs);

    const double inv_bs = 1.0 / static_cast<double>(bs);
    std::vector<Eigen::VectorXd> states(bs);
    std::vector<double> targets(bs);
    for (std::size_t b = 0; b < bs; ++b) {
        const auto& t = pool_[idx[b]];
        states[b] = t.s.as_vector();
        double next_q = 0.0;
        if (!t.terminal) {
            const Eigen::VectorXd sn = t.s_next.as_vector();
            const Eigen::VectorXd an = target_actor_.forward(sn);
            next_q = target_critic_.forward(concat(sn, an))(0);
        }
        targets[b] = critic_target(t.r, next_q, t.terminal);
    }

    // Critic: mean squared error against the fixed targets.
    TrainDiagnostics diag;
    MlpGradients critic_grads = critic_.zero_gradients();
    MlpCache cache;
    Eigen::VectorXd g(1);
    for (std::size_t b = 0; b < bs; ++b) {
        const auto& t = pool_[idx[b]];
        const double q = critic_.forward(concat(states[b], action_vector(t.a)), &cache)(0);
        const double err = q - targets[b];
        diag.critic_loss += err * err * inv_bs;
        diag.mean_q += q * inv_bs;
        g(0) = 2.0 * err * inv_bs;
        critic_.backward(cache, g, critic_grads);
    }
    if (!std::isfinite(diag.critic_loss) || !std::isfinite(diag.mean_q)) {
        std::ostringstream os;
        os << "critic loss diverged: loss=" << diag.critic_loss << " mean_q=" << diag.mean_q
           << " pool=" << pool_.size() << " critic_step=" << critic_.moments().step;
        throw NumericalDivergence(os.str());
    }
    critic_.adam_step(critic_grads, {config_.critic_lr, config_.beta1, config_.beta2, config_.epsilon});

    // Actor: ascend Q(s, mu(s)) by pushing dQ/da back through the actor.
    MlpGradients actor_grads = actor_.zero_gradients();
    MlpGradients scratch = critic_.zero_gradients();
    MlpCache actor_cache;
    g(0) = 1.0;
    const auto s_dim = static_cast<Eigen::Index>(config_.state_dim);
    for (std::size_t b = 0; b < bs; ++b) {
        const Eigen::VectorXd a = actor_.forward(states[b], &actor_cache);
        critic_.forward(concat(states[b], a), &cache);
        const Eigen::VectorXd dq_dinput = critic_.backward(cache, g, scratch);
        const Eigen::VectorXd dq_da = dq_dinput.tail(dq_dinput.size() - s_dim);
        actor_.backward(actor_cache, -inv_bs * dq_da, actor_grads);
    }
    actor_.adam_step(actor_grads, {config_.actor_lr, config_.beta1, config_.beta2, config_.epsilon});

    target_critic_.soft_update_from(critic_, config_.tau);
    target_actor_.soft_update_from(actor_, config_.tau);
    return diag;
}

// ---------------------------------------------------------------------------
// Checkpoints: magic, shape table, then little-endian 64-bit fields.

namespace {

constexpr char kMagic[8] = {'A', 'O', 'P', 'C', 'K', 'P', 'T', '1'};

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    void u64(std::uint64_t v) {
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
        out_.write(reinterpret_cast<const char*>(b), 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void block(const double* p, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) f64(p[i]);
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    std::uint64_t u64() {
        unsigned char b[8];
        if (!in_.read(reinterpret_cast<char*>(b), 8)) {
            throw CheckpointFormatError("checkpoint truncated");
        }
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::size_t count(std::uint64_t limit, const char* what) {
        const auto v = u64();
        if (v > limit) throw CheckpointFormatError(std::string("checkpoint: implausible ") + what);
        return static_cast<std::size_t>(v);
    }
    void block(double* p, Eigen::Index n) {
        for (Eigen::Index i = 0; i < n; ++i) p[i] = f64();
    }

private:
    std::istream& in_;
};

constexpr std::uint64_t kMaxDim = 1u << 20;

void write_shape(Writer& w, const Mlp& net) {
    w.u64(net.layer_count());
    for (const auto& layer : net.layers()) {
        w.u64(layer.in());
        w.u64(layer.out());
        w.u64(static_cast<std::uint64_t>(layer.activation));
    }
}

Mlp read_shape(Reader& r) {
    const auto layers = r.count(64, "layer count");
    if (layers == 0) throw CheckpointFormatError("checkpoint: network without layers");
    std::vector<std::size_t> dims;
    std::vector<Activation> acts;
    for (std::size_t l = 0; l < layers; ++l) {
        const auto in = r.count(kMaxDim, "layer width");
        const auto out = r.count(kMaxDim, "layer width");
        const auto act = r.u64();
        if (act > 2) throw CheckpointFormatError("checkpoint: unknown activation code");
        if (l == 0) dims.push_back(in);
        else if (dims.back() != in) throw CheckpointFormatError("checkpoint: layer shapes do not chain");
        dims.push_back(out);
        acts.push_back(static_cast<Activation>(act));
    }
    try {
        return Mlp::zeros(dims, acts);
    } catch (const InvalidInput& e) {
        throw CheckpointFormatError(std::string("checkpoint: ") + e.what());
    }
}

void write_params(Writer& w, const Mlp& net) {
    const auto& m = net.moments();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const auto& layer = net.layers()[l];
        w.block(layer.W.data(), layer.W.size());
        w.block(layer.b.data(), layer.b.size());
        w.block(m.mW[l].data(), m.mW[l].size());
        w.block(m.vW[l].data(), m.vW[l].size());
        w.block(m.mb[l].data(), m.mb[l].size());
        w.block(m.vb[l].data(), m.vb[l].size());
    }
    w.u64(m.step);
}

void read_params(Reader& r, Mlp& net) {
    auto& m = net.moments();
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        auto& layer = net.layers()[l];
        r.block(layer.W.data(), layer.W.size());
        r.block(layer.b.data(), layer.b.size());
        r.block(m.mW[l].data(), m.mW[l].size());
        r.block(m.vW[l].data(), m.vW[l].size());
        r.block(m.mb[l].data(), m.mb[l].size());
        r.block(m.vb[l].data(), m.vb[l].size());
    }
    m.step = r.u64();
}

void write_state(Writer& w, const EvolutionState& s) {
    for (double v : s.con) w.f64(v);
    for (double v : s.div) w.f64(v);
    w.f64(s.fea);
    w.f64(s.lambda);
    w.u64(s.normalized ? 1 : 0);
}

EvolutionState read_state(Reader& r, std::size_t m) {
    EvolutionState s;
    s.con.resize(m);
    s.div.resize(m);
    for (auto& v : s.con) v = r.f64();
    for (auto& v : s.div) v = r.f64();
    s.fea = r.f64();
    s.lambda = r.f64();
    s.normalized = r.u64() != 0;
    return s;
}

std::string shape_string(const Mlp& net) {
    std::ostringstream os;
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        os << (l ? "-" : "") << net.layers()[l].in();
    }
    os << "-" << net.output_dim();
    return os.str();
}

}  // namespace

void DdpgAgent::save(std::ostream& out) const {
    out.write(kMagic, sizeof kMagic);
    Writer w(out);
    w.u64(4);
    for (const Mlp* net : {&actor_, &critic_, &target_actor_, &target_critic_}) write_shape(w, *net);
    w.u64(config_.state_dim);
    w.u64(config_.batch_size);
    w.u64(config_.replay_capacity);
    for (double v : {config_.gamma, config_.tau, config_.actor_lr, config_.critic_lr, config_.beta1,
                     config_.beta2, config_.epsilon, config_.sigma_start, config_.sigma_end}) {
        w.f64(v);
    }
    for (const Mlp* net : {&actor_, &critic_, &target_actor_, &target_critic_}) write_params(w, *net);
    w.u64(pool_.size());
    for (const auto& t : pool_.records()) {
        write_state(w, t.s);
        for (double v : t.a.p) w.f64(v);
        w.f64(t.r);
        write_state(w, t.s_next);
        w.u64(t.terminal ? 1 : 0);
    }
    if (!out) throw IoError("checkpoint: write failed");
}

DdpgAgent DdpgAgent::load(std::istream& in, const AgentConfig* expected) {
    char magic[8];
    if (!in.read(magic, sizeof magic)) throw CheckpointFormatError("checkpoint truncated");
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        if (std::memcmp(magic, kMagic, 7) == 0) {
            throw CheckpointFormatError("checkpoint: unsupported format version");
        }
        throw CheckpointFormatError("checkpoint: bad magic bytes");
    }
    Reader r(in);
    if (r.u64() != 4) throw CheckpointFormatError("checkpoint: expected four networks");
    DdpgAgent agent;
    agent.actor_ = read_shape(r);
    agent.critic_ = read_shape(r);
    agent.target_actor_ = read_shape(r);
    agent.target_critic_ = read_shape(r);
    auto& c = agent.config_;
    c.state_dim = r.count(kMaxDim, "state dimension");
    c.batch_size = r.count(kMaxDim, "batch size");
    c.replay_capacity = r.count(std::uint64_t{1} << 32, "replay capacity");
    for (double* v : {&c.gamma, &c.tau, &c.actor_lr, &c.critic_lr, &c.beta1, &c.beta2, &c.epsilon,
                      &c.sigma_start, &c.sigma_end}) {
        *v = r.f64();
    }
    c.actor_hidden.clear();
    for (std::size_t l = 0; l + 1 < agent.actor_.layer_count(); ++l) c.actor_hidden.push_back(agent.actor_.layers()[l].out());
    c.critic_hidden.clear();
    for (std::size_t l = 0; l + 1 < agent.critic_.layer_count(); ++l) c.critic_hidden.push_back(agent.critic_.layers()[l].out());

    // Shape consistency with the stored config and with the caller's expectation.
    auto check = [](const Mlp& got, const Architecture& want, const char* which) {
        const Mlp ref = Mlp::zeros(want.dims, want.acts);
        if (!got.same_shape(ref)) {
            throw CheckpointFormatError(std::string("checkpoint: shape mismatch in ") + which +
                                        ": stored " + shape_string(got) + ", expected " +
                                        shape_string(ref));
        }
    };
    try {
        c.validate();
    } catch (const InvalidInput& e) {
        throw CheckpointFormatError(std::string("checkpoint: invalid hyperparameters: ") + e.what());
    }
    const AgentConfig& want = expected ? *expected : c;
    check(agent.actor_, actor_architecture(want), "actor");
    check(agent.critic_, critic_architecture(want), "critic");
    check(agent.target_actor_, actor_architecture(want), "target actor");
    check(agent.target_critic_, critic_architecture(want), "target critic");

    for (Mlp* net : {&agent.actor_, &agent.critic_, &agent.target_actor_, &agent.target_critic_}) {
        read_params(r, *net);
    }
    if (c.state_dim < 2 || c.state_dim % 2 != 0) {
        throw CheckpointFormatError("checkpoint: state dimension must be 2M+2");
    }
    const std::size_t m = (c.state_dim - 2) / 2;
    agent.pool_ = ReplayPool(c.replay_capacity);
    const auto n = r.count(c.replay_capacity, "pool size");
    for (std::size_t i = 0; i < n; ++i) {
        Transition t;
        t.s = read_state(r, m);
        for (double& v : t.a.p) v = r.f64();
        t.r = r.f64();
        t.s_next = read_state(r, m);
        t.terminal = r.u64() != 0;
        agent.pool_.push(std::move(t));
    }
    return agent;
}

}  // namespace aop
