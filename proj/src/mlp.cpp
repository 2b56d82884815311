#include "aop/mlp.hpp"

#include "aop/errors.hpp"

#include <cmath>
#include <string>

namespace aop {

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
    Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp();
    return e / e.sum();
}

namespace {

Eigen::VectorXd activate(Activation a, const Eigen::VectorXd& z) {
    switch (a) {
        case Activation::Identity: return z;
        case Activation::Tanh: return z.array().tanh();
        case Activation::Softmax: return softmax(z);
    }
    return z;
}

// Gradient with respect to the pre-activation, given the one for the output.
Eigen::VectorXd activation_backward(Activation a, const Eigen::VectorXd& y,
                                    const Eigen::VectorXd& g) {
    switch (a) {
        case Activation::Identity: return g;
        case Activation::Tanh: return (g.array() * (1.0 - y.array().square())).matrix();
        case Activation::Softmax: return (y.array() * (g.array() - y.dot(g))).matrix();
    }
    return g;
}

void check_shapes(std::span<const std::size_t> dims, std::span<const Activation> activations) {
    if (dims.size() < 2) throw InvalidInput("mlp: need at least input and output dims");
    if (activations.size() != dims.size() - 1) {
        throw InvalidInput("mlp: need one activation per layer");
    }
    for (auto d : dims) {
        if (d == 0) throw InvalidInput("mlp: zero-width layer");
    }
}

}  // namespace

void MlpGradients::set_zero() {
    for (auto& w : dW) w.setZero();
    for (auto& b : db) b.setZero();
}

std::vector<double> MlpGradients::flat() const {
    std::vector<double> out;
    for (std::size_t l = 0; l < dW.size(); ++l) {
        out.insert(out.end(), dW[l].data(), dW[l].data() + dW[l].size());
        out.insert(out.end(), db[l].data(), db[l].data() + db[l].size());
    }
    return out;
}

Mlp::Mlp(std::span<const std::size_t> dims, std::span<const Activation> activations,
         CounterRng& rng) {
    *this = zeros(dims, activations);
    for (auto& layer : layers_) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in()));
        auto draw = [&] { return bound * (2.0 * rng.uniform() - 1.0); };
        for (Eigen::Index j = 0; j < layer.W.cols(); ++j) {
            for (Eigen::Index i = 0; i < layer.W.rows(); ++i) layer.W(i, j) = draw();
        }
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b(i) = draw();
    }
}

Mlp Mlp::zeros(std::span<const std::size_t> dims, std::span<const Activation> activations) {
    check_shapes(dims, activations);
    Mlp net;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        DenseLayer layer;
        layer.W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(dims[l + 1]),
                                        static_cast<Eigen::Index>(dims[l]));
        layer.b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dims[l + 1]));
        layer.activation = activations[l];
        net.layers_.push_back(std::move(layer));
    }
    net.reset_moments();
    return net;
}

void Mlp::reset_moments() {
    moments_ = Moments{};
    for (const auto& layer : layers_) {
        moments_.mW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
        moments_.vW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
        moments_.mb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
        moments_.vb.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    }
}

Eigen::VectorXd Mlp::forward(const Eigen::VectorXd& input, MlpCache* cache) const {
    if (static_cast<std::size_t>(input.size()) != input_dim()) {
        throw InvalidInput("mlp: input has dimension " + std::to_string(input.size()) +
                           ", network expects " + std::to_string(input_dim()));
    }
    if (cache) {
        cache->inputs.clear();
        cache->pre.clear();
        cache->post.clear();
    }
    Eigen::VectorXd h = input;
    for (const auto& layer : layers_) {
        Eigen::VectorXd z = layer.W * h + layer.b;
        Eigen::VectorXd y = activate(layer.activation, z);
        if (cache) {
            cache->inputs.push_back(std::move(h));
            cache->pre.push_back(std::move(z));
            cache->post.push_back(y);
        }
        h = std::move(y);
    }
    return h;
}

MlpGradients Mlp::zero_gradients() const {
    MlpGradients g;
    for (const auto& layer : layers_) {
        g.dW.push_back(Eigen::MatrixXd::Zero(layer.W.rows(), layer.W.cols()));
        g.db.push_back(Eigen::VectorXd::Zero(layer.b.size()));
    }
    return g;
}

Eigen::VectorXd Mlp::backward(const MlpCache& cache, const Eigen::VectorXd& output_grad,
                              MlpGradients& accum) const {
    if (cache.pre.size() != layers_.size()) throw InvalidInput("mlp: cache from another network");
    Eigen::VectorXd g = output_grad;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        const auto& layer = layers_[l];
        const Eigen::VectorXd dz = activation_backward(layer.activation, cache.post[l], g);
        accum.dW[l].noalias() += dz * cache.inputs[l].transpose();
        accum.db[l] += dz;
        g = layer.W.transpose() * dz;
    }
    return g;
}

Mlp::Backward Mlp::backward(const MlpCache& cache, const Eigen::VectorXd& output_grad) const {
    Backward out{zero_gradients(), {}};
    out.input = backward(cache, output_grad, out.params);
    return out;
}

void Mlp::adam_step(const MlpGradients& grads, const AdamConfig& config) {
    ++moments_.step;
    const double t = static_cast<double>(moments_.step);
    const double c1 = 1.0 - std::pow(config.beta1, t);
    const double c2 = 1.0 - std::pow(config.beta2, t);
    auto update = [&](auto& param, auto& m, auto& v, const auto& g) {
        m = config.beta1 * m + (1.0 - config.beta1) * g;
        v = config.beta2 * v + (1.0 - config.beta2) * g.cwiseProduct(g);
        param.array() -= config.learning_rate * (m.array() / c1) /
                         ((v.array() / c2).sqrt() + config.epsilon);
    };
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        update(layers_[l].W, moments_.mW[l], moments_.vW[l], grads.dW[l]);
        update(layers_[l].b, moments_.mb[l], moments_.vb[l], grads.db[l]);
    }
}

void Mlp::soft_update_from(const Mlp& source, double tau) {
    if (!same_shape(source)) throw InvalidInput("mlp: soft update between different shapes");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        layers_[l].W = tau * source.layers_[l].W + (1.0 - tau) * layers_[l].W;
        layers_[l].b = tau * source.layers_[l].b + (1.0 - tau) * layers_[l].b;
    }
}

bool Mlp::same_shape(const Mlp& other) const {
    if (layers_.size() != other.layers_.size()) return false;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        const auto& a = layers_[l];
        const auto& b = other.layers_[l];
        if (a.in() != b.in() || a.out() != b.out() || a.activation != b.activation) return false;
    }
    return true;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers_) n += static_cast<std::size_t>(layer.W.size() + layer.b.size());
    return n;
}

std::vector<double> Mlp::parameters() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (const auto& layer : layers_) {
        out.insert(out.end(), layer.W.data(), layer.W.data() + layer.W.size());
        out.insert(out.end(), layer.b.data(), layer.b.data() + layer.b.size());
    }
    return out;
}

void Mlp::set_parameters(std::span<const double> values) {
    if (values.size() != parameter_count()) throw InvalidInput("mlp: wrong parameter count");
    std::size_t k = 0;
    for (auto& layer : layers_) {
        for (Eigen::Index i = 0; i < layer.W.size(); ++i) layer.W.data()[i] = values[k++];
        for (Eigen::Index i = 0; i < layer.b.size(); ++i) layer.b.data()[i] = values[k++];
    }
}

}  // namespace aop
