#pragma once

#include "aop/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace aop {

enum class Activation : std::uint64_t { Identity = 0, Tanh = 1, Softmax = 2 };

struct DenseLayer {
    Eigen::MatrixXd W;  // out x in
    Eigen::VectorXd b;
    Activation activation = Activation::Identity;

    std::size_t in() const { return static_cast<std::size_t>(W.cols()); }
    std::size_t out() const { return static_cast<std::size_t>(W.rows()); }
};

/// Per-layer parameter gradients, shaped like the network.
struct MlpGradients {
    std::vector<Eigen::MatrixXd> dW;
    std::vector<Eigen::VectorXd> db;

    void set_zero();
    /// Flattened in layer order, W (column-major) before b.
    std::vector<double> flat() const;
};

/// Values retained by forward() for an exact backward pass.
struct MlpCache {
    std::vector<Eigen::VectorXd> inputs;  // input of each layer
    std::vector<Eigen::VectorXd> pre;     // affine output of each layer
    std::vector<Eigen::VectorXd> post;    // activation output of each layer
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Dense feed-forward network with its own adaptive-moment optimizer state.
class Mlp {
public:
    Mlp() = default;

    /// dims = {input, hidden..., output}; one activation per layer. Weights and
    /// biases are drawn uniformly from +-1/sqrt(fan_in).
    Mlp(std::span<const std::size_t> dims, std::span<const Activation> activations,
        CounterRng& rng);

    /// Same shapes with every parameter zero.
    static Mlp zeros(std::span<const std::size_t> dims, std::span<const Activation> activations);

    std::size_t input_dim() const { return layers_.empty() ? 0 : layers_.front().in(); }
    std::size_t output_dim() const { return layers_.empty() ? 0 : layers_.back().out(); }
    std::size_t layer_count() const { return layers_.size(); }
    const std::vector<DenseLayer>& layers() const { return layers_; }
    std::vector<DenseLayer>& layers() { return layers_; }

    /// Throws InvalidInput on dimension mismatch.
    Eigen::VectorXd forward(const Eigen::VectorXd& input, MlpCache* cache = nullptr) const;

    /// Gradient of dot(output, output_grad). Parameter gradients are added to
    /// `accum`; the gradient with respect to the input is returned.
    Eigen::VectorXd backward(const MlpCache& cache, const Eigen::VectorXd& output_grad,
                             MlpGradients& accum) const;

    struct Backward {
        MlpGradients params;
        Eigen::VectorXd input;
    };
    Backward backward(const MlpCache& cache, const Eigen::VectorXd& output_grad) const;

    MlpGradients zero_gradients() const;

    /// One descent step along the gradients.
    void adam_step(const MlpGradients& grads, const AdamConfig& config);

    /// this <- tau * source + (1 - tau) * this, parameters only.
    void soft_update_from(const Mlp& source, double tau);

    /// True when layer dims and activations match.
    bool same_shape(const Mlp& other) const;

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> values);

    // Optimizer state, exposed for checkpointing.
    struct Moments {
        std::vector<Eigen::MatrixXd> mW, vW;
        std::vector<Eigen::VectorXd> mb, vb;
        std::uint64_t step = 0;
    };
    const Moments& moments() const { return moments_; }
    Moments& moments() { return moments_; }

private:
    void reset_moments();

    std::vector<DenseLayer> layers_;
    Moments moments_;
};

/// Numerically stable softmax.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

}  // namespace aop
