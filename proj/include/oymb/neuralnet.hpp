#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "oymb/rng.hpp"

namespace oymb {

inline constexpr int kHidden1 = 64;
inline constexpr int kHidden2 = 32;

// Weights of the input -> 64 -> 32 -> |A| Q-network. ReLU on both hidden
// layers, linear output. Shapes are fixed at construction.
struct MLPParameters {
    Eigen::MatrixXd w1;  // 64 x d_in
    Eigen::VectorXd b1;
    Eigen::MatrixXd w2;  // 32 x 64
    Eigen::VectorXd b2;
    Eigen::MatrixXd w3;  // |A| x 32
    Eigen::VectorXd b3;

    static MLPParameters zeros(int input_dim, int action_count);
    // Uniform in +-sqrt(6 / (fan_in + fan_out)), zero biases.
    static MLPParameters glorot(int input_dim, int action_count, Rng& rng);

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int action_count() const { return static_cast<int>(w3.rows()); }
    std::size_t parameter_count() const;

    bool all_finite() const;
    bool same_shape(const MLPParameters& other) const;

    // Flattened view in w1, b1, w2, b2, w3, b3 order (column-major within
    // each matrix). Used by tests and the python bindings.
    std::vector<double> flatten() const;
    void assign_flat(std::span<const double> values);

    // Apply f(Eigen::Ref<Eigen::MatrixXd>-like lvalue) to each tensor in order.
    template <class F>
    void for_each_tensor(F&& f) {
        f(w1); f(b1); f(w2); f(b2); f(w3); f(b3);
    }

    friend bool operator==(const MLPParameters& a, const MLPParameters& b);
};

// Gradients share the parameter layout.
using MLPGradient = MLPParameters;
using QValues = Eigen::VectorXd;

QValues forward(const MLPParameters& params, std::span<const double> input);

// Column j of the result holds the Q-values of column j of `inputs`.
Eigen::MatrixXd forward_batch(const MLPParameters& params, const Eigen::MatrixXd& inputs);

// Gradient of 0.5 * (td_target - Q(input, action))^2 with respect to params.
MLPGradient backward(const MLPParameters& params, std::span<const double> input, int action,
                     double td_target);

struct BatchGradient {
    MLPGradient gradient;       // mean over the batch
    double mean_squared_error;  // mean of (y - Q)^2
};

BatchGradient batch_backward(const MLPParameters& params, const Eigen::MatrixXd& inputs,
                             std::span<const int> actions, std::span<const double> targets);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    MLPParameters m;
    MLPParameters v;
    std::int64_t t = 0;
    AdamConfig config;

    static AdamState for_params(const MLPParameters& params, AdamConfig config = {});
};

void adam_step(MLPParameters& params, const MLPGradient& grads, AdamState& state);

// Deep copy; the target network is refreshed with this.
inline MLPParameters copy_params(const MLPParameters& src) { return src; }

}  // namespace oymb
