#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "oymb/neuralnet.hpp"
#include "test_oracles.hpp"

using namespace oymb;

namespace {

std::vector<double> random_input(int dim, Rng& rng) {
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (double& v : x) v = uniform_real(rng, -1.5, 1.5);
    return x;
}

}  // namespace

TEST(forward, zero_network_gives_zero_q_values) {
    const auto p = MLPParameters::zeros(4, 3);
    const QValues q = forward(p, std::vector<double>{0.3, -2.0, 5.0, 1.0});
    ASSERT_EQ(q.size(), 3);
    for (int a = 0; a < 3; ++a) EXPECT_EQ(q(a), 0.0);
}

TEST(forward, chain_of_ones_passes_unit_input) {
    auto p = MLPParameters::zeros(3, 2);
    p.w1(0, 0) = 1.0;
    p.w2(0, 0) = 1.0;
    p.w3(1, 0) = 1.0;
    const QValues q = forward(p, std::vector<double>{1.0, 0.0, 0.0});
    EXPECT_EQ(q(0), 0.0);
    EXPECT_EQ(q(1), 1.0);
}

TEST(forward, matches_straight_line_oracle) {
    Rng rng = make_stream(11, 0);
    for (int trial = 0; trial < 50; ++trial) {
        auto p = MLPParameters::glorot(5, 3, rng);
        p.b1.setRandom();
        p.b2.setRandom();
        p.b3.setRandom();
        const auto x = random_input(5, rng);
        const QValues q = forward(p, x);
        const auto expected = oracle::forward(p.flatten(), 5, 3, x);
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(q(a), expected[a], 1e-12);
    }
}

TEST(forward, is_deterministic_bitwise) {
    Rng rng = make_stream(3, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    const auto x = random_input(4, rng);
    const QValues a = forward(p, x);
    const QValues b = forward(p, x);
    for (int i = 0; i < 3; ++i) EXPECT_EQ(a(i), b(i));
}

TEST(forward, rejects_wrong_input_length) {
    const auto p = MLPParameters::zeros(4, 3);
    EXPECT_THROW(forward(p, std::vector<double>{1.0, 2.0}), std::invalid_argument);
}

TEST(forward_batch, columns_match_single_forward) {
    Rng rng = make_stream(5, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    Eigen::MatrixXd inputs(4, 7);
    inputs.setRandom();
    const Eigen::MatrixXd q = forward_batch(p, inputs);
    for (int j = 0; j < 7; ++j) {
        const QValues single =
            forward(p, std::span<const double>(inputs.col(j).data(), 4));
        for (int a = 0; a < 3; ++a) EXPECT_NEAR(q(a, j), single(a), 1e-12);
    }
}

TEST(backward, zero_residual_gives_zero_gradient) {
    Rng rng = make_stream(7, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    const auto x = random_input(4, rng);
    const double q = forward(p, x)(1);
    const MLPGradient g = backward(p, x, 1, q);
    for (double v : g.flatten()) EXPECT_EQ(v, 0.0);
}

TEST(backward, zero_input_has_zero_first_layer_weight_gradient) {
    Rng rng = make_stream(8, 0);
    auto p = MLPParameters::glorot(4, 3, rng);
    p.b1.setConstant(0.1);
    p.b2.setConstant(0.1);
    const std::vector<double> x(4, 0.0);
    const MLPGradient g = backward(p, x, 0, 5.0);
    EXPECT_EQ(g.w1.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GT(g.b1.cwiseAbs().maxCoeff(), 0.0);
}

TEST(backward, only_taken_action_row_of_output_layer_moves) {
    Rng rng = make_stream(9, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    const MLPGradient g = backward(p, random_input(4, rng), 2, 1.0);
    EXPECT_EQ(g.w3.row(0).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.w3.row(1).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(g.b3(0), 0.0);
    EXPECT_EQ(g.b3(1), 0.0);
}

TEST(backward, matches_central_finite_differences) {
    Rng rng = make_stream(10, 0);
    for (int trial = 0; trial < 10; ++trial) {
        auto p = MLPParameters::glorot(4, 3, rng);
        p.b1.setRandom();
        p.b2.setRandom();
        const auto x = random_input(4, rng);
        const int action = static_cast<int>(uniform_index(rng, 3));
        const double target = uniform_real(rng, -2.0, 2.0);
        const auto analytic = backward(p, x, action, target).flatten();
        const auto numeric = oracle::finite_difference_gradient(p.flatten(), 4, 3, x, action, target);
        for (std::size_t i = 0; i < analytic.size(); ++i) {
            EXPECT_TRUE(oracle::gradient_close(analytic[i], numeric[i]))
                << "coordinate " << i << ": " << analytic[i] << " vs " << numeric[i];
        }
    }
}

TEST(backward, rejects_bad_action) {
    const auto p = MLPParameters::zeros(2, 3);
    EXPECT_THROW(backward(p, std::vector<double>{0.0, 0.0}, 3, 0.0), std::invalid_argument);
}

TEST(batch_backward, equals_mean_of_per_sample_gradients) {
    Rng rng = make_stream(12, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    const int batch = 9;
    Eigen::MatrixXd inputs(4, batch);
    std::vector<int> actions;
    std::vector<double> targets;
    for (int j = 0; j < batch; ++j) {
        const auto x = random_input(4, rng);
        for (int i = 0; i < 4; ++i) inputs(i, j) = x[static_cast<std::size_t>(i)];
        actions.push_back(static_cast<int>(uniform_index(rng, 3)));
        targets.push_back(uniform_real(rng, -1.0, 1.0));
    }
    const BatchGradient bg = batch_backward(p, inputs, actions, targets);

    std::vector<double> mean(p.parameter_count(), 0.0);
    double mse = 0.0;
    for (int j = 0; j < batch; ++j) {
        const std::span<const double> x(inputs.col(j).data(), 4);
        const auto g = backward(p, x, actions[j], targets[j]).flatten();
        for (std::size_t i = 0; i < g.size(); ++i) mean[i] += g[i] / batch;
        const double r = forward(p, x)(actions[j]) - targets[j];
        mse += r * r / batch;
    }
    const auto got = bg.gradient.flatten();
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], mean[i], 1e-12);
    EXPECT_NEAR(bg.mean_squared_error, mse, 1e-12);
}

TEST(adam_step, zero_gradient_leaves_parameters_and_counts_step) {
    Rng rng = make_stream(13, 0);
    auto p = MLPParameters::glorot(4, 3, rng);
    const auto before = p;
    AdamState s = AdamState::for_params(p);
    adam_step(p, MLPParameters::zeros(4, 3), s);
    EXPECT_EQ(s.t, 1);
    EXPECT_TRUE(p == before);
}

TEST(adam_step, first_unit_gradient_step_is_lr_over_one_plus_eps) {
    auto p = MLPParameters::zeros(2, 2);
    AdamState s = AdamState::for_params(p);
    auto g = MLPParameters::zeros(2, 2);
    std::vector<double> ones(g.parameter_count(), 1.0);
    g.assign_flat(ones);
    adam_step(p, g, s);
    const double expected = -1e-3 / (1.0 + 1e-8);
    for (double v : p.flatten()) EXPECT_NEAR(v, expected, 1e-18);
}

TEST(adam_step, two_constant_steps_match_hand_unrolled_trace) {
    const double g = 0.5, lr = 1e-3, b1 = 0.9, b2 = 0.999, eps = 1e-8;
    // step 1
    double m = (1 - b1) * g, v = (1 - b2) * g * g;
    double theta = 0.25 - lr * (m / (1 - b1)) / (std::sqrt(v / (1 - b2)) + eps);
    // step 2
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    theta -= lr * (m / (1 - b1 * b1)) / (std::sqrt(v / (1 - b2 * b2)) + eps);

    auto p = MLPParameters::zeros(1, 2);
    std::vector<double> init(p.parameter_count(), 0.25);
    p.assign_flat(init);
    auto grads = MLPParameters::zeros(1, 2);
    grads.assign_flat(std::vector<double>(p.parameter_count(), g));
    AdamState s = AdamState::for_params(p);
    adam_step(p, grads, s);
    adam_step(p, grads, s);
    EXPECT_EQ(s.t, 2);
    for (double x : p.flatten()) EXPECT_NEAR(x, theta, 1e-12);
    for (double x : s.v.flatten()) EXPECT_GE(x, 0.0);
}

TEST(adam_step, zero_learning_rate_never_moves_parameters) {
    Rng rng = make_stream(14, 0);
    auto p = MLPParameters::glorot(4, 3, rng);
    const auto before = p;
    AdamConfig config;
    config.learning_rate = 0.0;
    AdamState s = AdamState::for_params(p, config);
    for (int i = 0; i < 20; ++i) {
        const auto grad = backward(p, random_input(4, rng), i % 3, 3.0);
        adam_step(p, grad, s);
    }
    EXPECT_TRUE(p == before);
    EXPECT_TRUE(p.all_finite());
}

TEST(copy_params, copy_is_independent_of_source) {
    Rng rng = make_stream(15, 0);
    auto src = MLPParameters::glorot(4, 3, rng);
    const auto copy = copy_params(src);
    src.w1(0, 0) += 1.0;
    src.b3(2) = 42.0;
    EXPECT_FALSE(copy == src);
    EXPECT_NE(copy.w1(0, 0), src.w1(0, 0));
}

TEST(copy_params, zero_copy_is_zero_and_forward_agrees) {
    const auto zero = copy_params(MLPParameters::zeros(3, 2));
    for (double v : zero.flatten()) EXPECT_EQ(v, 0.0);

    Rng rng = make_stream(16, 0);
    const auto src = MLPParameters::glorot(4, 3, rng);
    const auto copy = copy_params(src);
    for (int i = 0; i < 100; ++i) {
        const auto x = random_input(4, rng);
        const QValues a = forward(src, x);
        const QValues b = forward(copy, x);
        for (int k = 0; k < 3; ++k) EXPECT_EQ(a(k), b(k));
    }
}

TEST(mlp_parameters, glorot_respects_limits_and_shapes) {
    Rng rng = make_stream(17, 0);
    const auto p = MLPParameters::glorot(4, 3, rng);
    EXPECT_EQ(p.w1.rows(), kHidden1);
    EXPECT_EQ(p.w2.rows(), kHidden2);
    EXPECT_EQ(p.w3.rows(), 3);
    EXPECT_LE(p.w1.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (64 + 4)));
    EXPECT_LE(p.w2.cwiseAbs().maxCoeff(), std::sqrt(6.0 / (32 + 64)));
    EXPECT_EQ(p.b1.cwiseAbs().maxCoeff(), 0.0);
}
