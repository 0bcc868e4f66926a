#include "oymb/neuralnet.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace oymb {

namespace {

void check_input(const MLPParameters& params, std::size_t size) {
    if (static_cast<int>(size) != params.input_dim()) {
        throw std::invalid_argument("network input has length " + std::to_string(size) +
                                    ", expected " + std::to_string(params.input_dim()));
    }
}

void check_action(const MLPParameters& params, int action) {
    if (action < 0 || action >= params.action_count()) {
        throw std::invalid_argument("action index " + std::to_string(action) + " out of range");
    }
}

Eigen::MatrixXd glorot_matrix(int rows, int cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            m(i, j) = uniform_real(rng, -limit, limit);
        }
    }
    return m;
}

}  // namespace

MLPParameters MLPParameters::zeros(int input_dim, int action_count) {
    if (input_dim <= 0 || action_count <= 0) {
        throw std::invalid_argument("network dimensions must be positive");
    }
    MLPParameters p;
    p.w1 = Eigen::MatrixXd::Zero(kHidden1, input_dim);
    p.b1 = Eigen::VectorXd::Zero(kHidden1);
    p.w2 = Eigen::MatrixXd::Zero(kHidden2, kHidden1);
    p.b2 = Eigen::VectorXd::Zero(kHidden2);
    p.w3 = Eigen::MatrixXd::Zero(action_count, kHidden2);
    p.b3 = Eigen::VectorXd::Zero(action_count);
    return p;
}

MLPParameters MLPParameters::glorot(int input_dim, int action_count, Rng& rng) {
    MLPParameters p = zeros(input_dim, action_count);
    p.w1 = glorot_matrix(kHidden1, input_dim, rng);
    p.w2 = glorot_matrix(kHidden2, kHidden1, rng);
    p.w3 = glorot_matrix(action_count, kHidden2, rng);
    return p;
}

std::size_t MLPParameters::parameter_count() const {
    return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() +
                                    b3.size());
}

bool MLPParameters::all_finite() const {
    return w1.allFinite() && b1.allFinite() && w2.allFinite() && b2.allFinite() &&
           w3.allFinite() && b3.allFinite();
}

bool MLPParameters::same_shape(const MLPParameters& o) const {
    return w1.rows() == o.w1.rows() && w1.cols() == o.w1.cols() && b1.size() == o.b1.size() &&
           w2.rows() == o.w2.rows() && w2.cols() == o.w2.cols() && b2.size() == o.b2.size() &&
           w3.rows() == o.w3.rows() && w3.cols() == o.w3.cols() && b3.size() == o.b3.size();
}

std::vector<double> MLPParameters::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    auto append = [&out](const auto& t) { out.insert(out.end(), t.data(), t.data() + t.size()); };
    append(w1); append(b1); append(w2); append(b2); append(w3); append(b3);
    return out;
}

void MLPParameters::assign_flat(std::span<const double> values) {
    if (values.size() != parameter_count()) {
        throw std::invalid_argument("flat parameter vector has wrong length");
    }
    std::size_t offset = 0;
    for_each_tensor([&](auto& t) {
        std::copy_n(values.begin() + static_cast<std::ptrdiff_t>(offset), t.size(), t.data());
        offset += static_cast<std::size_t>(t.size());
    });
}

bool operator==(const MLPParameters& a, const MLPParameters& b) {
    return a.same_shape(b) && a.w1 == b.w1 && a.b1 == b.b1 && a.w2 == b.w2 && a.b2 == b.b2 &&
           a.w3 == b.w3 && a.b3 == b.b3;
}

QValues forward(const MLPParameters& params, std::span<const double> input) {
    check_input(params, input.size());
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
    const Eigen::VectorXd h1 = (params.w1 * x + params.b1).cwiseMax(0.0);
    const Eigen::VectorXd h2 = (params.w2 * h1 + params.b2).cwiseMax(0.0);
    return params.w3 * h2 + params.b3;
}

Eigen::MatrixXd forward_batch(const MLPParameters& params, const Eigen::MatrixXd& inputs) {
    check_input(params, static_cast<std::size_t>(inputs.rows()));
    const Eigen::MatrixXd h1 = ((params.w1 * inputs).colwise() + params.b1).cwiseMax(0.0);
    const Eigen::MatrixXd h2 = ((params.w2 * h1).colwise() + params.b2).cwiseMax(0.0);
    return (params.w3 * h2).colwise() + params.b3;
}

MLPGradient backward(const MLPParameters& params, std::span<const double> input, int action,
                     double td_target) {
    check_input(params, input.size());
    check_action(params, action);
    const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));

    const Eigen::VectorXd z1 = params.w1 * x + params.b1;
    const Eigen::VectorXd h1 = z1.cwiseMax(0.0);
    const Eigen::VectorXd z2 = params.w2 * h1 + params.b2;
    const Eigen::VectorXd h2 = z2.cwiseMax(0.0);
    const double q = params.w3.row(action).dot(h2) + params.b3(action);
    const double residual = q - td_target;

    MLPGradient g = MLPParameters::zeros(params.input_dim(), params.action_count());
    g.w3.row(action) = residual * h2.transpose();
    g.b3(action) = residual;

    Eigen::VectorXd dz2 = residual * params.w3.row(action).transpose();
    dz2 = dz2.cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
    g.w2 = dz2 * h1.transpose();
    g.b2 = dz2;

    Eigen::VectorXd dz1 = params.w2.transpose() * dz2;
    dz1 = dz1.cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    g.w1 = dz1 * x.transpose();
    g.b1 = dz1;
    return g;
}

BatchGradient batch_backward(const MLPParameters& params, const Eigen::MatrixXd& inputs,
                             std::span<const int> actions, std::span<const double> targets) {
    check_input(params, static_cast<std::size_t>(inputs.rows()));
    const auto batch = inputs.cols();
    if (batch == 0 || static_cast<std::size_t>(batch) != actions.size() ||
        actions.size() != targets.size()) {
        throw std::invalid_argument("batch inputs, actions and targets disagree in size");
    }
    for (int a : actions) check_action(params, a);

    const Eigen::MatrixXd z1 = (params.w1 * inputs).colwise() + params.b1;
    const Eigen::MatrixXd h1 = z1.cwiseMax(0.0);
    const Eigen::MatrixXd z2 = (params.w2 * h1).colwise() + params.b2;
    const Eigen::MatrixXd h2 = z2.cwiseMax(0.0);
    const Eigen::MatrixXd q = (params.w3 * h2).colwise() + params.b3;

    // Output error is nonzero only at the taken action; scaled by 1/B for the mean.
    const double scale = 1.0 / static_cast<double>(batch);
    Eigen::MatrixXd dq = Eigen::MatrixXd::Zero(q.rows(), batch);
    double sse = 0.0;
    for (Eigen::Index j = 0; j < batch; ++j) {
        const double residual = q(actions[j], j) - targets[j];
        sse += residual * residual;
        dq(actions[j], j) = residual * scale;
    }

    BatchGradient out{MLPParameters::zeros(params.input_dim(), params.action_count()),
                      sse * scale};
    MLPGradient& g = out.gradient;
    g.w3 = dq * h2.transpose();
    g.b3 = dq.rowwise().sum();

    const Eigen::MatrixXd dz2 =
        (params.w3.transpose() * dq).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
    g.w2 = dz2 * h1.transpose();
    g.b2 = dz2.rowwise().sum();

    const Eigen::MatrixXd dz1 =
        (params.w2.transpose() * dz2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
    g.w1 = dz1 * inputs.transpose();
    g.b1 = dz1.rowwise().sum();
    return out;
}

AdamState AdamState::for_params(const MLPParameters& params, AdamConfig config) {
    AdamState s;
    s.m = MLPParameters::zeros(params.input_dim(), params.action_count());
    s.v = s.m;
    s.t = 0;
    s.config = config;
    return s;
}

void adam_step(MLPParameters& params, const MLPGradient& grads, AdamState& state) {
    if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v)) {
        throw std::invalid_argument("adam_step: parameter, gradient and moment shapes differ");
    }
    const AdamConfig& c = state.config;
    state.t += 1;
    const double bias1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
    const double bias2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));

    auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
        m = c.beta1 * m + (1.0 - c.beta1) * g;
        v = c.beta2 * v + (1.0 - c.beta2) * g.cwiseProduct(g);
        p.array() -= c.learning_rate * (m.array() / bias1) /
                     ((v.array() / bias2).sqrt() + c.epsilon);
    };
    update(params.w1, grads.w1, state.m.w1, state.v.w1);
    update(params.b1, grads.b1, state.m.b1, state.v.b1);
    update(params.w2, grads.w2, state.m.w2, state.v.w2);
    update(params.b2, grads.b2, state.m.b2, state.v.b2);
    update(params.w3, grads.w3, state.m.w3, state.v.w3);
    update(params.b3, grads.b3, state.m.b3, state.v.b3);
}

}  // namespace oymb
