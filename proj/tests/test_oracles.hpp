#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace oracle {

inline constexpr int kH1 = 64;
inline constexpr int kH2 = 32;

// Straight-line evaluation over the flat layout (w1, b1, w2, b2, w3, b3;
// matrices column-major).
inline std::vector<double> forward(const std::vector<double>& flat, int d_in, int actions,
                                   std::span<const double> x) {
    std::size_t off = 0;
    auto at = [&](std::size_t base, int rows, int r, int c) {
        return flat[base + static_cast<std::size_t>(c) * rows + r];
    };
    const std::size_t w1 = off; off += static_cast<std::size_t>(kH1) * d_in;
    const std::size_t b1 = off; off += kH1;
    const std::size_t w2 = off; off += static_cast<std::size_t>(kH2) * kH1;
    const std::size_t b2 = off; off += kH2;
    const std::size_t w3 = off; off += static_cast<std::size_t>(actions) * kH2;
    const std::size_t b3 = off;

    std::vector<double> h1(kH1), h2(kH2), q(static_cast<std::size_t>(actions));
    for (int i = 0; i < kH1; ++i) {
        double s = flat[b1 + i];
        for (int j = 0; j < d_in; ++j) s += at(w1, kH1, i, j) * x[j];
        h1[i] = s > 0.0 ? s : 0.0;
    }
    for (int i = 0; i < kH2; ++i) {
        double s = flat[b2 + i];
        for (int j = 0; j < kH1; ++j) s += at(w2, kH2, i, j) * h1[j];
        h2[i] = s > 0.0 ? s : 0.0;
    }
    for (int i = 0; i < actions; ++i) {
        double s = flat[b3 + i];
        for (int j = 0; j < kH2; ++j) s += at(w3, actions, i, j) * h2[j];
        q[i] = s;
    }
    return q;
}

inline double td_loss(const std::vector<double>& flat, int d_in, int actions,
                      std::span<const double> x, int action, double target) {
    const double r = target - forward(flat, d_in, actions, x)[action];
    return 0.5 * r * r;
}

inline std::vector<double> finite_difference_gradient(std::vector<double> flat, int d_in,
                                                      int actions, std::span<const double> x,
                                                      int action, double target,
                                                      double step = 1e-5) {
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + step;
        const double up = td_loss(flat, d_in, actions, x, action, target);
        flat[i] = saved - step;
        const double down = td_loss(flat, d_in, actions, x, action, target);
        flat[i] = saved;
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

// Relative error 1e-4 with an absolute floor of 1e-8.
inline bool gradient_close(double analytic, double numeric) {
    const double diff = std::abs(analytic - numeric);
    if (diff <= 1e-8) return true;
    return diff <= 1e-4 * std::max(std::abs(analytic), std::abs(numeric));
}

struct CarState {
    double p;
    double v;
};

// Scalar MountainCar update written out term by term.
inline CarState mountaincar_step(CarState s, int action) {
    double v = s.v + 0.001 * static_cast<double>(action - 1) + (-0.0025) * std::cos(3.0 * s.p);
    if (v > 0.07) v = 0.07;
    if (v < -0.07) v = -0.07;
    double p = s.p + v;
    if (p > 0.6) p = 0.6;
    if (p < -1.2) p = -1.2;
    if (p == -1.2) v = 0.0;
    return {p, v};
}

}  // namespace oracle
