#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qbgeom/model.hpp"
#include "qbgeom/solver_analytic.hpp"

namespace qbgeom {

/// Thrown when an integration step violates the stability precondition.
struct StabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Scheme {
    augmented_rk4,      ///< exact local reduction {bdot = -i d b - K z, zdot = b - lambda z}, classical RK4
    volterra_trapezoid, ///< direct trapezoidal discretization of the memory integral
};

inline const char* to_string(Scheme s) {
    return s == Scheme::augmented_rk4 ? "augmented-rk4" : "volterra-trapezoid";
}

struct IntegratorConfig {
    Scheme scheme = Scheme::augmented_rk4;
    double dt = 0.01;      ///< internal step bound, units of 1/gamma
    double abs_tol = 1e-6; ///< tolerance used in self-consistency reporting

    void validate(const ModelParams& p) const {
        if (!(dt > 0.0)) throw std::domain_error("IntegratorConfig: dt must be > 0");
        if (dt > p.t_max / 10.0)
            throw std::domain_error("IntegratorConfig: dt must be <= t_max/10");
    }
};

namespace detail {

/// One channel integrated with the auxiliary variable
/// z(t) = int_0^t e^{-lambda(t-u)} b(u) du, which turns the memory integral
/// into the exact local system zdot = b - lambda z. Classical fixed-step RK4.
struct Rk4Channel {
    Complex delta_i;  // i*delta
    double kernel_w;  // K = g*gamma*lambda/2
    double lambda;
    Complex b, z;
    double h;

    void step() {
        const auto rhs = [&](Complex bb, Complex zz, Complex& db, Complex& dz) {
            db = -delta_i * bb - kernel_w * zz;
            dz = bb - lambda * zz;
        };
        Complex k1b, k1z, k2b, k2z, k3b, k3z, k4b, k4z;
        rhs(b, z, k1b, k1z);
        rhs(b + 0.5 * h * k1b, z + 0.5 * h * k1z, k2b, k2z);
        rhs(b + 0.5 * h * k2b, z + 0.5 * h * k2z, k3b, k3z);
        rhs(b + h * k3b, z + h * k3z, k4b, k4z);
        b += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    }

    Complex derivative() const { return -delta_i * b - kernel_w * z; }
};

/*
 * Trapezoid scheme: with I_n the composite trapezoid of
 * int_0^{t_n} e^{-lambda(t_n-u)} b(u) du, the history advances exactly as
 *
 *     I_{n+1} = e^{-lambda h} ( I_n + (h/2) b_n ) + (h/2) b_{n+1},
 *
 * because every stored node just picks up one more factor e^{-lambda h}.
 * The step itself is the implicit trapezoid rule
 * b_{n+1} = b_n + (h/2)(F_n + F_{n+1}) with F = -i d b - K I, solved in
 * closed form since everything is linear in b_{n+1}.
 */
struct TrapezoidChannel {
    Complex delta_i;
    double kernel_w;
    double lambda;
    Complex b, z; // z holds the trapezoid value of the memory integral
    double h;

    void step() {
        const double efac = std::exp(-lambda * h);
        const Complex known = efac * (z + 0.5 * h * b);
        const Complex f_n = -delta_i * b - kernel_w * z;
        const Complex rhs = b + 0.5 * h * f_n - 0.5 * h * kernel_w * known;
        const Complex den = 1.0 + 0.5 * h * delta_i + 0.25 * h * h * kernel_w;
        b = rhs / den;
        z = known + 0.5 * h * b;
    }

    Complex derivative() const { return -delta_i * b - kernel_w * z; }
};

template <class ChannelState>
AmplitudeTrajectory integrate_channels(const ModelParams& p,
                                       const std::array<ChannelSpec, 2>& channels,
                                       Complex c1_0, Complex c2_0,
                                       const IntegratorConfig& cfg) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    const std::size_t n = p.n_steps;
    const double out_dt = p.t_max / static_cast<double>(n - 1);
    const auto substeps = static_cast<std::size_t>(std::max(1.0, std::ceil(out_dt / cfg.dt - 1e-12)));
    const double h = out_dt / static_cast<double>(substeps);

    std::array<ChannelState, 2> state;
    for (std::size_t c = 0; c < 2; ++c) {
        state[c].delta_i = Complex{0.0, channels[c].detuning};
        state[c].kernel_w = 0.5 * channels[c].weight * p.gamma * p.lambda;
        state[c].lambda = p.lambda;
        state[c].b = (c == 0) ? (c1_0 + c2_0) * inv_sqrt2 : (c1_0 - c2_0) * inv_sqrt2;
        state[c].z = {};
        state[c].h = h;
    }

    AmplitudeTrajectory traj;
    traj.t_grid.resize(n);
    traj.c1.resize(n);
    traj.c2.resize(n);
    traj.dc2_dt.resize(n);
    traj.c1[0] = c1_0;
    traj.c2[0] = c2_0;
    traj.dc2_dt[0] = (state[0].derivative() - state[1].derivative()) * inv_sqrt2;

    for (std::size_t k = 1; k < n; ++k) {
        for (std::size_t s = 0; s < substeps; ++s) {
            state[0].step();
            state[1].step();
        }
        traj.t_grid[k] = static_cast<double>(k) * out_dt;
        traj.c1[k] = (state[0].b + state[1].b) * inv_sqrt2;
        traj.c2[k] = (state[0].b - state[1].b) * inv_sqrt2;
        traj.dc2_dt[k] = (state[0].derivative() - state[1].derivative()) * inv_sqrt2;
    }
    return traj;
}

} // namespace detail

/// Fixed-step numerical oracle for the same channel dynamics, with explicit
/// channel specs. Rejects steps outside the stability region.
inline AmplitudeTrajectory propagate_numeric_with_channels(
        const ModelParams& p, const std::array<ChannelSpec, 2>& channels,
        Complex c1_0, Complex c2_0, const IntegratorConfig& cfg) {
    p.validate();
    cfg.validate(p);
    detail::check_initial_norm(c1_0, c2_0);
    for (const auto& ch : channels) {
        const double rate = std::max({p.lambda, std::abs(ch.detuning),
                                      std::sqrt(0.5 * ch.weight * p.gamma * p.lambda)});
        if (cfg.dt * rate > 0.5)
            throw StabilityError("propagate_numeric: dt * max(lambda, |delta|, sqrt(g*gamma*lambda/2)) = " +
                                 std::to_string(cfg.dt * rate) + " exceeds 0.5");
    }
    if (cfg.scheme == Scheme::augmented_rk4)
        return detail::integrate_channels<detail::Rk4Channel>(p, channels, c1_0, c2_0, cfg);
    return detail::integrate_channels<detail::TrapezoidChannel>(p, channels, c1_0, c2_0, cfg);
}

inline AmplitudeTrajectory propagate_numeric(const ModelParams& p,
                                             Complex c1_0 = {1.0, 0.0},
                                             Complex c2_0 = {0.0, 0.0},
                                             const IntegratorConfig& cfg = {}) {
    return propagate_numeric_with_channels(p, collective_channels(p), c1_0, c2_0, cfg);
}

} // namespace qbgeom
