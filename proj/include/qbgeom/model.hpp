#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>

namespace qbgeom {

using Complex = std::complex<double>;

/// All physical and numerical inputs of a run. Every rate is expressed
/// relative to the system-reservoir coupling gamma, which is the internal
/// unit and fixed to 1; energies are reported in units of omega0.
///
/// The geometry enters through l_over_lambda0: the qubits sit at -l and +l,
/// and the resonant mode acquires the phase theta = k0*l = 2*pi*(l/lambda0)
/// between the origin and a qubit.
struct ModelParams {
    double omega0 = 100.0;        ///< transition frequency, omega0/gamma
    double zeta = 1.0;            ///< dipole-dipole coupling, zeta/gamma (resolved value)
    double gamma = 1.0;           ///< system-reservoir coupling; internal unit, fixed to 1
    double lambda = 0.04;         ///< Lorentzian spectral half-width, lambda/gamma
    double l_over_lambda0 = 0.25; ///< separation parameter; any real
    double t_max = 100.0;         ///< final time, units of 1/gamma
    std::size_t n_steps = 2001;   ///< uniform time-grid points (inclusive endpoints), >= 2

    void validate() const {
        if (!(omega0 > 0.0)) throw std::domain_error("ModelParams: omega0 must be > 0");
        if (!(lambda > 0.0)) throw std::domain_error("ModelParams: lambda must be > 0");
        if (gamma != 1.0) throw std::domain_error("ModelParams: gamma is the internal unit and must be 1");
        if (!(t_max > 0.0)) throw std::domain_error("ModelParams: t_max must be > 0");
        if (n_steps < 2) throw std::domain_error("ModelParams: n_steps must be >= 2");
        if (!std::isfinite(zeta) || !std::isfinite(l_over_lambda0))
            throw std::domain_error("ModelParams: zeta and l_over_lambda0 must be finite");
    }
};

/// One collective channel: effective kernel weight g in [0, 2] and the
/// coherent detuning delta (in units of gamma) relative to omega0.
struct ChannelSpec {
    double weight = 0.0;   ///< g+ = 1 + cos(2*theta) or g- = 1 - cos(2*theta)
    double detuning = 0.0; ///< +zeta for the symmetric channel, -zeta for the antisymmetric
};

/// Geometric phase theta = 2*pi*(l/lambda0), reduced modulo pi before use.
/// cos(2*theta) has period pi, so the reduction is exact physics and avoids
/// precision loss at large separations.
inline double geometric_phase(double l_over_lambda0) {
    if (!std::isfinite(l_over_lambda0))
        throw std::domain_error("geometric_phase: l/lambda0 must be finite");
    double r = std::fmod(l_over_lambda0, 0.5);
    if (r < 0.0) r += 0.5;
    return 2.0 * std::numbers::pi * r;
}

/// Collective channel weights (g+, g-) = (1 + cos 2theta, 1 - cos 2theta).
/// The sum g+ + g- is exactly 2 in floating point for any theta.
inline std::pair<double, double> channel_weights(double theta) {
    const double c = std::cos(2.0 * theta);
    return {1.0 + c, 1.0 - c};
}

/// The symmetric (|+>, detuning +zeta) and antisymmetric (|->, detuning
/// -zeta) collective channels for a parameter set. The detunings are the
/// eigenvalue shifts omega0 +- zeta of the dipole-dipole interaction in the
/// collective basis.
inline std::array<ChannelSpec, 2> collective_channels(const ModelParams& p) {
    const auto [gp, gm] = channel_weights(geometric_phase(p.l_over_lambda0));
    return {ChannelSpec{gp, +p.zeta}, ChannelSpec{gm, -p.zeta}};
}

/// Lorentzian spectral density J(omega) = (gamma/2pi) * lambda^2 /
/// ((omega0 - omega)^2 + lambda^2), per unit gamma.
inline double spectral_density(double omega, const ModelParams& p) {
    p.validate();
    const double d = p.omega0 - omega;
    return p.gamma / (2.0 * std::numbers::pi) * p.lambda * p.lambda / (d * d + p.lambda * p.lambda);
}

/// Bath memory kernel in the frame rotating at omega0,
///   f(tau) = integral J(omega) e^{-i(omega-omega0) tau} domega
///          = (gamma*lambda/2) e^{-lambda*tau},
/// real-valued for the resonant Lorentzian. The memory time is 1/lambda.
inline Complex memory_kernel(double tau, const ModelParams& p) {
    p.validate();
    if (tau < 0.0) throw std::domain_error("memory_kernel: tau must be >= 0");
    return {0.5 * p.gamma * p.lambda * std::exp(-p.lambda * tau), 0.0};
}

} // namespace qbgeom
