#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "qbgeom/solver_analytic.hpp"

namespace qbgeom {

/// Diagonal battery state diag(1-p, p) in the {|g_B>, |e_B>} basis.
struct BatteryState {
    double population = 0.0;
};

/// Builds the battery state from the amplitude, tolerating up to 1e-9 of
/// numerical overshoot above 1.
inline BatteryState battery_state(Complex c2) {
    double p = std::norm(c2);
    if (p > 1.0 + 1e-9) throw std::domain_error("battery_state: population exceeds 1");
    return {std::clamp(p, 0.0, 1.0)};
}

/// A finite-dimensional diagonal state paired with its Hamiltonian spectrum:
/// populations[i] is attached to energies[i], energies ascending.
struct SpectralPair {
    std::vector<double> populations;
    std::vector<double> energies;
};

/// Ergotropy of a diagonal state: tr(rho H) minus the passive-state energy,
/// where the passive state pairs populations sorted in non-increasing order
/// with the ascending energy levels. Throws on unnormalized populations or
/// unsorted energies.
inline double ergotropy_general(const SpectralPair& state) {
    const auto& pop = state.populations;
    const auto& en = state.energies;
    if (pop.empty() || pop.size() != en.size())
        throw std::domain_error("ergotropy_general: populations and energies must be non-empty and equal-sized");
    if (!std::is_sorted(en.begin(), en.end()))
        throw std::domain_error("ergotropy_general: energies must be ascending");
    double sum = 0.0;
    for (double r : pop) {
        if (r < -1e-12) throw std::domain_error("ergotropy_general: negative population");
        sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw std::domain_error("ergotropy_general: populations must sum to 1");

    const double active = std::inner_product(pop.begin(), pop.end(), en.begin(), 0.0);
    std::vector<double> sorted(pop);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    const double passive = std::inner_product(sorted.begin(), sorted.end(), en.begin(), 0.0);
    return active - passive;
}

/// Battery energy E_B = omega0 * p. With the default initial condition
/// p(0) = 0, so Delta E_B(t) = E_B(t).
inline double energy(double population, double omega0) { return omega0 * population; }

inline std::vector<double> energy_series(std::span<const double> populations, double omega0) {
    std::vector<double> out(populations.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = energy(populations[k], omega0);
    return out;
}

/// Qubit ergotropy W = omega0 (2p - 1) Theta(p - 1/2); zero at p = 1/2
/// regardless of the Heaviside convention since the prefactor vanishes.
inline double ergotropy_qubit(double population, double omega0) {
    if (population < 0.0 || population > 1.0 + 1e-9)
        throw std::domain_error("ergotropy_qubit: population must lie in [0, 1]");
    const double p = std::min(population, 1.0);
    return p > 0.5 ? omega0 * (2.0 * p - 1.0) : 0.0;
}

inline std::vector<double> ergotropy_series(std::span<const double> populations, double omega0) {
    std::vector<double> out(populations.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = ergotropy_qubit(populations[k], omega0);
    return out;
}

inline std::vector<double> population_series(const AmplitudeTrajectory& traj) {
    std::vector<double> out(traj.c2.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = std::norm(traj.c2[k]);
    return out;
}

/// Instantaneous charging power P_B = 2 omega0 Re[c2* c2dot], evaluated with
/// rotating-frame amplitudes. The fast-frame phase contributes only an
/// imaginary term, so this equals omega0 d|c2|^2/dt in any frame.
inline std::vector<double> instantaneous_power(const AmplitudeTrajectory& traj, double omega0) {
    if (traj.dc2_dt.size() != traj.c2.size())
        throw std::domain_error("instantaneous_power: trajectory carries no derivative");
    std::vector<double> out(traj.c2.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = 2.0 * omega0 * std::real(std::conj(traj.c2[k]) * traj.dc2_dt[k]);
    return out;
}

/// Average power E_B(t)/t, defined as 0 at t = 0 by continuity.
inline std::vector<double> average_power(std::span<const double> energy_series,
                                         std::span<const double> t_grid) {
    if (energy_series.size() != t_grid.size())
        throw std::domain_error("average_power: series and grid sizes differ");
    std::vector<double> out(t_grid.size());
    for (std::size_t k = 0; k < out.size(); ++k)
        out[k] = t_grid[k] > 0.0 ? energy_series[k] / t_grid[k] : 0.0;
    return out;
}

struct SeriesMax {
    std::size_t index = 0;
    double t = 0.0;
    double value = 0.0;
};

/// Grid point of maximal value; ties break toward the earliest time.
inline SeriesMax max_over_time(std::span<const double> series, std::span<const double> t_grid) {
    if (series.empty() || series.size() != t_grid.size())
        throw std::domain_error("max_over_time: empty series");
    SeriesMax m{0, t_grid[0], series[0]};
    for (std::size_t k = 1; k < series.size(); ++k) {
        if (series[k] > m.value) m = {k, t_grid[k], series[k]};
    }
    return m;
}

/// The thermodynamic time series of a trajectory. Energy and ergotropy are
/// in units of omega0's energy scale, power in omega0*gamma.
struct ObservableSeries {
    std::vector<double> t_grid;
    std::vector<double> population;
    std::vector<double> energy;
    std::vector<double> ergotropy;
    std::vector<double> power;
    std::vector<double> avg_power;
};

inline ObservableSeries observables_from(const AmplitudeTrajectory& traj, double omega0) {
    ObservableSeries s;
    s.t_grid = traj.t_grid;
    s.population = population_series(traj);
    s.energy = energy_series(s.population, omega0);
    s.ergotropy = ergotropy_series(s.population, omega0);
    s.power = instantaneous_power(traj, omega0);
    s.avg_power = average_power(s.energy, s.t_grid);
    return s;
}

} // namespace qbgeom
