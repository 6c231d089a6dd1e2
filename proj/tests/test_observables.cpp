#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <vector>

#include "qbgeom/observables.hpp"
#include "qbgeom/solver_analytic.hpp"
#include "qbgeom/validation.hpp"

using namespace qbgeom;

namespace {

// brute-force ergotropy: active energy minus the minimum over all
// population-to-level assignments
double ergotropy_bruteforce(std::vector<double> pops, const std::vector<double>& energies) {
    const double active = std::inner_product(pops.begin(), pops.end(), energies.begin(), 0.0);
    std::vector<std::size_t> idx(pops.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::sort(idx.begin(), idx.end());
    double best = std::numeric_limits<double>::infinity();
    do {
        double val = 0.0;
        for (std::size_t i = 0; i < idx.size(); ++i) val += pops[idx[i]] * energies[i];
        best = std::min(best, val);
    } while (std::next_permutation(idx.begin(), idx.end()));
    return active - best;
}

ModelParams figure_params() {
    ModelParams p; // omega0 = 100, zeta = 1, lambda = 0.04
    p.l_over_lambda0 = 0.15;
    return p;
}

} // namespace

TEST_CASE("qubit ergotropy: threshold values") {
    const double om = 1.0;
    CHECK(ergotropy_qubit(0.5, om) == 0.0);
    CHECK(ergotropy_qubit(1.0, om) == doctest::Approx(om).epsilon(1e-15));
    CHECK(ergotropy_qubit(0.75, om) == doctest::Approx(0.5 * om).epsilon(1e-15));
    CHECK(ergotropy_qubit(0.2, om) == 0.0);
    CHECK_THROWS_AS(ergotropy_qubit(1.1, om), std::domain_error);
    CHECK_THROWS_AS(ergotropy_qubit(-0.1, om), std::domain_error);
}

TEST_CASE("general ergotropy on the trivial states") {
    // p = 0.75 qubit with energies {0, omega0}
    CHECK(ergotropy_general({{0.25, 0.75}, {0.0, 1.0}}) == doctest::Approx(0.5).epsilon(1e-14));
    // maximally mixed state is passive for any Hamiltonian
    CHECK(ergotropy_general({{0.5, 0.5}, {0.0, 1.0}}) == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(ergotropy_general({{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.0, 0.7, 2.9}})) < 1e-15);
}

TEST_CASE("3-level example equals the permutation oracle") {
    // populations {0.2, 0.3, 0.5} attached to levels {0, 1, 3}
    const std::vector<double> pops{0.2, 0.3, 0.5};
    const std::vector<double> en{0.0, 1.0, 3.0};
    const double w = ergotropy_general({pops, en});
    CHECK(w == doctest::Approx(0.9).epsilon(1e-14));
    CHECK(w == doctest::Approx(ergotropy_bruteforce(pops, en)).epsilon(1e-14));
}

TEST_CASE("general ergotropy equals brute force on random 3- and 4-level states") {
    SplitMix64 rng{1234};
    for (int i = 0; i < 100; ++i) {
        for (std::size_t dim : {std::size_t{3}, std::size_t{4}}) {
            std::vector<double> pops(dim);
            double sum = 0.0;
            for (auto& x : pops) sum += (x = rng.uniform(0.01, 1.0));
            for (auto& x : pops) x /= sum;
            std::vector<double> en(dim);
            for (auto& e : en) e = rng.uniform(0.0, 5.0);
            std::sort(en.begin(), en.end());
            const double a = ergotropy_general({pops, en});
            const double b = ergotropy_bruteforce(pops, en);
            CHECK(std::abs(a - b) < 1e-12);
        }
    }
}

TEST_CASE("qubit formula equals the general oracle on 1000 random states") {
    SplitMix64 rng{99};
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double p = rng.uniform();
        worst = std::max(worst, std::abs(ergotropy_general({{1.0 - p, p}, {0.0, 1.0}}) -
                                         ergotropy_qubit(p, 1.0)));
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("ergotropy is shift-invariant and scales linearly in the Hamiltonian") {
    SplitMix64 rng{5};
    for (int i = 0; i < 50; ++i) {
        std::vector<double> pops{rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0), rng.uniform(0.01, 1.0)};
        const double sum = pops[0] + pops[1] + pops[2];
        for (auto& x : pops) x /= sum;
        std::vector<double> en{0.0, rng.uniform(0.1, 1.0), rng.uniform(1.0, 4.0)};
        std::sort(en.begin(), en.end());
        const double base = ergotropy_general({pops, en});

        const double shift = rng.uniform(-3.0, 3.0);
        std::vector<double> shifted(en);
        for (auto& e : shifted) e += shift;
        CHECK(ergotropy_general({pops, shifted}) == doctest::Approx(base).epsilon(1e-11));

        const double scale = rng.uniform(0.1, 7.0);
        std::vector<double> scaled(en);
        for (auto& e : scaled) e *= scale;
        CHECK(ergotropy_general({pops, scaled}) == doctest::Approx(scale * base).epsilon(1e-11));
    }
}

TEST_CASE("malformed spectral pairs are rejected") {
    CHECK_THROWS_AS(ergotropy_general({{0.5, 0.4}, {0.0, 1.0}}), std::domain_error);   // not normalized
    CHECK_THROWS_AS(ergotropy_general({{0.5, 0.5}, {1.0, 0.0}}), std::domain_error);   // energies descending
    CHECK_THROWS_AS(ergotropy_general({{0.5, 0.5}, {0.0}}), std::domain_error);        // size mismatch
    CHECK_THROWS_AS(ergotropy_general({{}, {}}), std::domain_error);                   // empty
    CHECK_THROWS_AS(ergotropy_general({{1.2, -0.2}, {0.0, 1.0}}), std::domain_error);  // negative population
}

TEST_CASE("energy is linear in the population") {
    CHECK(energy(0.0, 100.0) == 0.0);
    CHECK(energy(1.0, 100.0) == 100.0);
    CHECK(energy(0.25, 100.0) == doctest::Approx(25.0).epsilon(1e-15));
}

TEST_CASE("threshold law: W > 0 exactly when p > 1/2") {
    SplitMix64 rng{17};
    for (int i = 0; i < 500; ++i) {
        const double p = rng.uniform();
        const double w = ergotropy_qubit(p, 1.0);
        if (p > 0.5) {
            CHECK(w > 0.0);
            CHECK(w == doctest::Approx(2.0 * p - 1.0).epsilon(1e-14));
        } else {
            CHECK(w == 0.0);
        }
    }
}

TEST_CASE("battery state clamps rounding overshoot and rejects real excess") {
    CHECK(battery_state(Complex{1.0, 0.0}).population == 1.0);
    CHECK(battery_state(Complex{0.0, 0.0}).population == 0.0);
    CHECK_THROWS_AS(battery_state(Complex{1.1, 0.0}), std::domain_error);
}

TEST_CASE("instantaneous power starts at zero and matches finite differences") {
    ModelParams p = figure_params();
    p.t_max = 25.0;
    p.n_steps = 4001; // dt = t_max/4000
    const auto traj = propagate_analytic(p);
    const auto s = observables_from(traj, p.omega0);
    CHECK(s.power[0] == 0.0); // c2(0) = 0

    const double dt = s.t_grid[1] - s.t_grid[0];
    double max_p = 0.0, max_err = 0.0;
    for (std::size_t k = 1; k + 1 < s.t_grid.size(); ++k) {
        const double fd = (s.energy[k + 1] - s.energy[k - 1]) / (2.0 * dt);
        max_err = std::max(max_err, std::abs(fd - s.power[k]));
        max_p = std::max(max_p, std::abs(s.power[k]));
    }
    CHECK(max_err / max_p < 1e-4);
}

TEST_CASE("stationary amplitudes carry zero power") {
    AmplitudeTrajectory traj;
    traj.t_grid = {0.0, 1.0, 2.0};
    traj.c1 = {{0.3, 0.1}, {0.3, 0.1}, {0.3, 0.1}};
    traj.c2 = {{0.5, -0.2}, {0.5, -0.2}, {0.5, -0.2}};
    traj.dc2_dt = {{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}};
    for (double v : instantaneous_power(traj, 100.0)) CHECK(v == 0.0);
}

TEST_CASE("centered differences converge to the analytic power at 2nd order") {
    ModelParams p = figure_params();
    p.t_max = 25.0;
    auto fd_error = [&](std::size_t n) {
        ModelParams q = p;
        q.n_steps = n;
        const auto traj = propagate_analytic(q);
        const auto s = observables_from(traj, q.omega0);
        const double dt = s.t_grid[1] - s.t_grid[0];
        double worst = 0.0;
        for (std::size_t k = 1; k + 1 < s.t_grid.size(); ++k)
            worst = std::max(worst, std::abs((s.energy[k + 1] - s.energy[k - 1]) / (2.0 * dt) - s.power[k]));
        return worst;
    };
    const double e1 = fd_error(2001);
    const double e2 = fd_error(4001);
    CHECK(std::abs(std::log2(e1 / e2) - 2.0) < 0.3);
}

TEST_CASE("trapezoid integral of the power reproduces the energy") {
    ModelParams p = figure_params();
    p.t_max = 25.0;
    p.n_steps = 20001; // the pinned consistency grid
    const auto traj = propagate_analytic(p);
    const auto s = observables_from(traj, p.omega0);
    const double dt = s.t_grid[1] - s.t_grid[0];
    double acc = 0.0, worst = 0.0;
    for (std::size_t k = 1; k < s.t_grid.size(); ++k) {
        acc += 0.5 * dt * (s.power[k] + s.power[k - 1]);
        worst = std::max(worst, std::abs(acc - (s.energy[k] - s.energy[0])));
    }
    CHECK(worst < 1e-6 * p.omega0);
}

TEST_CASE("average power conventions") {
    // linear energy ramp gives constant average power
    std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> e{0.0, 0.25, 0.5, 0.75, 1.0};
    const auto avg = average_power(e, t);
    CHECK(avg[0] == 0.0);
    for (std::size_t k = 1; k < avg.size(); ++k)
        CHECK(avg[k] == doctest::Approx(0.25).epsilon(1e-15));

    // constant energy decays as c/t
    std::vector<double> ec{0.7, 0.7, 0.7, 0.7, 0.7};
    const auto avg2 = average_power(ec, t);
    CHECK(avg2[0] == 0.0);
    for (std::size_t k = 2; k < avg2.size(); ++k) CHECK(avg2[k] < avg2[k - 1]);

    // on solver output, avg power at gamma*t = 50 is E(50)/50
    ModelParams p = figure_params();
    p.t_max = 100.0;
    p.n_steps = 2001;
    const auto traj = propagate_analytic(p);
    const auto s = observables_from(traj, p.omega0);
    const std::size_t k50 = 1000; // t = 50 on this grid
    CHECK(s.t_grid[k50] == doctest::Approx(50.0).epsilon(1e-14));
    CHECK(s.avg_power[k50] == s.energy[k50] / s.t_grid[k50]);
}

TEST_CASE("max_over_time picks the earliest maximal grid point") {
    std::vector<double> t{0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<double> inc{0.0, 0.1, 0.2, 0.3, 0.4};
    auto m = max_over_time(inc, t);
    CHECK(m.index == 4);
    CHECK(m.t == 4.0);

    std::vector<double> plateau{0.0, 0.7, 0.7, 0.7, 0.1};
    m = max_over_time(plateau, t);
    CHECK(m.index == 1); // tie broken toward earliest time
    CHECK(m.value == 0.7);

    CHECK_THROWS_AS(max_over_time(std::vector<double>{}, std::vector<double>{}), std::domain_error);
}

TEST_CASE("observable series respects 0 <= W <= E <= omega0") {
    ModelParams p = figure_params();
    p.t_max = 300.0;
    p.n_steps = 3001;
    const auto traj = propagate_analytic(p);
    const auto s = observables_from(traj, p.omega0);
    for (std::size_t k = 0; k < s.t_grid.size(); ++k) {
        CHECK(s.ergotropy[k] >= 0.0);
        CHECK(s.ergotropy[k] <= s.energy[k] + 1e-12);
        CHECK(s.energy[k] <= p.omega0 * (1.0 + 1e-12));
        const bool above = s.population[k] > 0.5;
        CHECK((s.ergotropy[k] > 0.0) == above);
    }
}
