#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cmath>
#include <vector>

#include "qbgeom/observables.hpp"
#include "qbgeom/sweep.hpp"

using namespace qbgeom;

TEST_CASE("grid spec validation and values") {
    GridSpec g{Axis::l_over_lambda0, 0.0, 1.0, 5, Spacing::linear};
    CHECK_NOTHROW(g.validate());
    const auto v = g.values();
    CHECK(v.size() == 5);
    CHECK(v.front() == 0.0);
    CHECK(v.back() == 1.0);
    CHECK(v[2] == doctest::Approx(0.5).epsilon(1e-15));

    GridSpec lg{Axis::lambda_over_gamma, 0.02, 1.0, 3, Spacing::log};
    const auto lv = lg.values();
    CHECK(lv.front() == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(lv[1] == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
    CHECK(lv.back() == doctest::Approx(1.0).epsilon(1e-14));

    GridSpec single{Axis::l_over_lambda0, 0.3, 0.3, 1, Spacing::linear};
    CHECK_NOTHROW(single.validate());
    CHECK(single.values() == std::vector<double>{0.3});

    GridSpec bad = g;
    bad.min = 2.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
    GridSpec bad2 = lg;
    bad2.min = 0.0;
    CHECK_THROWS_AS(bad2.validate(), std::domain_error); // log spacing needs min > 0
    GridSpec bad3 = g;
    bad3.n_points = 0;
    CHECK_THROWS_AS(bad3.validate(), std::domain_error);
    GridSpec bad4{Axis::l_over_lambda0, 0.1, 0.4, 1, Spacing::linear};
    CHECK_THROWS_AS(bad4.validate(), std::domain_error); // single point needs min == max
}

TEST_CASE("run_parallel: deterministic placement, empty input, worker invariance") {
    auto eval = [](std::size_t i) { return static_cast<double>(i * i); };
    const auto a = run_parallel(257, 1, eval);
    const auto b = run_parallel(257, 8, eval);
    CHECK(a == b);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == static_cast<double>(i * i));

    const auto empty = run_parallel(0, 8, eval);
    CHECK(empty.empty());
    CHECK_THROWS_AS(run_parallel(4, 0, eval), std::domain_error);
}

TEST_CASE("run_parallel propagates worker exceptions") {
    auto eval = [](std::size_t i) -> double {
        if (i == 97) throw std::runtime_error("boom");
        return 0.0;
    };
    CHECK_THROWS_AS(run_parallel(256, 4, eval), std::runtime_error);
}

TEST_CASE("single-row time-geometry sweep reduces to the solver series") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.2, 0.2, 1, Spacing::linear};
    GridSpec tg{Axis::time, 0.0, 100.0, 401, Spacing::linear};
    const auto res = sweep_time_geometry(p, lg, tg, Observable::energy);
    CHECK(res.rows() == 1);
    CHECK(res.cols() == 401);

    ModelParams q = p;
    q.l_over_lambda0 = 0.2;
    q.t_max = 100.0;
    q.n_steps = 401;
    const auto traj = propagate_analytic(q);
    const auto s = observables_from(traj, q.omega0);
    for (std::size_t c = 0; c < res.cols(); ++c)
        CHECK(res.at(0, c) == s.energy[c]); // same evaluation path, exact
}

TEST_CASE("time-geometry rows at l = 0.1 and l = 0.6 are identical") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.1, 0.6, 2, Spacing::linear};
    GridSpec tg{Axis::time, 0.0, 200.0, 801, Spacing::linear};
    const auto res = sweep_time_geometry(p, lg, tg, Observable::energy);
    for (std::size_t c = 0; c < res.cols(); ++c)
        CHECK(std::abs(res.at(0, c) - res.at(1, c)) < 1e-12);
}

TEST_CASE("ergotropy map is zero exactly where the energy map is at most omega0/2") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 41, Spacing::linear};
    GridSpec tg{Axis::time, 0.0, 250.0, 301, Spacing::linear};
    const auto e = sweep_time_geometry(p, lg, tg, Observable::energy);
    const auto w = sweep_time_geometry(p, lg, tg, Observable::ergotropy);
    std::size_t zero_cells = 0, active_cells = 0;
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        if (e.values[i] <= 0.5 * p.omega0) {
            CHECK(w.values[i] == 0.0);
            ++zero_cells;
        } else {
            CHECK(w.values[i] > 0.0);
            CHECK(w.values[i] == doctest::Approx(2.0 * e.values[i] - p.omega0).epsilon(1e-12));
            ++active_cells;
        }
    }
    CHECK(zero_cells > 0);   // the map has dark regions
    CHECK(active_cells > 0); // and charged ones
}

TEST_CASE("geometry-width row at lambda = 0.04 matches the maxima of the time scan") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 0.5, 11, Spacing::linear};
    GridSpec tg{Axis::time, 0.0, 400.0, 4001, Spacing::linear};
    const auto scan = sweep_time_geometry(p, lg, tg, Observable::ergotropy);

    GridSpec wg{Axis::lambda_over_gamma, 0.04, 0.04, 1, Spacing::linear};
    TimeSampling ts{400.0, std::size_t{4001}};
    const auto maxima = sweep_geometry_width(p, lg, wg, Observable::max_ergotropy, ts);
    CHECK(maxima.rows() == 1);
    const auto tvals = tg.values();
    for (std::size_t c = 0; c < lg.n_points; ++c) {
        std::vector<double> row(scan.cols());
        for (std::size_t k = 0; k < row.size(); ++k) row[k] = scan.at(c, k);
        const auto m = max_over_time(row, tvals);
        CHECK(maxima.at(0, c) == m.value); // identical evaluation path
    }
}

TEST_CASE("max_ergotropy never exceeds max_energy, cell by cell") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 13, Spacing::linear};
    GridSpec wg{Axis::lambda_over_gamma, 0.03, 0.8, 7, Spacing::log};
    TimeSampling ts{};
    const auto e = sweep_geometry_width(p, lg, wg, Observable::max_energy, ts);
    const auto w = sweep_geometry_width(p, lg, wg, Observable::max_ergotropy, ts);
    for (std::size_t i = 0; i < e.values.size(); ++i) {
        CHECK(w.values[i] <= e.values[i] + 1e-12);
        CHECK(std::isfinite(e.values[i]));
        if (w.values[i] > 0.0) CHECK(e.values[i] > 0.5 * p.omega0); // work needs inversion
    }
}

TEST_CASE("geometry-width maps are periodic and reflection-symmetric in l") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, -0.5, 1.0, 31, Spacing::linear}; // includes -l, l, l+1/2 triples
    GridSpec wg{Axis::lambda_over_gamma, 0.05, 0.4, 4, Spacing::log};
    TimeSampling ts{200.0, std::size_t{4001}};
    const auto m = sweep_geometry_width(p, lg, wg, Observable::max_energy, ts);
    // columns 0.05 apart: l = -0.5 + 0.05 c; periodicity: c and c+10
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c + 10 < m.cols(); ++c)
            CHECK(std::abs(m.at(r, c) - m.at(r, c + 10)) < 1e-12 * p.omega0);
        // reflection: l and -l, i.e. columns 10-k and 10+k around l = 0
        for (std::size_t k = 0; k <= 10; ++k)
            CHECK(std::abs(m.at(r, 10 - k) - m.at(r, 10 + k)) < 1e-12 * p.omega0);
    }
}

TEST_CASE("maxima are non-increasing in lambda at the named geometries") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 0.25, 3, Spacing::linear}; // theta = 0, pi/4, pi/2
    GridSpec wg{Axis::lambda_over_gamma, 0.02, 1.0, 25, Spacing::log};
    const auto e = sweep_geometry_width(p, lg, wg, Observable::max_energy, {});
    const auto w = sweep_geometry_width(p, lg, wg, Observable::max_ergotropy, {});
    for (std::size_t c = 0; c < e.cols(); ++c)
        for (std::size_t r = 1; r < e.rows(); ++r) {
            CHECK(e.at(r, c) <= e.at(r - 1, c) + 1e-3 * p.omega0);
            CHECK(w.at(r, c) <= w.at(r - 1, c) + 1e-3 * p.omega0);
        }
}

TEST_CASE("running maxima have converged at the default horizon") {
    // extending t_max by 25% moves no sampled cell by more than 1e-4*omega0
    ModelParams p;
    for (double l : {0.0, 0.125, 0.2}) {
        for (double lambda : {0.04, 0.3}) {
            GridSpec lg{Axis::l_over_lambda0, l, l, 1, Spacing::linear};
            GridSpec wg{Axis::lambda_over_gamma, lambda, lambda, 1, Spacing::linear};
            const auto base = sweep_geometry_width(p, lg, wg, Observable::max_energy, {});
            ModelParams q = p;
            q.lambda = lambda;
            TimeSampling longer;
            longer.t_max = 1.25 * 100.0 / lambda;
            longer.n_points = detail::reduction_points(q, *longer.t_max);
            const auto ext = sweep_geometry_width(p, lg, wg, Observable::max_energy, longer);
            CHECK(std::abs(base.at(0, 0) - ext.at(0, 0)) <= 1e-4 * p.omega0);
        }
    }
}

TEST_CASE("sweep outputs are identical for any worker count") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 12, Spacing::linear};
    GridSpec wg{Axis::lambda_over_gamma, 0.05, 0.5, 5, Spacing::log};
    TimeSampling ts{80.0, std::size_t{1601}};
    const auto w1 = sweep_geometry_width(p, lg, wg, Observable::max_power, ts, 1);
    const auto w4 = sweep_geometry_width(p, lg, wg, Observable::max_power, ts, 4);
    const auto w8 = sweep_geometry_width(p, lg, wg, Observable::max_power, ts, 8);
    CHECK(w1.values == w4.values);
    CHECK(w1.values == w8.values);

    GridSpec tg{Axis::time, 0.0, 100.0, 501, Spacing::linear};
    const auto t1 = sweep_time_geometry(p, lg, tg, Observable::energy, 1);
    const auto t8 = sweep_time_geometry(p, lg, tg, Observable::energy, 8);
    CHECK(t1.values == t8.values);
}

TEST_CASE("sweeps reject invalid requests") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 4, Spacing::linear};
    GridSpec tg{Axis::time, 0.0, 10.0, 11, Spacing::linear};
    GridSpec wg{Axis::lambda_over_gamma, 0.05, 0.5, 4, Spacing::log};

    CHECK_THROWS_AS(sweep_time_geometry(p, lg, tg, Observable::max_power), std::domain_error);
    GridSpec bad_time{Axis::time, 1.0, 10.0, 11, Spacing::linear}; // must start at 0
    CHECK_THROWS_AS(sweep_time_geometry(p, lg, bad_time, Observable::energy), std::domain_error);
    CHECK_THROWS_AS(sweep_time_geometry(p, wg, tg, Observable::energy), std::domain_error);
    CHECK_THROWS_AS(sweep_geometry_width(p, lg, tg, Observable::max_energy, {}), std::domain_error);
}

TEST_CASE("manifest carries the grid and the run description") {
    ModelParams p;
    GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 5, Spacing::linear};
    GridSpec wg{Axis::lambda_over_gamma, 0.02, 1.0, 4, Spacing::log};
    const auto res = sweep_geometry_width(p, lg, wg, Observable::energy, TimeSampling{60.0, std::size_t{901}});
    CHECK(res.observable == Observable::max_energy); // alias resolved
    CHECK(res.manifest.row_axis == "lambda_over_gamma");
    CHECK(res.manifest.col_axis == "l_over_lambda0");
    CHECK(res.manifest.row_points == 4);
    CHECK(res.manifest.col_points == 5);
    CHECK(res.manifest.row_spacing == "log");
    CHECK(res.manifest.observable == "max_energy");
    CHECK(res.manifest.solver == "analytic");
}
