#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qbgeom/model.hpp"
#include "qbgeom/observables.hpp"
#include "qbgeom/solver_analytic.hpp"
#include "qbgeom/solver_numeric.hpp"
#include "qbgeom/sweep.hpp"

namespace qbgeom {

/// Deterministic, platform-independent generator for the seeded parameter
/// ensembles (splitmix64).
struct SplitMix64 {
    std::uint64_t state = 0;

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
};

struct ValidationOptions {
    std::uint64_t seed = 42;
    std::size_t oracle_sets = 20;   ///< random parameter sets for the solver cross-check
    double oracle_t_max = 2500.0;
    double oracle_dt = 0.005;
    unsigned workers = 1;
    bool inject_delta_sign_error = false; ///< test-harness hook: flips the channel detunings
};

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationReport {
    std::uint64_t seed = 0;
    bool injected = false;
    std::vector<PropertyResult> properties;

    bool all_pass() const {
        for (const auto& p : properties)
            if (!p.pass) return false;
        return true;
    }
};

namespace detail {

inline std::array<ChannelSpec, 2> channels_maybe_flipped(const ModelParams& p, bool flip) {
    auto ch = collective_channels(p);
    if (flip) {
        ch[0].detuning = -ch[0].detuning;
        ch[1].detuning = -ch[1].detuning;
    }
    return ch;
}

inline std::string sci(double v) {
    std::ostringstream os;
    os.precision(3);
    os << std::scientific << v;
    return os.str();
}

/// Closed-form value of int_0^t e^{-lambda(t-u)} b(u) du for a mode
/// decomposition of b; used to evaluate the channel-equation residual
/// without any quadrature.
inline Complex kernel_integral(const ChannelModes& m, double lambda, double t) {
    const Complex elam = std::exp(-lambda * t);
    if (m.degenerate) {
        const Complex w = m.s1 + lambda;
        if (std::abs(w) < 1e-12 * std::max(1.0, lambda))
            return elam * (m.a1 * t + 0.5 * m.a2 * t * t);
        const Complex ew = std::exp(w * t);
        return elam * (m.a1 * (ew - 1.0) / w + m.a2 * (t * ew / w - (ew - 1.0) / (w * w)));
    }
    Complex acc{0.0, 0.0};
    const std::array<Complex, 2> ss{m.s1, m.s2};
    const std::array<Complex, 2> aa{m.a1, m.a2};
    for (int j = 0; j < 2; ++j) {
        const Complex w = ss[j] + lambda;
        if (std::abs(w) < 1e-12 * std::max(1.0, lambda))
            acc += aa[j] * t * elam;
        else
            acc += aa[j] * (std::exp(ss[j] * t) - elam) / w;
    }
    return acc;
}

/// Residual of bdot + i*delta*b + K int e^{-lambda(t-u)} b du for modes that
/// were propagated (possibly with a mutated spec) against the true channel
/// equation.
inline double channel_residual(const ChannelModes& modes, const ChannelSpec& truth,
                               const ModelParams& p, double t) {
    Complex b, db;
    eval_modes(modes, t, b, db);
    const double kernel_w = 0.5 * truth.weight * p.gamma * p.lambda;
    const Complex res = db + Complex{0.0, truth.detuning} * b +
                        kernel_w * kernel_integral(modes, p.lambda, t);
    return std::abs(res);
}

} // namespace detail

/// Runs the invariant suite over a seeded random parameter ensemble.
/// Deterministic: the same options produce an identical report.
inline ValidationReport run_validation(const ValidationOptions& opt) {
    ValidationReport report;
    report.seed = opt.seed;
    report.injected = opt.inject_delta_sign_error;
    const bool flip = opt.inject_delta_sign_error;

    // ---- ensemble pass: solver cross-check + norm safety -----------------
    {
        SplitMix64 rng{opt.seed};
        double worst_dev = 0.0, worst_norm = 0.0, worst_bath = 0.0;
        for (std::size_t set = 0; set < opt.oracle_sets; ++set) {
            ModelParams p;
            p.lambda = rng.uniform(0.02, 2.0);
            p.zeta = rng.uniform(0.0, 2.0);
            p.l_over_lambda0 = rng.uniform(0.0, 1.0);
            p.t_max = opt.oracle_t_max;
            p.n_steps = static_cast<std::size_t>(std::llround(opt.oracle_t_max / opt.oracle_dt)) + 1;
            const auto ch = detail::channels_maybe_flipped(p, flip);

            const auto an = propagate_analytic_with_channels(p, ch, {1.0, 0.0}, {0.0, 0.0});
            IntegratorConfig cfg;
            cfg.scheme = Scheme::augmented_rk4;
            cfg.dt = opt.oracle_dt;
            const auto num = propagate_numeric_with_channels(p, ch, {1.0, 0.0}, {0.0, 0.0}, cfg);

            for (std::size_t k = 0; k < an.c2.size(); ++k) {
                worst_dev = std::max(worst_dev, std::abs(an.c2[k] - num.c2[k]));
                const double norm_an = std::norm(an.c1[k]) + std::norm(an.c2[k]);
                const double norm_num = std::norm(num.c1[k]) + std::norm(num.c2[k]);
                worst_norm = std::max({worst_norm, norm_an, norm_num});
                worst_bath = std::min({worst_bath, 1.0 - norm_an, 1.0 - norm_num});
            }
        }
        report.properties.push_back({"oracle-equivalence", worst_dev < 1e-6,
            "max|c2_analytic - c2_numeric| = " + detail::sci(worst_dev) + " over " +
            std::to_string(opt.oracle_sets) + " sets (tol 1e-06, rk4 dt=" +
            detail::sci(opt.oracle_dt) + ", t<=" + detail::sci(opt.oracle_t_max) + ")"});
        report.properties.push_back({"norm-safety", worst_norm <= 1.0 + 1e-9 && worst_bath >= -1e-9,
            "max |c1|^2+|c2|^2 - 1 = " + detail::sci(worst_norm - 1.0) +
            ", min bath population = " + detail::sci(worst_bath) + " (tol 1e-09)"});
    }

    // ---- analytic residual (catches detuning-sign mutations) -------------
    {
        SplitMix64 rng{opt.seed ^ 0xABCDEF12345678ull};
        double worst = 0.0;
        for (int set = 0; set < 24; ++set) {
            ModelParams p;
            p.lambda = rng.uniform(0.02, 2.0);
            p.zeta = rng.uniform(0.05, 2.0);
            p.l_over_lambda0 = rng.uniform(0.0, 1.0);
            const auto truth = collective_channels(p);
            const auto used = detail::channels_maybe_flipped(p, flip);
            constexpr double inv_sqrt2 = 0.70710678118654752440;
            for (int c = 0; c < 2; ++c) {
                const auto modes = detail::channel_modes(inv_sqrt2, channel_roots(used[c], p), p);
                const double t_hi = std::min(100.0 / p.lambda, 1000.0);
                for (int k = 1; k <= 16; ++k) {
                    const double t = t_hi * static_cast<double>(k) / 16.0;
                    worst = std::max(worst, detail::channel_residual(modes, truth[c], p, t));
                }
            }
        }
        report.properties.push_back({"analytic-residual", worst < 1e-9,
            "max channel-equation residual = " + detail::sci(worst) + " (tol 1e-09)"});
    }

    // ---- exact channel-swap symmetry --------------------------------------
    {
        double worst = 0.0;
        for (double zeta : {0.0, 1.0}) {
            for (double l : {0.0, 0.07, 0.19}) {
                ModelParams pa;
                pa.zeta = zeta;
                pa.lambda = 0.04;
                pa.t_max = 500.0;
                pa.n_steps = 5001;
                pa.l_over_lambda0 = l;
                ModelParams pb = pa;
                pb.l_over_lambda0 = 0.25 - l; // theta -> pi/2 - theta
                const auto ta = propagate_analytic_with_channels(pa, detail::channels_maybe_flipped(pa, flip), {1, 0}, {0, 0});
                const auto tb = propagate_analytic_with_channels(pb, detail::channels_maybe_flipped(pb, flip), {1, 0}, {0, 0});
                for (std::size_t k = 0; k < ta.c2.size(); ++k)
                    worst = std::max(worst, std::abs(std::norm(ta.c2[k]) - std::norm(tb.c2[k])));
            }
        }
        report.properties.push_back({"channel-swap", worst < 1e-12,
            "max population difference theta vs pi/2-theta = " + detail::sci(worst) + " (tol 1e-12)"});
    }

    // ---- dark-channel conservation ----------------------------------------
    {
        ModelParams p;
        p.l_over_lambda0 = 0.0; // theta = 0: antisymmetric channel dark
        p.zeta = 1.0;
        p.lambda = 0.04;
        p.t_max = 1000.0;
        p.n_steps = 20001;
        const auto traj = propagate_analytic_with_channels(p, detail::channels_maybe_flipped(p, flip), {1, 0}, {0, 0});
        constexpr double inv_sqrt2 = 0.70710678118654752440;
        double worst = 0.0;
        const double b0 = std::abs((traj.c1[0] - traj.c2[0]) * inv_sqrt2);
        for (std::size_t k = 0; k < traj.c1.size(); ++k)
            worst = std::max(worst, std::abs(std::abs((traj.c1[k] - traj.c2[k]) * inv_sqrt2) - b0));
        report.properties.push_back({"dark-channel-conservation", worst < 1e-12,
            "max | |b-| - |b-(0)| | at theta=0: " + detail::sci(worst) + " (tol 1e-12)"});
    }

    // ---- trajectory periodicity in l/lambda0 ------------------------------
    {
        double worst = 0.0;
        for (double l : {0.1, 0.32}) {
            ModelParams pa;
            pa.zeta = 1.0;
            pa.lambda = 0.04;
            pa.t_max = 500.0;
            pa.n_steps = 5001;
            pa.l_over_lambda0 = l;
            ModelParams pb = pa;
            pb.l_over_lambda0 = l + 0.5;
            const auto ta = propagate_analytic_with_channels(pa, detail::channels_maybe_flipped(pa, flip), {1, 0}, {0, 0});
            const auto tb = propagate_analytic_with_channels(pb, detail::channels_maybe_flipped(pb, flip), {1, 0}, {0, 0});
            for (std::size_t k = 0; k < ta.c2.size(); ++k)
                worst = std::max({worst, std::abs(ta.c2[k] - tb.c2[k]), std::abs(ta.c1[k] - tb.c1[k])});
        }
        report.properties.push_back({"trajectory-periodicity", worst < 1e-12,
            "max amplitude difference l vs l+1/2: " + detail::sci(worst) + " (tol 1e-12)"});
    }

    // ---- ergotropy threshold law over a time-geometry map -----------------
    {
        ModelParams p; // figure-preset parameters
        GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 41, Spacing::linear};
        GridSpec tg{Axis::time, 0.0, 250.0, 401, Spacing::linear};
        const auto energy_map = sweep_time_geometry(p, lg, tg, Observable::energy, opt.workers);
        const auto erg_map = sweep_time_geometry(p, lg, tg, Observable::ergotropy, opt.workers);
        bool ok = true;
        double worst = 0.0;
        for (std::size_t i = 0; i < energy_map.values.size(); ++i) {
            const double e = energy_map.values[i], w = erg_map.values[i];
            if (e <= 0.5 * p.omega0) {
                if (w != 0.0) ok = false;
            } else {
                worst = std::max(worst, std::abs(w - (2.0 * e - p.omega0)));
                if (w <= 0.0) ok = false;
            }
        }
        ok = ok && worst < 1e-12 * p.omega0;
        report.properties.push_back({"threshold-law", ok,
            "W = 0 exactly iff p <= 1/2; max |W - (2E - omega0)| above threshold = " +
            detail::sci(worst) + " (tol 1e-12*omega0)"});
    }

    // ---- monotonic memory degradation --------------------------------------
    {
        ModelParams p;
        GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 21, Spacing::linear};
        GridSpec wg{Axis::lambda_over_gamma, 0.02, 1.0, 21, Spacing::log};
        const auto emap = sweep_geometry_width(p, lg, wg, Observable::max_energy, {}, opt.workers);
        const auto wmap = sweep_geometry_width(p, lg, wg, Observable::max_ergotropy, {}, opt.workers);
        double worst = 0.0;
        for (std::size_t c = 0; c < emap.cols(); ++c)
            for (std::size_t r = 1; r < emap.rows(); ++r) {
                worst = std::max(worst, emap.at(r, c) - emap.at(r - 1, c));
                worst = std::max(worst, wmap.at(r, c) - wmap.at(r - 1, c));
            }
        report.properties.push_back({"memory-monotonicity", worst <= 1e-3 * p.omega0,
            "max increase along lambda/gamma = " + detail::sci(worst) + " (tol 1e-3*omega0 = " +
            detail::sci(1e-3 * p.omega0) + ")"});
    }

    // ---- geometry periodicity of maps --------------------------------------
    {
        ModelParams p;
        GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 21, Spacing::linear}; // pairs (k, k+10)
        GridSpec wg{Axis::lambda_over_gamma, 0.03, 0.3, 5, Spacing::log};
        const auto m = sweep_geometry_width(p, lg, wg, Observable::max_energy, {}, opt.workers);
        double worst = 0.0;
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c + 10 < m.cols(); ++c)
                worst = std::max(worst, std::abs(m.at(r, c) - m.at(r, c + 10)));
        report.properties.push_back({"geometry-periodicity", worst < 1e-12 * std::max(1.0, p.omega0),
            "max |column(l) - column(l+1/2)| = " + detail::sci(worst) + " (tol 1e-12*omega0)"});
    }

    // ---- power-energy consistency ------------------------------------------
    {
        ModelParams p;
        p.l_over_lambda0 = 0.15;
        p.t_max = 25.0;
        p.n_steps = 20001; // the pinned consistency grid
        const auto traj = propagate_analytic_with_channels(p, detail::channels_maybe_flipped(p, flip), {1, 0}, {0, 0});
        const auto s = observables_from(traj, p.omega0);
        const double dt = s.t_grid[1] - s.t_grid[0];
        double acc = 0.0, worst = 0.0;
        for (std::size_t k = 1; k < s.t_grid.size(); ++k) {
            acc += 0.5 * dt * (s.power[k] + s.power[k - 1]);
            worst = std::max(worst, std::abs(acc - (s.energy[k] - s.energy[0])));
        }
        // centered finite differences of E converge to P at 2nd order
        auto fd_err = [&](std::size_t n) {
            ModelParams q = p;
            q.n_steps = n;
            const auto tr = propagate_analytic_with_channels(q, detail::channels_maybe_flipped(q, flip), {1, 0}, {0, 0});
            const auto ss = observables_from(tr, q.omega0);
            const double h = ss.t_grid[1] - ss.t_grid[0];
            double e = 0.0;
            for (std::size_t k = 1; k + 1 < ss.t_grid.size(); ++k)
                e = std::max(e, std::abs((ss.energy[k + 1] - ss.energy[k - 1]) / (2.0 * h) - ss.power[k]));
            return e;
        };
        const double e1 = fd_err(2001), e2 = fd_err(4001);
        const double order = std::log2(e1 / e2);
        const bool ok = worst < 1e-6 * p.omega0 && std::abs(order - 2.0) < 0.3;
        report.properties.push_back({"power-energy-consistency", ok,
            "max |trapz(P) - dE| = " + detail::sci(worst) + " (tol 1e-6*omega0), FD order = " +
            detail::sci(order) + " (2 +- 0.3)"});
    }

    // ---- ergotropy oracle ----------------------------------------------------
    {
        SplitMix64 rng{opt.seed ^ 0x5555AAAA5555AAAAull};
        double worst_qubit = 0.0, worst_threelevel = 0.0;
        for (int i = 0; i < 1000; ++i) {
            const double pop = rng.uniform();
            const double general = ergotropy_general({{1.0 - pop, pop}, {0.0, 1.0}});
            worst_qubit = std::max(worst_qubit, std::abs(general - ergotropy_qubit(pop, 1.0)));
        }
        for (int i = 0; i < 100; ++i) {
            std::array<double, 3> pop{rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
            const double sum = pop[0] + pop[1] + pop[2];
            for (auto& x : pop) x /= sum;
            std::array<double, 3> en{rng.uniform(0.0, 1.0), rng.uniform(1.0, 2.0), rng.uniform(2.0, 4.0)};
            const double general = ergotropy_general({{pop.begin(), pop.end()}, {en.begin(), en.end()}});
            // brute force over all population-to-level assignments
            std::array<int, 3> idx{0, 1, 2};
            double best = 1e300;
            const double active = pop[0] * en[0] + pop[1] * en[1] + pop[2] * en[2];
            std::sort(idx.begin(), idx.end());
            do {
                best = std::min(best, pop[idx[0]] * en[0] + pop[idx[1]] * en[1] + pop[idx[2]] * en[2]);
            } while (std::next_permutation(idx.begin(), idx.end()));
            worst_threelevel = std::max(worst_threelevel, std::abs(general - (active - best)));
        }
        report.properties.push_back({"ergotropy-oracle",
            worst_qubit < 1e-12 && worst_threelevel < 1e-12,
            "qubit vs general max dev = " + detail::sci(worst_qubit) +
            ", 3-level vs brute force max dev = " + detail::sci(worst_threelevel) + " (tol 1e-12)"});
    }

    // ---- dark-channel long-time limit -----------------------------------------
    {
        ModelParams p;
        p.l_over_lambda0 = 0.0;
        p.zeta = 0.0;
        p.lambda = 0.04;
        p.t_max = 2000.0;
        p.n_steps = 2001;
        const auto traj = propagate_analytic_with_channels(p, detail::channels_maybe_flipped(p, flip), {1, 0}, {0, 0});
        const double pop = std::norm(traj.c2.back());
        const double err = std::abs(pop - 0.25);
        const double w = ergotropy_qubit(std::min(pop, 1.0), p.omega0);
        report.properties.push_back({"dark-channel-limit", err < 1e-3 && w == 0.0,
            "|p(2000) - 1/4| = " + detail::sci(err) + " (tol 1e-3), long-time W = " + detail::sci(w)});
    }

    // ---- sweep determinism under parallelism -----------------------------------
    {
        ModelParams p;
        GridSpec lg{Axis::l_over_lambda0, 0.0, 1.0, 16, Spacing::linear};
        GridSpec wg{Axis::lambda_over_gamma, 0.04, 0.5, 6, Spacing::log};
        TimeSampling ts{50.0, std::size_t{2001}};
        const auto a = sweep_geometry_width(p, lg, wg, Observable::max_energy, ts, 1);
        const auto b = sweep_geometry_width(p, lg, wg, Observable::max_energy, ts, 4);
        const auto c = sweep_geometry_width(p, lg, wg, Observable::max_energy, ts, 8);
        bool identical = a.values.size() == b.values.size() && a.values.size() == c.values.size();
        for (std::size_t i = 0; identical && i < a.values.size(); ++i)
            identical = a.values[i] == b.values[i] && a.values[i] == c.values[i];
        report.properties.push_back({"sweep-determinism", identical,
            identical ? "worker counts 1/4/8 produce bit-identical matrices"
                      : "matrices differ across worker counts"});
    }

    return report;
}

inline std::string report_text(const ValidationReport& r) {
    std::string out;
    out += "validation seed=" + std::to_string(r.seed);
    if (r.injected) out += " [delta-sign error injected]";
    out += "\n";
    for (const auto& p : r.properties)
        out += std::string(p.pass ? "[PASS] " : "[FAIL] ") + p.name + ": " + p.detail + "\n";
    out += r.all_pass() ? "all properties passed\n" : "VALIDATION FAILED\n";
    return out;
}

inline nlohmann::ordered_json report_json(const ValidationReport& r) {
    nlohmann::ordered_json j;
    j["seed"] = r.seed;
    j["injected_delta_sign_error"] = r.injected;
    j["all_pass"] = r.all_pass();
    auto& arr = j["properties"] = nlohmann::ordered_json::array();
    for (const auto& p : r.properties) {
        nlohmann::ordered_json e;
        e["name"] = p.name;
        e["pass"] = p.pass;
        e["detail"] = p.detail;
        arr.push_back(std::move(e));
    }
    return j;
}

} // namespace qbgeom
