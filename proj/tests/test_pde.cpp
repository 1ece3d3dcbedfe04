#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "toadlab/pde.hpp"

using namespace toadlab;

namespace {

double trapezoid_mass(const Field2D& f) {
    const auto& g = f.grid;
    double total = 0.0;
    for (int j = 0; j < g.ntheta; ++j) {
        const double wj = (j == 0 || j == g.ntheta - 1) ? 0.5 : 1.0;
        for (int i = 0; i < g.nx; ++i) {
            const double wi = (i == 0 || i == g.nx - 1) ? 0.5 : 1.0;
            total += wi * wj * f.at(i, j);
        }
    }
    return total * g.dx() * g.dtheta();
}

SimConfig small_config(TradeoffSpec spec) {
    SimConfig cfg;
    cfg.tradeoff = std::move(spec);
    cfg.grid.x_min = -20.0;
    cfg.grid.x_max = 40.0;
    cfg.grid.theta_min = cfg.tradeoff.theta_min;
    cfg.grid.theta_max = cfg.tradeoff.theta_min + 14.0;
    cfg.grid.nx = 241;
    cfg.grid.ntheta = 113;
    cfg.dt = 0.02;
    cfg.t_final = 6.0;
    cfg.snapshot_every = 100;
    return cfg;
}

} // namespace

TEST_CASE("init_field: box mass, positivity, compact support") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(0.5, 1.0, 1.0));
    const Field2D f = init_field(cfg);
    // Direct quadrature of the indicator on the same grid (the smoothing
    // half-step conserves the trapezoid mass; the collar cut loses a sliver).
    Field2D raw(cfg.grid);
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        for (int i = 0; i < cfg.grid.nx; ++i)
            if (cfg.grid.x(i) <= cfg.C0 && cfg.grid.theta(j) <= cfg.grid.theta_min + cfg.C0)
                raw.at(i, j) = cfg.C0;
    const double expected = trapezoid_mass(raw);
    const double mass = trapezoid_mass(f);
    CHECK(mass == doctest::Approx(expected).epsilon(0.02));
    // continuum value C0 * (C0 - x_min) * C0 up to edge half-cells
    CHECK(mass == doctest::Approx(cfg.C0 * (cfg.C0 - cfg.grid.x_min) * cfg.C0).epsilon(0.10));
    CHECK(mass > 0.0);
    // cut to zero beyond the smoothing collar
    const double th_cut = cfg.grid.theta_min + cfg.C0 + 3.0 * cfg.grid.dtheta();
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        if (cfg.grid.theta(j) > th_cut)
            for (int i = 0; i < cfg.grid.nx; ++i) CHECK(f.at(i, j) == 0.0);
    // initial bound n0 <= C0
    for (double v : f.values) {
        CHECK(v >= 0.0);
        CHECK(v <= cfg.C0 * (1.0 + 1e-12));
    }
}

TEST_CASE("init_field rejects a box outside the grid") {
    SimConfig cfg = small_config(TradeoffSpec::zero(1.0));
    cfg.C0 = 100.0;
    CHECK_THROWS_AS(init_field(cfg), config_error);
}

TEST_CASE("rho: zero field, indicator column, separable field") {
    SimConfig cfg = small_config(TradeoffSpec::zero(1.0));
    Field2D f(cfg.grid);
    const Density1D zero = rho(f);
    for (double v : zero.values) CHECK(v == 0.0);

    // n = 1 for theta in [floor, floor+1]
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        for (int i = 0; i < cfg.grid.nx; ++i)
            f.at(i, j) = (cfg.grid.theta(j) <= cfg.grid.theta_min + 1.0) ? 1.0 : 0.0;
    const Density1D one = rho(f);
    for (double v : one.values) CHECK(std::abs(v - 1.0) <= 2.0 * cfg.grid.dtheta());

    // separable n = f(x) g(theta)
    auto fx = [&](double x) { return 1.0 + 0.5 * std::sin(0.3 * x); };
    auto gt = [&](double th) { return std::exp(-0.7 * (th - 1.0)); };
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        for (int i = 0; i < cfg.grid.nx; ++i)
            f.at(i, j) = fx(cfg.grid.x(i)) * gt(cfg.grid.theta(j));
    const double integral_g =
        oracle::integrate(gt, cfg.grid.theta_min, cfg.grid.theta_max, 1e-12);
    const Density1D sep = rho(f);
    for (int i = 0; i < cfg.grid.nx; i += 17)
        CHECK(sep.values[i] ==
              doctest::Approx(fx(cfg.grid.x(i)) * integral_g).epsilon(5e-4));
}

TEST_CASE("step: zero is a fixed point") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(1.0, 1.0, 1.0));
    Field2D f(cfg.grid);
    const Field2D g = step(f, cfg);
    for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("step: x-independent linearized run matches the 1D oracle") {
    SimConfig cfg;
    cfg.tradeoff = TradeoffSpec::power_law(0.5, 1.0, 1.0);
    cfg.grid.x_min = 0.0;
    cfg.grid.x_max = 1.0;
    cfg.grid.nx = 17;
    cfg.grid.theta_min = 1.0;
    cfg.grid.theta_max = 11.0;
    cfg.grid.ntheta = 201;
    cfg.dt = 0.01;
    cfg.linearized = true;
    cfg.t_final = 0.5;

    Simulator sim(cfg);
    auto bump = [](double th) { return std::exp(-0.25 * (th - 3.0) * (th - 3.0)); };
    Field2D& f = sim.state();
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        for (int i = 0; i < cfg.grid.nx; ++i)
            f.at(i, j) = (j == cfg.grid.ntheta - 1) ? 0.0 : bump(cfg.grid.theta(j));
    const int steps = 50;
    for (int s = 0; s < steps; ++s) sim.advance();

    std::vector<double> u0(2001);
    for (int j = 0; j < 2001; ++j) u0[j] = bump(1.0 + 10.0 * j / 2000.0);
    u0.back() = 0.0;
    const auto ref = oracle::heat_growth_1d(
        u0, [&](double th) { return eval_m(cfg.tradeoff, th); }, 1.0, 10.0, 0.5, 500);

    double linf = 0.0;
    for (int j = 0; j < cfg.grid.ntheta; ++j) {
        const double mine = sim.state().at(8, j);
        const double theirs = ref[j * 10];
        linf = std::max(linf, std::abs(mine - theirs));
    }
    CHECK(linf <= 1e-4);
}

TEST_CASE("step: ground-state data grows like exp(gamma) under the linearized flow") {
    SimConfig cfg;
    cfg.tradeoff = TradeoffSpec::power_law(0.5, 1.0, 1.0);
    cfg.grid.x_min = 0.0;
    cfg.grid.x_max = 1.0;
    cfg.grid.nx = 17;
    cfg.grid.theta_min = 1.0;
    cfg.grid.theta_max = 13.0;
    cfg.grid.ntheta = 193;
    cfg.dt = 0.01;
    cfg.linearized = true;

    const EigenPair q = principal_eigenpair(
        [&](double th) { return 1.0 - eval_m(cfg.tradeoff, th); }, 1.0, 12.0, 193);
    Simulator sim(cfg);
    const double eps = 1e-6;
    for (int j = 0; j < cfg.grid.ntheta; ++j)
        for (int i = 0; i < cfg.grid.nx; ++i)
            sim.state().at(i, j) = eps * q.eigenfunction[j];
    for (int s = 0; s < 100; ++s) sim.advance();
    double sup0 = 0.0, sup1 = 0.0;
    for (int j = 0; j < cfg.grid.ntheta; ++j) {
        sup0 = std::max(sup0, eps * q.eigenfunction[j]);
        sup1 = std::max(sup1, sim.state().at(8, j));
    }
    const double growth = sup1 / sup0;
    CHECK(growth == doctest::Approx(std::exp(q.eigenvalue)).epsilon(0.02));
}

TEST_CASE("monitors: positivity, bounded rho, finite tail ratio") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(0.5, 1.0, 1.0));
    const RunResult res = run(cfg);
    REQUIRE(!res.monitors.empty());
    double sup_rho_after5 = 0.0, rho_at5 = 0.0;
    for (const auto& m : res.monitors) {
        CHECK(m.min_n >= 0.0);
        CHECK(std::isfinite(m.tail_ratio));
        if (m.time >= 4.99 && rho_at5 == 0.0) rho_at5 = m.sup_rho;
        if (m.time >= 4.99) sup_rho_after5 = std::max(sup_rho_after5, m.sup_rho);
    }
    CHECK(rho_at5 > 0.0);
    CHECK(sup_rho_after5 <= 4.0 * rho_at5);
}

TEST_CASE("extinction: negative gamma_infinity forces decay") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(1.5, 1.0, 1.0));
    cfg.t_final = 20.0;
    cfg.grid.x_min = -20.0;
    cfg.grid.x_max = 20.0;
    cfg.grid.nx = 161;
    const RunResult res = run(cfg);
    double prev = -1.0;
    bool monotone = true;
    double last_sup = 0.0;
    for (const auto& m : res.monitors) {
        if (m.time >= 5.0) {
            if (prev >= 0.0 && m.sup_n > prev * (1.0 + 1e-9)) monotone = false;
            prev = m.sup_n;
        }
        last_sup = m.sup_n;
    }
    CHECK(monotone);
    CHECK(last_sup < 0.05);
}

TEST_CASE("nonlinear run is dominated by the linearized run") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(0.5, 1.0, 1.0));
    cfg.t_final = 5.0;
    cfg.snapshot_every = 50;
    SimConfig lin = cfg;
    lin.linearized = true;
    const RunResult a = run(cfg);
    const RunResult b = run(lin);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (std::size_t s = 0; s < a.snapshots.size(); ++s) {
        const auto& na = a.snapshots[s].values;
        const auto& nb = b.snapshots[s].values;
        for (std::size_t k = 0; k < na.size(); ++k) CHECK(na[k] <= nb[k] + 1e-8);
    }
}

TEST_CASE("linearized super-solution ratio to Q e^{gamma t} does not grow") {
    SimConfig cfg;
    cfg.tradeoff = TradeoffSpec::power_law(0.5, 1.0, 1.0);
    cfg.grid.x_min = -10.0;
    cfg.grid.x_max = 10.0;
    cfg.grid.nx = 81;
    cfg.grid.theta_min = 1.0;
    cfg.grid.theta_max = 13.0;
    cfg.grid.ntheta = 193;
    cfg.dt = 0.01;
    cfg.t_final = 2.0;
    cfg.linearized = true;
    cfg.snapshot_every = 50;

    const EigenPair q = principal_eigenpair(
        [&](double th) { return 1.0 - eval_m(cfg.tradeoff, th); }, 1.0, 12.0, 193);
    const RunResult res = run(cfg);
    double prev_ratio = -1.0;
    for (const auto& snap : res.snapshots) {
        double ratio = 0.0;
        for (int j = 0; j + 1 < cfg.grid.ntheta; ++j) {
            if (q.eigenfunction[j] < 1e-9) continue;
            for (int i = 0; i < cfg.grid.nx; ++i)
                ratio = std::max(ratio, snap.at(i, j) / (q.eigenfunction[j] *
                                                         std::exp(q.eigenvalue * snap.time)));
        }
        if (prev_ratio >= 0.0) CHECK(ratio <= prev_ratio * 1.02);
        prev_ratio = ratio;
    }
}

TEST_CASE("pure diffusion conserves mass away from the Dirichlet cut") {
    SimConfig cfg;
    cfg.tradeoff = TradeoffSpec::zero(1.0);
    cfg.grid.x_min = -10.0;
    cfg.grid.x_max = 10.0;
    cfg.grid.nx = 161;
    cfg.grid.theta_min = 1.0;
    cfg.grid.theta_max = 18.0;
    cfg.grid.ntheta = 137;
    cfg.dt = 0.02;
    cfg.t_final = 2.0;
    cfg.reaction_enabled = false;
    Simulator sim(cfg);
    const double m0 = trapezoid_mass(sim.state());
    for (int s = 0; s < 100; ++s) sim.advance();
    const double m1 = trapezoid_mass(sim.state());
    CHECK(std::abs(m1 - m0) / m0 <= 1e-8 * cfg.t_final);
}

TEST_CASE("grid convergence: halving the mesh moves the front by at most 2 dx") {
    SimConfig coarse;
    coarse.tradeoff = TradeoffSpec::power_law(0.5, 1.0, 1.0);
    coarse.grid.x_min = -20.0;
    coarse.grid.x_max = 60.0;
    coarse.grid.nx = 321;
    coarse.grid.theta_min = 1.0;
    coarse.grid.theta_max = 15.0;
    coarse.grid.ntheta = 113;
    coarse.dt = 0.05;
    coarse.t_final = 12.0;
    coarse.snapshot_every = 1000;

    SimConfig fine = coarse;
    fine.grid.nx = 641;
    fine.grid.ntheta = 225;
    fine.dt = 0.025;

    const RunResult rc = run(coarse);
    const RunResult rf = run(fine);
    REQUIRE(rc.fronts.x_front.back().has_value());
    REQUIRE(rf.fronts.x_front.back().has_value());
    CHECK(std::abs(*rc.fronts.x_front.back() - *rf.fronts.x_front.back()) <=
          2.0 * coarse.grid.dx());
}

TEST_CASE("front reaching the boundary sets the invalid flag") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(0.5, 1.0, 1.0));
    cfg.grid.x_min = -10.0;
    cfg.grid.x_max = 16.0;
    cfg.grid.nx = 105;
    cfg.t_final = 14.0;
    const RunResult res = run(cfg);
    CHECK(res.boundary_hit);
    CHECK(res.valid_until < cfg.t_final);
}

TEST_CASE("config validation rejects bad time steps") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(0.5, 1.0, 1.0));
    cfg.dt = 1.0; // violates both bounds on this grid
    CHECK_THROWS_AS(cfg.validate(), config_error);
}

TEST_CASE("tail-scale warning fires exactly when theta_max is too small") {
    SimConfig cfg = small_config(TradeoffSpec::power_law(1.0, 1.0 / 3.0, 1.0));
    cfg.t_final = 40.0;
    CHECK(grid_tail_warning(cfg).has_value());
    PhiProfile prof(cfg.tradeoff);
    cfg.grid.theta_max = cfg.grid.theta_min + 4.0 * prof.eta1(cfg.t_final) + 1.0;
    CHECK(!grid_tail_warning(cfg).has_value());
}
