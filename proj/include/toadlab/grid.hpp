#pragma once

#include <cmath>
#include <vector>

#include "toadlab/errors.hpp"

namespace toadlab {

// Rectangular (x, theta) grid. x carries Neumann conditions at both ends;
// theta has Neumann at the trait floor and a homogeneous Dirichlet cut at
// theta_max (the tail there decays super-exponentially, see the pde module).
struct GridSpec {
    double x_min = -50.0, x_max = 200.0;
    double theta_min = 1.0, theta_max = 40.0;
    int nx = 500, ntheta = 128;

    double dx() const { return (x_max - x_min) / (nx - 1); }
    double dtheta() const { return (theta_max - theta_min) / (ntheta - 1); }
    double x(int i) const { return x_min + i * dx(); }
    double theta(int j) const { return theta_min + j * dtheta(); }

    void validate() const {
        if (nx < 8 || ntheta < 8) throw config_error("grid: need nx, ntheta >= 8");
        if (!(x_max > x_min)) throw config_error("grid: x_max must exceed x_min");
        if (!(theta_max > theta_min)) throw config_error("grid: theta_max must exceed theta_min");
    }
};

// Population density on a grid at one time. Stored theta-major: values[j*nx+i]
// so that the x tridiagonal sweeps run over contiguous memory.
struct Field2D {
    GridSpec grid;
    std::vector<double> values;
    double time = 0.0;

    Field2D() = default;
    explicit Field2D(const GridSpec& g, double t = 0.0)
        : grid(g), values(static_cast<std::size_t>(g.nx) * g.ntheta, 0.0), time(t) {}

    double& at(int i, int j) { return values[static_cast<std::size_t>(j) * grid.nx + i]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * grid.nx + i]; }

    bool finite() const {
        for (double v : values)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

// rho(x) = integral of n over theta at one time.
struct Density1D {
    GridSpec grid; // x part used
    std::vector<double> values;
    double time = 0.0;
};

} // namespace toadlab
