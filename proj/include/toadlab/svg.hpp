#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "toadlab/errors.hpp"
#include "toadlab/grid.hpp"

namespace toadlab {

// Minimal SVG emission for batch runs: phase-space heatmaps of n(x, theta)
// and overlaid rho(x) profiles. No display dependencies; files are meant to
// be opened after the run.

namespace detail {

inline std::string rgb(double r, double g, double b) {
    auto ch = [](double v) {
        const int x = static_cast<int>(std::round(255.0 * std::clamp(v, 0.0, 1.0)));
        return x;
    };
    return "rgb(" + std::to_string(ch(r)) + "," + std::to_string(ch(g)) + "," +
           std::to_string(ch(b)) + ")";
}

// Dark-blue -> teal -> green -> yellow ramp on [0, 1].
inline std::string colormap(double v) {
    v = std::clamp(v, 0.0, 1.0);
    struct Stop { double p, r, g, b; };
    static const Stop stops[] = {{0.00, 0.267, 0.005, 0.329},
                                 {0.25, 0.229, 0.322, 0.546},
                                 {0.50, 0.128, 0.567, 0.551},
                                 {0.75, 0.369, 0.789, 0.383},
                                 {1.00, 0.993, 0.906, 0.144}};
    for (int i = 0; i < 4; ++i) {
        if (v <= stops[i + 1].p) {
            const double f = (v - stops[i].p) / (stops[i + 1].p - stops[i].p);
            return rgb(stops[i].r + f * (stops[i + 1].r - stops[i].r),
                       stops[i].g + f * (stops[i + 1].g - stops[i].g),
                       stops[i].b + f * (stops[i + 1].b - stops[i].b));
        }
    }
    return rgb(stops[4].r, stops[4].g, stops[4].b);
}

} // namespace detail

// Phase-space heatmap of the field at one time; cells are max-pooled down to
// at most max_cells per axis.
inline void write_heatmap_svg(const std::string& path, const Field2D& f,
                              int max_cells_x = 240, int max_cells_t = 160) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file: " + path);
    const auto& g = f.grid;
    const int cx = std::min(max_cells_x, g.nx);
    const int ct = std::min(max_cells_t, g.ntheta);
    const int width = 720, height = 480, margin = 50;
    const double cw = static_cast<double>(width - 2 * margin) / cx;
    const double chh = static_cast<double>(height - 2 * margin) / ct;

    double vmax = 0.0;
    for (double v : f.values) vmax = std::max(vmax, v);
    if (vmax <= 0.0) vmax = 1.0;

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    for (int a = 0; a < cx; ++a) {
        const int i0 = a * g.nx / cx, i1 = (a + 1) * g.nx / cx;
        for (int b = 0; b < ct; ++b) {
            const int j0 = b * g.ntheta / ct, j1 = (b + 1) * g.ntheta / ct;
            double v = 0.0;
            for (int i = i0; i < i1; ++i)
                for (int j = j0; j < j1; ++j) v = std::max(v, f.at(i, j));
            const double px = margin + a * cw;
            const double py = height - margin - (b + 1) * chh; // theta upward
            out << "<rect x='" << px << "' y='" << py << "' width='" << cw + 0.5
                << "' height='" << chh + 0.5 << "' fill='" << detail::colormap(v / vmax)
                << "'/>\n";
        }
    }
    out << "<text x='" << margin << "' y='" << margin - 12 << "' font-size='14'>n(x, theta), t = "
        << f.time << ", max = " << vmax << "</text>\n";
    out << "<text x='" << margin << "' y='" << height - 12 << "' font-size='12'>x in ["
        << g.x_min << ", " << g.x_max << "], theta in [" << g.theta_min << ", " << g.theta_max
        << "] (theta up)</text>\n</svg>\n";
}

// Overlay of rho profiles at several times.
inline void write_rho_overlay_svg(const std::string& path,
                                  const std::vector<Density1D>& profiles) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open output file: " + path);
    if (profiles.empty()) throw config_error("rho overlay: no profiles");
    const int width = 720, height = 420, margin = 50;
    double rho_max = 0.0;
    for (const auto& p : profiles)
        for (double v : p.values) rho_max = std::max(rho_max, v);
    if (rho_max <= 0.0) rho_max = 1.0;
    const auto& g = profiles.front().grid;

    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
    const int n = static_cast<int>(profiles.size());
    for (int k = 0; k < n; ++k) {
        const auto& p = profiles[k];
        out << "<polyline fill='none' stroke='" << detail::colormap((k + 1.0) / n)
            << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < p.values.size(); ++i) {
            const double px =
                margin + (width - 2.0 * margin) * i / (p.values.size() - 1);
            const double py =
                height - margin - (height - 2.0 * margin) * (p.values[i] / rho_max);
            out << px << "," << py << " ";
        }
        out << "'/>\n";
        out << "<text x='" << width - margin - 60 << "' y='" << margin + 16 * (k + 1)
            << "' font-size='12' fill='" << detail::colormap((k + 1.0) / n) << "'>t = "
            << p.time << "</text>\n";
    }
    out << "<text x='" << margin << "' y='" << margin - 10
        << "' font-size='14'>rho(x) over time, max = " << rho_max << "</text>\n";
    out << "<text x='" << margin << "' y='" << height - 12 << "' font-size='12'>x in ["
        << g.x_min << ", " << g.x_max << "]</text>\n</svg>\n";
}

} // namespace toadlab
