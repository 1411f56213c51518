#ifndef QFLOW_SVG_HPP
#define QFLOW_SVG_HPP

// Overlay of reconstructed boundaries at snapshot times. Circle bodies
// draw the curve X = u z + u' z_perp; axisymmetric bodies draw the meridian
// profile (rho, z) mirrored across the axis.

#include <qflow/convex_body.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>
#include <vector>

namespace qflow {

inline void write_svg(std::ostream& os, const std::vector<SupportField>& bodies, const std::vector<double>& times)
{
    std::vector<std::vector<std::array<double, 2>>> curves;
    double lo_x = INFINITY, hi_x = -INFINITY, lo_y = INFINITY, hi_y = -INFINITY;
    for (const auto& b : bodies) {
        auto pts = reconstruct(b);
        if (b.backend() == Backend::axisymmetric) {
            // rho >= 0 half, then the mirror image back up the other side
            const std::size_t half = pts.size();
            for (std::size_t j = half; j-- > 0;)
                pts.push_back({-pts[j][0], pts[j][1]});
        }
        for (const auto& p : pts) {
            lo_x = std::min(lo_x, p[0]);
            hi_x = std::max(hi_x, p[0]);
            lo_y = std::min(lo_y, p[1]);
            hi_y = std::max(hi_y, p[1]);
        }
        curves.push_back(std::move(pts));
    }
    const double size = 480.0, pad = 20.0;
    const double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    const double scale = (size - 2 * pad) / span;
    const double cx = 0.5 * (lo_x + hi_x), cy = 0.5 * (lo_y + hi_y);
    char buf[128];

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size + 20
       << "\" viewBox=\"0 0 " << size << ' ' << size + 20 << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        // early snapshots blue, late ones red
        const double f = curves.size() > 1 ? static_cast<double>(c) / (curves.size() - 1) : 1.0;
        std::snprintf(buf, sizeof buf, "rgb(%d,40,%d)", static_cast<int>(40 + 200 * f), static_cast<int>(240 - 200 * f));
        os << "<polygon fill=\"none\" stroke-width=\"1\" stroke=\"" << buf << "\" points=\"";
        for (std::size_t j = 0; j < curves[c].size(); ++j) {
            const double x = size / 2 + (curves[c][j][0] - cx) * scale;
            const double y = size / 2 - (curves[c][j][1] - cy) * scale;
            std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", j ? " " : "", x, y);
            os << buf;
        }
        os << "\"/>\n";
    }
    if (!times.empty()) {
        std::snprintf(buf, sizeof buf, "t = %.4g .. %.4g, %zu snapshots", times.front(), times.back(), times.size());
        os << "<text x=\"" << pad << "\" y=\"" << size + 12 << "\" font-family=\"monospace\" font-size=\"12\">" << buf
           << "</text>\n";
    }
    os << "</svg>\n";
}

inline std::string svg_name(Backend b) { return b == Backend::circle ? "snapshots.svg" : "meridian.svg"; }

} // namespace qflow

#endif
