#include "c1mesh/svg.hpp"

#include "c1mesh/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <vector>

namespace c1mesh {

namespace {

struct Pt {
    double x, y;
};

Pt project(const Vec& p, int dim) {
    if (dim == 2) return {p[0], p[1]};
    return {p[0] - 0.45 * p[2], p[1] - 0.25 * p[2]};
}

struct Polyline {
    std::vector<Pt> pts;
    bool boundary = false;
};

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", x);
    return buf;
}

} // namespace

std::string render_svg(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                       const SvgOptions& options) {
    const int dim = mesh.dim;
    const int segs = std::max(options.subdivisions, 1);
    const int lines = std::max(options.grid_lines, 1);
    std::vector<Polyline> polys;

    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellCoefficients cc = local_coefficients(field, mesh, conn, c);
        auto add_curve = [&](auto point_at, bool boundary) {
            Polyline pl;
            pl.boundary = boundary;
            for (int s = 0; s <= segs; ++s) {
                const double t = -1.0 + 2.0 * s / segs;
                pl.pts.push_back(project(eval_phi(cc, point_at(t)), dim));
            }
            polys.push_back(std::move(pl));
        };
        if (dim == 2) {
            for (int d = 0; d < 2; ++d) {
                for (int l = 0; l <= lines; ++l) {
                    const double fixed = -1.0 + 2.0 * l / lines;
                    const bool boundary = l == 0 || l == lines;
                    add_curve(
                        [&](double t) {
                            Vec x{0, 0, 0};
                            x[static_cast<size_t>(d)] = fixed;
                            x[static_cast<size_t>(1 - d)] = t;
                            return x;
                        },
                        boundary);
                }
            }
        } else {
            // wireframe: the 12 cell edges
            for (int axis = 0; axis < 3; ++axis) {
                for (int code = 0; code < 8; ++code) {
                    if (bit(code, axis)) continue;
                    add_curve(
                        [&](double t) {
                            Vec x{bit(code, 0) ? 1.0 : -1.0, bit(code, 1) ? 1.0 : -1.0, bit(code, 2) ? 1.0 : -1.0};
                            x[static_cast<size_t>(axis)] = t;
                            return x;
                        },
                        true);
                }
            }
        }
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const Polyline& pl : polys) {
        for (const Pt& p : pl.pts) {
            xmin = std::min(xmin, p.x);
            xmax = std::max(xmax, p.x);
            ymin = std::min(ymin, p.y);
            ymax = std::max(ymax, p.y);
        }
    }
    const double span_x = std::max(xmax - xmin, 1e-12);
    const double span_y = std::max(ymax - ymin, 1e-12);
    const double margin = 0.05 * std::max(span_x, span_y);
    const double scale = options.width / (span_x + 2 * margin);
    const double height = (span_y + 2 * margin) * scale;

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(options.width) << "\" height=\""
       << fmt(height) << "\" viewBox=\"0 0 " << fmt(options.width) << " " << fmt(height) << "\">\n";
    os << "<g fill=\"none\" stroke-linecap=\"round\">\n";
    for (const Polyline& pl : polys) {
        os << "<polyline stroke=\"" << (pl.boundary ? "#000000" : "#999999") << "\" stroke-width=\""
           << fmt(pl.boundary ? options.stroke_width : 0.6 * options.stroke_width) << "\" points=\"";
        for (size_t i = 0; i < pl.pts.size(); ++i) {
            const double px = (pl.pts[i].x - xmin + margin) * scale;
            const double py = height - (pl.pts[i].y - ymin + margin) * scale;
            os << (i ? " " : "") << fmt(px) << "," << fmt(py);
        }
        os << "\"/>\n";
    }
    os << "</g>\n</svg>\n";
    return os.str();
}

} // namespace c1mesh
