#pragma once

#include "c1mesh/field.hpp"

#include <string>

namespace c1mesh {

struct SvgOptions {
    int grid_lines = 4;      // iso-curves per direction and cell (plus edges)
    int subdivisions = 16;   // polyline segments per curve
    double stroke_width = 1.0;
    double width = 800.0;    // output pixel width
};

// Mapped sub-grid of every cell as polylines. 2D meshes draw the full grid;
// 3D meshes draw an oblique-projected wireframe of the cell edges.
std::string render_svg(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                       const SvgOptions& options);

} // namespace c1mesh
