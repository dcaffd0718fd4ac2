#pragma once

#include "c1mesh/types.hpp"

#include <map>
#include <string>
#include <vector>

namespace c1mesh {

// Vertex/connectivity description of a quadrilateral or hexahedral mesh.
// Cell vertices are in lexicographic reference order: local index i has
// binary code b (bit j set = +1 end of axis j), i.e. in 2D
// v0=(-1,-1), v1=(1,-1), v2=(-1,1), v3=(1,1).
struct Mesh {
    int dim = 2;
    std::vector<Vec> vertices;
    std::vector<std::vector<int>> cells;
    std::vector<int> levels;  // per-cell refinement level, >= 0
    std::vector<int> parents; // family id shared by siblings, -1 for roots
    // Boundary vertices with a tangent-plane basis (dim-1 unit vectors).
    std::map<int, std::vector<Vec>> boundary;

    int verts_per_cell() const { return 1 << dim; }
    int n_vertices() const { return static_cast<int>(vertices.size()); }
    int n_cells() const { return static_cast<int>(cells.size()); }

    int corner(int cell, int code) const { return cells[static_cast<size_t>(cell)][static_cast<size_t>(code)]; }
};

// Parse and validate a mesh file (UTF-8 JSON, see README for the grammar).
// Throws ParseError naming the offending field or entity.
Mesh parse_mesh(const std::string& text);

// Serialize back to the input format (used for self-contained mapping files).
std::string write_mesh_json(const Mesh& mesh);

} // namespace c1mesh
