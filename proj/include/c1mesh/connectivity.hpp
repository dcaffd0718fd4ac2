#pragma once

#include "c1mesh/mesh.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace c1mesh {

inline int bit(int code, int axis) { return (code >> axis) & 1; }

enum class VertexClass { Interior, Boundary, Hanging };

// Signed axis permutation between two reference frames.
struct AxisMap {
    std::array<int, 3> axis{0, 1, 2};
    std::array<int, 3> sign{1, 1, 1};
};

AxisMap compose(const AxisMap& first, const AxisMap& then); // then after first
AxisMap inverse_map(const AxisMap& m, int dim);
int axis_map_det(const AxisMap& m, int dim);

// Affine embedding of one cell's reference coordinates into another's:
//   y[axes.axis[a]] = scale * axes.sign[a] * x[a] + offset[axes.axis[a]].
// scale is 1 for same-level neighbors and 1/2 for fine-to-coarse maps.
struct CellEmbedding {
    AxisMap axes;
    Vec offset{0, 0, 0};
    double scale = 1.0;

    Vec apply(const Vec& x, int dim) const {
        Vec y{0, 0, 0};
        for (int a = 0; a < dim; ++a)
            y[static_cast<size_t>(axes.axis[a])] =
                scale * axes.sign[a] * x[static_cast<size_t>(a)] + offset[static_cast<size_t>(axes.axis[a])];
        return y;
    }
};

struct FacetRef {
    int cell = -1;
    int axis = 0;
    int side = 0;
};

struct NeighborRecord {
    FacetRef a, b; // a.cell < b.cell
    CellEmbedding a_to_b;
};

struct HangingPiece {
    FacetRef fine;
    int coarse_corner = -1;        // the coarse facet corner this piece contains
    CellEmbedding fine_to_coarse;  // scale 1/2
};

struct HangingInterface {
    FacetRef coarse;
    std::vector<HangingPiece> pieces;   // 2^{dim-1}, in coarse corner order
    int center_vertex = -1;             // 2D edge midpoint / 3D face center
    std::vector<int> edge_mid_vertices; // 3D only; aligned with coarse facet edges
};

struct HangingVertexInfo {
    int vertex = -1;
    int host_cell = -1;
    Vec host_ref{0, 0, 0};                // location inside the host reference cell
    std::array<int, 2> host_edge{-1, -1}; // coarse endpoints bisected; {-1,-1} for face centers
    Vec chord_point{0, 0, 0};             // d-linear placement (host entity corner average)
};

struct Edge {
    int a = 0, b = 0; // a < b
    int level = 0;
    double length = 0.0;
    std::vector<int> cells; // cells owning the whole edge
};

struct SlotEdge {
    int forward_vertex = -1, backward_vertex = -1;
    int forward_edge = -1, backward_edge = -1;
};

// Per-vertex atlas frame: each incident cell's local axes expressed in the
// slot frame anchored at the lowest-index incident cell.
struct VertexStar {
    std::vector<int> cells;
    std::vector<int> corner;      // code of the vertex in each cell
    std::vector<AxisMap> to_slot; // per incident cell
    bool frame_ok = true;
    std::string issue;

    int find_cell(int cell) const;
};

struct FacetInfo {
    enum Kind { Boundary, Conforming, CoarseSide, FineSide } kind = Boundary;
    int index = -1; // into neighbors / hanging_interfaces
};

struct Connectivity {
    int dim = 2;
    std::vector<Edge> edges; // sorted by (a,b)
    std::map<std::pair<int, int>, int> edge_index;
    std::vector<VertexClass> vclass;
    std::vector<int> hanging_index; // per vertex, -1 or index into hangings
    std::vector<HangingVertexInfo> hangings;
    std::vector<NeighborRecord> neighbors;
    std::vector<HangingInterface> hanging_interfaces;
    std::vector<std::vector<FacetInfo>> facet_info; // per cell, entry axis*2+side
    std::vector<VertexStar> stars;
    std::vector<std::array<SlotEdge, 3>> slots; // meaningful for non-hanging vertices

    int edge_id(int a, int b) const;
    bool is_hanging(int v) const { return vclass[static_cast<size_t>(v)] == VertexClass::Hanging; }
};

// Facet corner codes of the reference cell, ascending tangent-bit order.
std::vector<int> facet_corner_codes(int dim, int axis, int side);

Connectivity build_connectivity(const Mesh& mesh);

struct RegularityEntry {
    int vertex;
    int incident_cells;
    std::string reason;
};
struct RegularityReport {
    std::vector<RegularityEntry> entries;
    bool admissible() const { return entries.empty(); }
};
RegularityReport check_regularity(const Mesh& mesh, const Connectivity& conn);

struct OppositePairs {
    struct Pair {
        int backward_edge;
        int forward_edge;
    };
    std::vector<Pair> pairs;
    std::vector<int> unpaired;
};
OppositePairs opposite_edge_pairs(const Connectivity& conn, int vertex);

} // namespace c1mesh
