#pragma once

#include "c1mesh/connectivity.hpp"
#include "c1mesh/hermite.hpp"

#include <map>
#include <vector>

namespace c1mesh {

enum class NormRule { AverageEdge, HalfDistance };

struct BuildOptions {
    bool orthogonalize = false;
    NormRule norm_rule = NormRule::AverageEdge;
    bool anisotropic = false;
    bool level_scaling = true;
};

// Per-vertex mapping degrees of freedom. derivs[s] is the order-1 vector of
// slot s of the vertex atlas frame (see Connectivity::stars); higher maps a
// slot bitmask (order >= 2) to its vector and is only populated at hanging
// vertices.
struct VertexDoFs {
    Vec position{0, 0, 0};
    std::array<Vec, 3> derivs{Vec{0, 0, 0}, Vec{0, 0, 0}, Vec{0, 0, 0}};
    std::map<int, Vec> higher;
};

// 3D edge augmentation: two corrections at the midpoint of a coarse edge,
// one per transverse direction, stored in the frame of the lowest incident
// cell and replicated (orientation-adapted) into every cell sharing the
// whole edge.
struct EdgeAug {
    int cell = -1;      // canonical incident cell
    int edge_axis = -1; // axis of the edge in that cell
    int end_code = 0;   // corner code of the edge's lower-id endpoint
    std::array<int, 2> u_axis{-1, -1}; // transverse axes, ascending
    std::array<Vec, 2> coeff{Vec{0, 0, 0}, Vec{0, 0, 0}};
};

struct MappingField {
    int dim = 2;
    BuildOptions options;
    std::vector<VertexDoFs> dofs;
    std::vector<double> edge_h;    // per Connectivity edge, the recorded h_E
    std::map<int, Vec> face_augs;  // hanging interface index -> coefficient
    std::map<int, EdgeAug> edge_augs; // 3D: conn edge id -> record
    std::vector<Vec> aniso_scale;  // per cell per local axis; (1,1,1) unless anisotropic
};

// Scale converting a stored (global) derivative of the given order into the
// cell-local expansion coefficient: (1/2)^o from the [-1,1] reference size,
// times 2^{-level o} under level scaling, times the per-axis anisotropic
// factors.
inline double axis_scale(const MappingField& f, int cell_level, int cell, int axis) {
    double s = 0.5;
    if (f.options.anisotropic) s *= f.aniso_scale[static_cast<size_t>(cell)][static_cast<size_t>(axis)];
    else if (f.options.level_scaling) s *= std::ldexp(1.0, -cell_level);
    return s;
}

} // namespace c1mesh
