#pragma once

#include "c1mesh/field.hpp"

#include <vector>

namespace c1mesh {

// Per-vertex, per-slot edge data recorded in algorithm step 2: forward and
// backward direction vectors (pointing away from / toward the vertex along
// the slot direction) and their weights h_E.
struct SlotEdgeData {
    bool has_forward = false, has_backward = false;
    Vec forward{0, 0, 0}, backward{0, 0, 0}; // backward = w_b - v (points away from v)
    double h_forward = 0, h_backward = 0;
    double len_forward = 0, len_backward = 0; // recorded norms (after anisotropic normalization)
};

using EdgeVectorTable = std::vector<std::array<SlotEdgeData, 3>>;

// Step 2: connecting vectors and scaling factors per non-hanging vertex and
// slot. Hanging vertices are skipped; edges through hanging midpoints run to
// the far coarse-compatible endpoint. With level_scaling h_E = 2^-level,
// otherwise h_E is the physical edge length. In anisotropic mode the vectors
// are divided by the per-direction cell-line scale.
EdgeVectorTable record_edge_vectors(const Mesh& mesh, const Connectivity& conn, const BuildOptions& opts,
                                    const std::vector<Vec>& aniso_scale);

// Step 3 weighted mean for one slot; both contributions expressed as forward
// directions. Throws BuildError when the slot has no edge at all.
Vec average_derivatives(const SlotEdgeData& slot);

// Orthogonal projection onto the tangent plane spanned by unit vectors.
// Throws BuildError when the projection collapses (norm < 1e-3 x input).
Vec project_boundary_tangent(const std::vector<Vec>& tangents, const Vec& v);

// Fig. 1 construction: rotate the bisector line pair of the two directions
// by pi/4 and assign each output to the nearest input, preserving norms.
// dim == 3 uses the orthogonal polar factor of the direction matrix.
std::vector<Vec> orthogonalize_vertex(const std::vector<Vec>& derivs);

// Norm rules of section 3.1 applied to one slot's recorded edge data.
double scale_derivative_norm(const SlotEdgeData& slot, NormRule rule);

// Per-cell anisotropic scale vectors h_K (facet-orthogonal lengths averaged
// per axis, shared along cell lines). Throws BuildError on conflicting
// propagation (> 1e-9 relative) or degenerate facets.
std::vector<Vec> compute_aniso_scales(const Mesh& mesh, const Connectivity& conn);

// Steps 1-5. Requires check_regularity to pass.
MappingField build_mapping(const Mesh& mesh, const Connectivity& conn, const BuildOptions& opts);

// Exposed for tests: step 4 and step 5 applied to a field whose non-hanging
// DoFs are final.
void compute_augmentation_coeffs(MappingField& field, const Mesh& mesh, const Connectivity& conn);
void constrain_hanging_vertices(MappingField& field, const Mesh& mesh, const Connectivity& conn);

} // namespace c1mesh
