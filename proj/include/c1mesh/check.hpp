#pragma once

#include "c1mesh/eval.hpp"

#include <string>
#include <vector>

namespace c1mesh {

struct InterfaceEntry {
    std::vector<int> cells; // conforming: {a,b}; hanging: {coarse, fine...}
    bool hanging = false;
    double max_phi_jump = 0;
    double max_grad_jump = 0;
    double scale = 1; // max derivative norm at the facet corners
};

struct OrthoEntry {
    int vertex = -1;
    bool interior = false;
    double residual = 0; // max pairwise |cos| of the derivative slots
};

struct MidpointOrthoEntry {
    std::string entity; // "facet cell axis side" or "edge a b"
    double residual = 0;
};

struct JacobianEntry {
    int cell = -1;
    double min_det = 0;
    double max_det = 0;
};

struct CheckReport {
    double tol = 1e-10;
    int samples = 0;
    bool orthogonality_checked = false;
    std::vector<InterfaceEntry> interfaces;
    std::vector<OrthoEntry> vertex_orthogonality;
    std::vector<MidpointOrthoEntry> midpoint_orthogonality;
    std::vector<JacobianEntry> jacobians;

    bool c1_pass() const;
    bool orthogonality_pass() const; // interior vertices and augmented midpoints
    bool jacobian_pass() const;
    bool pass() const;
};

// 1D sample set: facet vertices, midpoint and Chebyshev-like interior points.
std::vector<double> sample_points_1d(int n);

// Compare Phi and the physical derivative frame across the shared facet of
// two same-level cells; throws if the cells do not share one.
InterfaceEntry check_c1_interface(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                  int cell_a, int cell_b, int n, double tol);

// Compare across a one-irregular interface with the parameter-halving chain
// rule applied on the fine side.
InterfaceEntry check_hanging_interface(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                       const HangingInterface& hi, int n, double tol);

std::vector<OrthoEntry> check_orthogonality(const MappingField& field, const Mesh& mesh, const Connectivity& conn);

std::vector<JacobianEntry> check_jacobians(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                           int n);

CheckReport run_checks(const MappingField& field, const Mesh& mesh, const Connectivity& conn, int n, double tol);

} // namespace c1mesh
