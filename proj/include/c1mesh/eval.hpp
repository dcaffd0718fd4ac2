#pragma once

#include "c1mesh/field.hpp"

#include <array>
#include <vector>

namespace c1mesh {

struct AugFunction {
    AugShape shape;
    Vec coeff{0, 0, 0};
};

// Cell-local expansion table: alpha[corner code][kappa bitmask], with all
// orientation signs, 2^{-level o} and anisotropic scalings applied, plus the
// cell's augmentation functions. Ready for direct evaluation.
struct CellCoefficients {
    int dim = 2;
    int cell = -1;
    int level = 0;
    std::array<std::array<Vec, 8>, 8> alpha{};
    std::vector<AugFunction> augs;
};

// Hanging-vertex storage strategies: read the precomputed per-vertex data,
// or derive the constrained coefficients from the coarse neighbor on the fly.
enum class HangingStrategy { Stored, OnTheFly };

CellCoefficients local_coefficients(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                    int cell, HangingStrategy strategy = HangingStrategy::Stored);

// Derivative of the mapping; deriv counts per reference axis.
Vec eval_phi_deriv(const CellCoefficients& coeffs, const Vec& x, const std::array<int, 3>& deriv);
inline Vec eval_phi(const CellCoefficients& coeffs, const Vec& x) { return eval_phi_deriv(coeffs, x, {0, 0, 0}); }

struct JacobianSample {
    Vec point{0, 0, 0};
    std::array<Vec, 3> cols{Vec{0, 0, 0}, Vec{0, 0, 0}, Vec{0, 0, 0}}; // column j = d Phi / d x_j
    double det = 0.0;
};

double det_cols(const std::array<Vec, 3>& cols, int dim);

JacobianSample eval_jacobian(const CellCoefficients& coeffs, const Vec& x);

Vec transform_tangent(const CellCoefficients& coeffs, const Vec& x, const Vec& t_ref);
Vec transform_normal(const CellCoefficients& coeffs, const Vec& x, const Vec& n_ref);

// Minimum Jacobian determinant over the n^dim tensor grid including the
// boundary; a negative value flags a self-intersecting cell.
double min_jacobian(const CellCoefficients& coeffs, int n);

// Augmentation functions a cell contributes, in its local frame (coarse-side
// shapes plus pulled-back fine-side shapes). Used by local_coefficients and
// by step 4/5 of the builder.
std::vector<AugFunction> cell_aug_functions(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                            int cell);

// Half-scale embedding of a fine cell into the host cell of one of its
// hanging corners, anchored through a shared corner's atlas frame.
CellEmbedding embedding_into_host(const Mesh& mesh, const Connectivity& conn, int fine_cell,
                                  const HangingVertexInfo& h, int hv_code_in_fine);

// Cell-local expansion coefficients a fine cell must carry at a hanging
// corner so that its traces coincide with the host's: chain rule through the
// embedding applied to the host's derivatives at the hanging point.
std::array<Vec, 8> hanging_corner_alphas(const CellCoefficients& host, const CellEmbedding& emb, int hv_code,
                                         int dim);

} // namespace c1mesh
