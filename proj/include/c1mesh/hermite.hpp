#pragma once

#include "c1mesh/types.hpp"

#include <array>

namespace c1mesh {

// Cubic Hermite basis on [-1,1], dual to the node functionals
//   N_0^0(p)=p(-1), N_0^1(p)=p'(-1), N_1^0(p)=p(1), N_1^1(p)=p'(1).
// Index: vertex in {0,1} (interval end -1 or +1), order in {0,1} (value or
// derivative degree of freedom).
struct Basis1DIndex {
    int vertex = 0;
    int order = 0;
};

// Tensor-product index: binary corner code and binary derivative pattern,
// one bit per axis (bit j set = +1 end / differentiated in axis j).
struct TensorIndex {
    std::array<int, 3> vertex{0, 0, 0};
    std::array<int, 3> kappa{0, 0, 0};
};

inline int kappa_order(const std::array<int, 3>& kappa, int dim) {
    int o = 0;
    for (int j = 0; j < dim; ++j) o += kappa[j] ? 1 : 0;
    return o;
}

// deriv-th derivative of the cubic basis polynomial at xi. Polynomials are
// evaluated from fixed monomial tables; defined for all real xi.
double eval_hermite_1d(Basis1DIndex idx, double xi, int deriv = 0);

// Node functional applied to a cubic given by monomial coefficients
// p(xi) = c0 + c1 xi + c2 xi^2 + c3 xi^3.
double node_functional_1d(Basis1DIndex idx, const std::array<double, 4>& coeffs);

// Product of per-axis 1D evaluations with per-axis derivative counts.
double eval_tensor_basis(const TensorIndex& t, const Vec& x, const std::array<int, 3>& deriv, int dim);

// Quartic edge bubble (1-xi^2)^2: vanishing value and derivative at +-1,
// value 1 at 0. deriv up to 4.
double eval_edge_bubble(double xi, int deriv = 0);

// Augmentation shape functions. Each is a tensor product of per-axis
// factors: a cubic Hermite basis function or the edge bubble. The paper's
// shapes are: one derivative cubic x one bubble (2D edge), one derivative
// cubic x two bubbles (3D face), derivative cubic x bubble x value cubic
// (3D edge). Derived fine-side shapes use the same family with other cubic
// factors, so the factor table is general.
enum class AugKind { Edge2D, Edge3D, Face3D };

struct AugFactor {
    bool bubble = false;
    Basis1DIndex hermite{}; // used when !bubble
};

struct AugShape {
    int dim = 2;
    std::array<AugFactor, 3> factors{};
};

// Canonical shapes from the paper. normal_axis carries psi_side^1; the
// bubble sits on tangent_axis. For Edge3D, second_axis carries the value
// cubic psi_{second_side}^0; for Face3D it carries the second bubble.
AugShape make_augmentation(AugKind kind, int normal_axis, int normal_side, int tangent_axis,
                           int second_axis = -1, int second_side = 0);

double eval_augmentation(const AugShape& shape, const Vec& x, const std::array<int, 3>& deriv);

} // namespace c1mesh
