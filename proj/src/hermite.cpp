#include "c1mesh/hermite.hpp"

#include <stdexcept>

namespace c1mesh {

namespace {

// Monomial coefficients (1, xi, xi^2, xi^3) of the four cubics, times 4.
//   4 psi_0^0 =  xi^3 - 3 xi + 2      4 psi_0^1 = xi^3 - xi^2 - xi + 1
//   4 psi_1^0 = -xi^3 + 3 xi + 2      4 psi_1^1 = xi^3 + xi^2 - xi - 1
constexpr double kCubic[2][2][4] = {
    {{2.0, -3.0, 0.0, 1.0}, {1.0, -1.0, -1.0, 1.0}},
    {{2.0, 3.0, 0.0, -1.0}, {-1.0, -1.0, 1.0, 1.0}},
};

// (1 - xi^2)^2 = 1 - 2 xi^2 + xi^4
constexpr double kBubble[5] = {1.0, 0.0, -2.0, 0.0, 1.0};

double eval_poly_deriv(const double* c, int n, double xi, int deriv) {
    if (deriv < 0) throw std::invalid_argument("eval_poly_deriv: negative derivative count");
    if (deriv >= n) return 0.0;
    // Horner on the shifted coefficients c_j * j!/(j-deriv)!.
    double acc = 0.0;
    for (int j = n - 1; j >= deriv; --j) {
        double f = 1.0;
        for (int k = 0; k < deriv; ++k) f *= static_cast<double>(j - k);
        acc = acc * xi + f * c[j];
    }
    return acc;
}

} // namespace

double eval_hermite_1d(Basis1DIndex idx, double xi, int deriv) {
    return 0.25 * eval_poly_deriv(kCubic[idx.vertex][idx.order], 4, xi, deriv);
}

double node_functional_1d(Basis1DIndex idx, const std::array<double, 4>& coeffs) {
    const double at = idx.vertex == 0 ? -1.0 : 1.0;
    return eval_poly_deriv(coeffs.data(), 4, at, idx.order);
}

double eval_tensor_basis(const TensorIndex& t, const Vec& x, const std::array<int, 3>& deriv, int dim) {
    double prod = 1.0;
    for (int j = 0; j < dim; ++j) {
        prod *= eval_hermite_1d({t.vertex[j], t.kappa[j]}, x[j], deriv[j]);
    }
    return prod;
}

double eval_edge_bubble(double xi, int deriv) {
    return eval_poly_deriv(kBubble, 5, xi, deriv);
}

AugShape make_augmentation(AugKind kind, int normal_axis, int normal_side, int tangent_axis,
                           int second_axis, int second_side) {
    AugShape s;
    s.dim = kind == AugKind::Edge2D ? 2 : 3;
    if (normal_axis == tangent_axis || normal_axis < 0 || tangent_axis < 0)
        throw std::invalid_argument("make_augmentation: frame axes must be distinct");
    s.factors[normal_axis] = AugFactor{false, {normal_side, 1}};
    s.factors[tangent_axis] = AugFactor{true, {}};
    if (kind != AugKind::Edge2D) {
        if (second_axis < 0 || second_axis == normal_axis || second_axis == tangent_axis)
            throw std::invalid_argument("make_augmentation: frame axes must be distinct");
        if (kind == AugKind::Face3D) {
            s.factors[second_axis] = AugFactor{true, {}};
        } else {
            s.factors[second_axis] = AugFactor{false, {second_side, 0}};
        }
    }
    return s;
}

double eval_augmentation(const AugShape& shape, const Vec& x, const std::array<int, 3>& deriv) {
    double prod = 1.0;
    for (int j = 0; j < shape.dim; ++j) {
        const AugFactor& f = shape.factors[j];
        prod *= f.bubble ? eval_edge_bubble(x[j], deriv[j]) : eval_hermite_1d(f.hermite, x[j], deriv[j]);
    }
    return prod;
}

} // namespace c1mesh
