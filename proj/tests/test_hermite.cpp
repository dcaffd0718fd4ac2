#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "c1mesh/hermite.hpp"

#include <array>
#include <cmath>
#include <random>
#include <vector>

using namespace c1mesh;

namespace {

// independent monomial coefficient oracle (1, xi, xi^2, xi^3)
std::array<double, 4> ref_coeffs(int vertex, int order) {
    if (vertex == 0 && order == 0) return {0.5, -0.75, 0.0, 0.25};
    if (vertex == 0 && order == 1) return {0.25, -0.25, -0.25, 0.25};
    if (vertex == 1 && order == 0) return {0.5, 0.75, 0.0, -0.25};
    return {-0.25, -0.25, 0.25, 0.25};
}

double eval_monomial(const std::vector<double>& c, double x, int deriv = 0) {
    double acc = 0.0;
    for (int j = static_cast<int>(c.size()) - 1; j >= deriv; --j) {
        double f = 1.0;
        for (int k = 0; k < deriv; ++k) f *= j - k;
        acc = acc * x + f * c[static_cast<size_t>(j)];
    }
    return acc;
}

} // namespace

TEST_CASE("1d basis values at nodes") {
    CHECK(eval_hermite_1d({0, 0}, -1.0, 0) == doctest::Approx(1.0));
    CHECK(eval_hermite_1d({0, 1}, -1.0, 1) == doctest::Approx(1.0));
    CHECK(eval_hermite_1d({0, 1}, -1.0, 0) == doctest::Approx(0.0));
    CHECK(eval_hermite_1d({0, 0}, 0.0, 0) == doctest::Approx(0.5));
}

TEST_CASE("1d duality: node functionals on basis give identity") {
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    const double v = eval_hermite_1d({k, l}, i == 0 ? -1.0 : 1.0, j);
                    CHECK(std::abs(v - ((i == k && j == l) ? 1.0 : 0.0)) < 1e-14);
                }
}

TEST_CASE("basis matches the independent coefficient oracle") {
    for (int vertex = 0; vertex < 2; ++vertex)
        for (int order = 0; order < 2; ++order) {
            const auto c = ref_coeffs(vertex, order);
            for (double x : {-1.0, -0.4, 0.0, 0.7, 1.0})
                CHECK(eval_hermite_1d({vertex, order}, x) ==
                      doctest::Approx(eval_monomial({c[0], c[1], c[2], c[3]}, x)).epsilon(1e-14));
        }
}

TEST_CASE("node functionals on monomial input") {
    CHECK(node_functional_1d({1, 0}, {0, 0, 0, 1}) == doctest::Approx(1.0)); // p = xi^3 at +1
    CHECK(node_functional_1d({0, 1}, {0, 2, 0, 0}) == doctest::Approx(2.0)); // p = 2 xi, derivative
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l) {
                    const double v = node_functional_1d({i, j}, ref_coeffs(k, l));
                    CHECK(std::abs(v - ((i == k && j == l) ? 1.0 : 0.0)) < 1e-14);
                }
}

TEST_CASE("tensor basis values") {
    TensorIndex t;
    CHECK(eval_tensor_basis(t, {-1, -1, 0}, {0, 0, 0}, 2) == doctest::Approx(1.0));
    CHECK(eval_tensor_basis(t, {0, 0, 0}, {0, 0, 0}, 2) == doctest::Approx(0.25));
    TensorIndex t3;
    t3.kappa = {1, 1, 1};
    CHECK(eval_tensor_basis(t3, {-1, -1, -1}, {1, 1, 1}, 3) == doctest::Approx(1.0));
}

TEST_CASE("tensor duality is the identity matrix") {
    for (int dim : {2, 3}) {
        const int n = 1 << dim;
        for (int vi = 0; vi < n; ++vi) {
            for (int ki = 0; ki < n; ++ki) {
                TensorIndex basis;
                for (int a = 0; a < dim; ++a) {
                    basis.vertex[static_cast<size_t>(a)] = (vi >> a) & 1;
                    basis.kappa[static_cast<size_t>(a)] = (ki >> a) & 1;
                }
                for (int vj = 0; vj < n; ++vj) {
                    for (int kj = 0; kj < n; ++kj) {
                        Vec x{0, 0, 0};
                        std::array<int, 3> d{0, 0, 0};
                        for (int a = 0; a < dim; ++a) {
                            x[static_cast<size_t>(a)] = ((vj >> a) & 1) ? 1.0 : -1.0;
                            d[static_cast<size_t>(a)] = (kj >> a) & 1;
                        }
                        const double v = eval_tensor_basis(basis, x, d, dim);
                        CHECK(std::abs(v - ((vi == vj && ki == kj) ? 1.0 : 0.0)) < 1e-14);
                    }
                }
            }
        }
    }
}

TEST_CASE("edge bubble") {
    CHECK(eval_edge_bubble(0.0) == doctest::Approx(1.0));
    CHECK(eval_edge_bubble(1.0) == doctest::Approx(0.0));
    CHECK(eval_edge_bubble(1.0, 1) == doctest::Approx(0.0));
    CHECK(eval_edge_bubble(-1.0) == doctest::Approx(0.0));
    CHECK(eval_edge_bubble(-1.0, 1) == doctest::Approx(0.0));
    CHECK(eval_edge_bubble(0.5) == doctest::Approx(0.5625)); // (1 - 1/4)^2
    CHECK(eval_edge_bubble(0.0, 1) == doctest::Approx(0.0));
}

TEST_CASE("augmentation shape on the left edge") {
    const AugShape s = make_augmentation(AugKind::Edge2D, 0, 0, 1);
    CHECK(eval_augmentation(s, {-1, 0, 0}, {1, 0, 0}) == doctest::Approx(1.0));
    CHECK(eval_augmentation(s, {-1, 1, 0}, {1, 0, 0}) == doctest::Approx(0.0));
    CHECK(eval_augmentation(s, {-1, -1, 0}, {1, 0, 0}) == doctest::Approx(0.0));
    for (double y : {-1.0, -0.3, 0.2, 1.0}) {
        CHECK(eval_augmentation(s, {-1, y, 0}, {0, 0, 0}) == doctest::Approx(0.0));
        CHECK(eval_augmentation(s, {-1, y, 0}, {0, 1, 0}) == doctest::Approx(0.0));
    }
}

TEST_CASE("augmentation functions have vanishing Hermite node data") {
    std::vector<AugShape> shapes;
    shapes.push_back(make_augmentation(AugKind::Edge2D, 0, 0, 1));
    shapes.push_back(make_augmentation(AugKind::Edge2D, 1, 1, 0));
    shapes.push_back(make_augmentation(AugKind::Face3D, 0, 1, 1, 2));
    shapes.push_back(make_augmentation(AugKind::Edge3D, 1, 0, 2, 0, 1));
    for (const AugShape& s : shapes) {
        const int dim = s.dim;
        const int n = 1 << dim;
        for (int vi = 0; vi < n; ++vi) {
            for (int ki = 0; ki < n; ++ki) {
                Vec x{0, 0, 0};
                std::array<int, 3> d{0, 0, 0};
                for (int a = 0; a < dim; ++a) {
                    x[static_cast<size_t>(a)] = ((vi >> a) & 1) ? 1.0 : -1.0;
                    d[static_cast<size_t>(a)] = (ki >> a) & 1;
                }
                CHECK(std::abs(eval_augmentation(s, x, d)) < 1e-14);
            }
        }
    }
}

TEST_CASE("derivatives match central finite differences") {
    const double h = 1e-5;
    auto fd_check = [&](auto f, double x) {
        const double analytic = f(x, 1);
        const double fd = (f(x + h, 0) - f(x - h, 0)) / (2 * h);
        CHECK(std::abs(analytic - fd) < 1e-8);
    };
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const double x = uni(rng);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                fd_check([&](double t, int d) { return eval_hermite_1d({i, j}, t, d); }, x);
        fd_check([&](double t, int d) { return eval_edge_bubble(t, d); }, x);
    }
}

TEST_CASE("random cubic fields are reproduced by Hermite interpolation") {
    std::mt19937 rng(20240501);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (int dim : {2, 3}) {
        const int n = 1 << dim;
        const int nm = dim == 2 ? 16 : 64; // monomials x^p y^q (z^r), p,q,r < 4
        std::vector<double> coeff(static_cast<size_t>(nm));
        for (double& c : coeff) c = uni(rng);
        auto eval_poly = [&](const Vec& x, const std::array<int, 3>& d) {
            double acc = 0.0;
            for (int m = 0; m < nm; ++m) {
                double term = coeff[static_cast<size_t>(m)];
                int mm = m;
                for (int a = 0; a < dim; ++a) {
                    const int p = mm % 4;
                    mm /= 4;
                    std::vector<double> mono(static_cast<size_t>(p) + 1, 0.0);
                    mono.back() = 1.0;
                    term *= eval_monomial(mono, x[static_cast<size_t>(a)], d[static_cast<size_t>(a)]);
                }
                acc += term;
            }
            return acc;
        };
        std::vector<double> dofs(static_cast<size_t>(n * n));
        for (int vi = 0; vi < n; ++vi) {
            for (int ki = 0; ki < n; ++ki) {
                Vec x{0, 0, 0};
                std::array<int, 3> d{0, 0, 0};
                for (int a = 0; a < dim; ++a) {
                    x[static_cast<size_t>(a)] = ((vi >> a) & 1) ? 1.0 : -1.0;
                    d[static_cast<size_t>(a)] = (ki >> a) & 1;
                }
                dofs[static_cast<size_t>(vi * n + ki)] = eval_poly(x, d);
            }
        }
        double scale = 0.0;
        for (double c : dofs) scale = std::max(scale, std::abs(c));
        for (int pt = 0; pt < 50; ++pt) {
            Vec x{uni(rng), uni(rng), dim == 3 ? uni(rng) : 0.0};
            double interp = 0.0;
            for (int vi = 0; vi < n; ++vi) {
                for (int ki = 0; ki < n; ++ki) {
                    TensorIndex t;
                    for (int a = 0; a < dim; ++a) {
                        t.vertex[static_cast<size_t>(a)] = (vi >> a) & 1;
                        t.kappa[static_cast<size_t>(a)] = (ki >> a) & 1;
                    }
                    interp += dofs[static_cast<size_t>(vi * n + ki)] * eval_tensor_basis(t, x, {0, 0, 0}, dim);
                }
            }
            CHECK(std::abs(interp - eval_poly(x, {0, 0, 0})) < 1e-12 * std::max(scale, 1.0));
        }
    }
}
