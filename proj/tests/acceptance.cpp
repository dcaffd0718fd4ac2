// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Runs on the shipped example meshes (directory given as argv[1]).

#include "c1mesh/builder.hpp"
#include "c1mesh/check.hpp"
#include "c1mesh/eval.hpp"
#include "c1mesh/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

using namespace c1mesh;

namespace {

std::string g_data = "data";
int g_failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] %d. %s (%s)\n", pass ? "PASS" : "FAIL", criterion, name.c_str(), detail.c_str());
    if (!pass) ++g_failures;
}

std::string slurp(const std::string& name) {
    std::ifstream in(g_data + "/" + name, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + name);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Mesh load(const std::string& name) { return parse_mesh(slurp(name)); }

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

// 1. Basis duality to 1e-14 in d = 2 and 3.
void criterion_duality() {
    double worst = 0.0;
    for (int dim : {2, 3}) {
        const int n = 1 << dim;
        for (int vi = 0; vi < n; ++vi)
            for (int ki = 0; ki < n; ++ki)
                for (int vj = 0; vj < n; ++vj)
                    for (int kj = 0; kj < n; ++kj) {
                        TensorIndex basis;
                        Vec x{0, 0, 0};
                        std::array<int, 3> d{0, 0, 0};
                        for (int a = 0; a < dim; ++a) {
                            basis.vertex[static_cast<size_t>(a)] = (vi >> a) & 1;
                            basis.kappa[static_cast<size_t>(a)] = (ki >> a) & 1;
                            x[static_cast<size_t>(a)] = ((vj >> a) & 1) ? 1.0 : -1.0;
                            d[static_cast<size_t>(a)] = (kj >> a) & 1;
                        }
                        const double v = eval_tensor_basis(basis, x, d, dim);
                        const double expect = (vi == vj && ki == kj) ? 1.0 : 0.0;
                        worst = std::max(worst, std::abs(v - expect));
                    }
    }
    report(1, "basis duality, d=2,3", worst < 1e-14, "max deviation " + fmt(worst));
}

// 2. Random d-cubic vector fields reproduced to 1e-12 relative.
void criterion_reproduction() {
    std::mt19937 rng(318);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int dim : {2, 3}) {
        const int n = 1 << dim;
        const int nm = dim == 2 ? 16 : 64;
        for (int comp = 0; comp < dim; ++comp) {
            std::vector<double> coeff(static_cast<size_t>(nm));
            for (double& c : coeff) c = uni(rng);
            auto poly = [&](const Vec& x, const std::array<int, 3>& d) {
                double acc = 0.0;
                for (int mono = 0; mono < nm; ++mono) {
                    double term = coeff[static_cast<size_t>(mono)];
                    int mm = mono;
                    for (int a = 0; a < dim; ++a) {
                        const int p = mm % 4;
                        mm /= 4;
                        double f = 0.0;
                        if (p >= d[static_cast<size_t>(a)]) {
                            f = 1.0;
                            for (int k = 0; k < d[static_cast<size_t>(a)]; ++k) f *= p - k;
                            f *= std::pow(x[static_cast<size_t>(a)], p - d[static_cast<size_t>(a)]);
                        }
                        term *= f;
                    }
                    acc += term;
                }
                return acc;
            };
            std::vector<double> dofs(static_cast<size_t>(n * n));
            double scale = 1.0;
            for (int vi = 0; vi < n; ++vi)
                for (int ki = 0; ki < n; ++ki) {
                    Vec x{0, 0, 0};
                    std::array<int, 3> d{0, 0, 0};
                    for (int a = 0; a < dim; ++a) {
                        x[static_cast<size_t>(a)] = ((vi >> a) & 1) ? 1.0 : -1.0;
                        d[static_cast<size_t>(a)] = (ki >> a) & 1;
                    }
                    dofs[static_cast<size_t>(vi * n + ki)] = poly(x, d);
                    scale = std::max(scale, std::abs(dofs[static_cast<size_t>(vi * n + ki)]));
                }
            for (int pt = 0; pt < 50; ++pt) {
                const Vec x{uni(rng), uni(rng), dim == 3 ? uni(rng) : 0.0};
                double interp = 0.0;
                for (int vi = 0; vi < n; ++vi)
                    for (int ki = 0; ki < n; ++ki) {
                        TensorIndex t;
                        for (int a = 0; a < dim; ++a) {
                            t.vertex[static_cast<size_t>(a)] = (vi >> a) & 1;
                            t.kappa[static_cast<size_t>(a)] = (ki >> a) & 1;
                        }
                        interp += dofs[static_cast<size_t>(vi * n + ki)] * eval_tensor_basis(t, x, {0, 0, 0}, dim);
                    }
                worst = std::max(worst, std::abs(interp - poly(x, {0, 0, 0})) / scale);
            }
        }
    }
    report(2, "cubic reproduction at 50 random points", worst < 1e-12, "max relative error " + fmt(worst));
}

// 3. C1 conformity on the trapezoidal ring, 100 samples per interface, < 1 s.
void criterion_ring() {
    const auto t0 = std::chrono::steady_clock::now();
    const Mesh m = load("ring.json");
    const Connectivity conn = build_connectivity(m);
    const MappingField f = build_mapping(m, conn, {});
    const CheckReport rep = run_checks(f, m, conn, 100, 1e-10);
    double rel = 0.0;
    for (const InterfaceEntry& e : rep.interfaces)
        rel = std::max(rel, std::max(e.max_phi_jump, e.max_grad_jump) / e.scale);
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(3, "ring C1 conformity, 100 samples/interface", rel < 1e-10 && sec < 1.0,
           "max relative jump " + fmt(rel) + ", " + fmt(sec) + " s");
}

// 4. Hanging-node conformity on one coarse + two fine cells; orthogonality at
// the augmented midpoint under --orthogonalize.
void criterion_hanging() {
    const Mesh m = load("hanging_min.json");
    const Connectivity conn = build_connectivity(m);
    const MappingField plain = build_mapping(m, conn, {});
    const CheckReport rep = run_checks(plain, m, conn, 20, 1e-10);
    double rel = 0.0;
    for (const InterfaceEntry& e : rep.interfaces)
        rel = std::max(rel, std::max(e.max_phi_jump, e.max_grad_jump) / e.scale);

    BuildOptions opts;
    opts.orthogonalize = true;
    const MappingField ortho = build_mapping(m, conn, opts);
    const CheckReport repo = run_checks(ortho, m, conn, 20, 1e-10);
    double rel_o = 0.0;
    for (const InterfaceEntry& e : repo.interfaces)
        rel_o = std::max(rel_o, std::max(e.max_phi_jump, e.max_grad_jump) / e.scale);
    // |dPhi/dx . dPhi/dy| at the augmented edge midpoint
    const HangingInterface& hi = conn.hanging_interfaces[0];
    const CellCoefficients cc = local_coefficients(ortho, m, conn, hi.coarse.cell);
    Vec mid{0, 0, 0};
    mid[static_cast<size_t>(hi.coarse.axis)] = hi.coarse.side ? 1.0 : -1.0;
    const JacobianSample J = eval_jacobian(cc, mid);
    const double dotp =
        std::abs(dot(J.cols[static_cast<size_t>(hi.coarse.axis)], J.cols[static_cast<size_t>(hi.coarse.axis ? 0 : 1)]));
    report(4, "hanging-node conformity and midpoint orthogonality",
           rel < 1e-10 && rel_o < 1e-10 && dotp < 1e-10,
           "max relative jump " + fmt(std::max(rel, rel_o)) + ", |dx.dy| " + fmt(dotp));
}

// 5. Orthogonalization over 1000 random non-parallel pairs.
void criterion_orthogonalize() {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst_cos = 0.0, worst_fix = 0.0, worst_sym = 0.0;
    int trials = 0;
    while (trials < 1000) {
        const Vec a = vec2(uni(rng), uni(rng));
        const Vec b = vec2(uni(rng), uni(rng));
        if (norm(a) < 1e-2 || norm(b) < 1e-2) continue;
        if (std::abs(a[0] * b[1] - a[1] * b[0]) < 1e-4 * norm(a) * norm(b)) continue;
        ++trials;
        const auto out = orthogonalize_vertex({a, b});
        worst_cos = std::max(worst_cos, std::abs(dot(out[0], out[1])) / (norm(out[0]) * norm(out[1])));
        auto ang = [](const Vec& u, const Vec& v) {
            return std::acos(std::clamp(dot(u, v) / (norm(u) * norm(v)), -1.0, 1.0));
        };
        worst_sym = std::max(worst_sym, std::abs(ang(out[0], a) - ang(out[1], b)));
        // fixed point on an orthogonal pair derived from a
        const Vec c = vec2(-a[1], a[0]);
        const auto fix = orthogonalize_vertex({a, c});
        worst_fix = std::max(worst_fix, std::max(norm(fix[0] - a), norm(fix[1] - c)) / norm(a));
    }
    report(5, "orthogonalization: 1000 random pairs", worst_cos < 1e-10 && worst_fix < 1e-12 && worst_sym < 1e-10,
           "cos " + fmt(worst_cos) + ", fixed-point " + fmt(worst_fix) + ", symmetry " + fmt(worst_sym));
}

// 6. Wedge regression: plain build folds at stretching 16, anisotropic build
// never does.
void criterion_wedge() {
    bool ok = true;
    std::string detail;
    for (int h : {1, 2, 8, 16}) {
        const Mesh m = load("wedge_h" + std::to_string(h) + ".json");
        const Connectivity conn = build_connectivity(m);
        const MappingField plain = build_mapping(m, conn, {});
        double mn = 1e300;
        for (const JacobianEntry& e : check_jacobians(plain, m, conn, 24)) mn = std::min(mn, e.min_det);
        BuildOptions opts;
        opts.anisotropic = true;
        const MappingField an = build_mapping(m, conn, opts);
        double mna = 1e300;
        for (const JacobianEntry& e : check_jacobians(an, m, conn, 24)) mna = std::min(mna, e.min_det);
        if (h == 1 && !(mn > 0)) ok = false;
        if (h == 16 && !(mn < 0)) ok = false;
        if (!(mna > 0)) ok = false;
        detail += "h" + std::to_string(h) + ":" + fmt(mn) + "/" + fmt(mna) + " ";
    }
    report(6, "wedge min det J, plain/anisotropic", ok, detail);
}

// 7. Perturbed 2x2x2 hexahedral mesh: C1 across interior faces, Jacobian
// matches finite differences.
void criterion_cube() {
    const Mesh m = load("cube_perturbed.json");
    const Connectivity conn = build_connectivity(m);
    const MappingField f = build_mapping(m, conn, {});
    const CheckReport rep = run_checks(f, m, conn, 6, 1e-10);
    double rel = 0.0;
    for (const InterfaceEntry& e : rep.interfaces)
        rel = std::max(rel, std::max(e.max_phi_jump, e.max_grad_jump) / e.scale);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(-0.99, 0.99);
    double fd_err = 0.0;
    const double h = 1e-6;
    for (int c = 0; c < m.n_cells(); ++c) {
        const CellCoefficients cc = local_coefficients(f, m, conn, c);
        for (int trial = 0; trial < 6; ++trial) {
            const Vec x{uni(rng), uni(rng), uni(rng)};
            const JacobianSample J = eval_jacobian(cc, x);
            for (int a = 0; a < 3; ++a) {
                Vec xp = x, xm = x;
                xp[static_cast<size_t>(a)] += h;
                xm[static_cast<size_t>(a)] -= h;
                const Vec fd = (eval_phi(cc, xp) - eval_phi(cc, xm)) / (2 * h);
                fd_err = std::max(fd_err, norm(fd - J.cols[static_cast<size_t>(a)]) /
                                              std::max(1.0, norm(J.cols[static_cast<size_t>(a)])));
            }
        }
    }
    report(7, "3d perturbed cube: C1 faces and FD Jacobian", rel < 1e-10 && fd_err < 1e-7,
           "max relative jump " + fmt(rel) + ", FD error " + fmt(fd_err));
}

// 8. The two storage strategies for hanging data agree.
void criterion_strategies() {
    const Mesh m = load("refined_l2.json");
    const Connectivity conn = build_connectivity(m);
    const MappingField f = build_mapping(m, conn, {});
    std::mt19937 rng(15);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    double worst = 0.0;
    for (int c = 0; c < m.n_cells(); ++c) {
        const CellCoefficients a = local_coefficients(f, m, conn, c, HangingStrategy::Stored);
        const CellCoefficients b = local_coefficients(f, m, conn, c, HangingStrategy::OnTheFly);
        for (int trial = 0; trial < 20; ++trial) {
            const Vec x{uni(rng), uni(rng), 0};
            worst = std::max(worst, norm(eval_phi(a, x) - eval_phi(b, x)));
            const JacobianSample ja = eval_jacobian(a, x);
            const JacobianSample jb = eval_jacobian(b, x);
            for (int ax = 0; ax < 2; ++ax)
                worst = std::max(worst, norm(ja.cols[static_cast<size_t>(ax)] - jb.cols[static_cast<size_t>(ax)]));
        }
    }
    report(8, "level-2 patch: rescaled storage vs on-the-fly constraints", worst < 1e-12,
           "max difference " + fmt(worst));
}

// 9. Byte-identical builds on every shipped example.
void criterion_determinism() {
    const std::vector<std::string> names{
        "cartesian_2x2.json", "cartesian_3x3.json", "ring.json",      "hanging_min.json", "fig5.json",
        "wedge_h1.json",      "wedge_h2.json",      "wedge_h4.json",  "wedge_h8.json",    "wedge_h16.json",
        "cube_2x2x2.json",    "cube_perturbed.json", "refined_l2.json", "hanging3d.json"};
    bool ok = true;
    for (const std::string& name : names) {
        const std::string text = slurp(name);
        auto run = [&]() {
            const Mesh m = parse_mesh(text);
            const Connectivity conn = build_connectivity(m);
            BuildOptions opts;
            opts.orthogonalize = name.find("hanging") != std::string::npos;
            return write_mapping_json(m, build_mapping(m, conn, opts));
        };
        if (run() != run()) {
            ok = false;
            std::printf("  nondeterministic build: %s\n", name.c_str());
        }
    }
    report(9, "deterministic builds on all shipped examples", ok, std::to_string(names.size()) + " meshes");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_data = argv[1];
    try {
        criterion_duality();
        criterion_reproduction();
        criterion_ring();
        criterion_hanging();
        criterion_orthogonalize();
        criterion_wedge();
        criterion_cube();
        criterion_strategies();
        criterion_determinism();
    } catch (const std::exception& e) {
        std::printf("[FAIL] unexpected exception: %s\n", e.what());
        return 1;
    }
    return g_failures == 0 ? 0 : 1;
}
