#include "c1mesh/check.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace c1mesh {

namespace {

// reference points of a facet for the given per-tangent sample values
Vec facet_point(int dim, int axis, int side, double u, double v) {
    Vec x{0, 0, 0};
    x[static_cast<size_t>(axis)] = side ? 1.0 : -1.0;
    int t = 0;
    for (int a = 0; a < dim; ++a) {
        if (a == axis) continue;
        x[static_cast<size_t>(a)] = (t == 0) ? u : v;
        ++t;
    }
    return x;
}

double facet_scale(const CellCoefficients& cc, int axis, int side) {
    double scale = 0.0;
    for (int code = 0; code < (1 << cc.dim); ++code) {
        if (bit(code, axis) != side) continue;
        Vec corner{0, 0, 0};
        for (int a = 0; a < cc.dim; ++a) corner[static_cast<size_t>(a)] = bit(code, a) ? 1.0 : -1.0;
        const JacobianSample J = eval_jacobian(cc, corner);
        for (int a = 0; a < cc.dim; ++a) scale = std::max(scale, norm(J.cols[static_cast<size_t>(a)]));
    }
    return std::max(scale, 1e-300);
}

// max |Phi_a - Phi_b o T| and max column jump of the chained Jacobians over
// the sample grid of facet `fr` of cell a.
void compare_traces(const CellCoefficients& ca, const CellCoefficients& cb, const FacetRef& fr,
                    const CellEmbedding& a_to_b, int n, InterfaceEntry& out) {
    const int dim = ca.dim;
    const auto pts = sample_points_1d(n);
    const size_t nv = dim == 3 ? pts.size() : 1;
    for (size_t iu = 0; iu < pts.size(); ++iu) {
        for (size_t iv = 0; iv < nv; ++iv) {
            const Vec xa = facet_point(dim, fr.axis, fr.side, pts[iu], dim == 3 ? pts[iv] : 0.0);
            const Vec xb = a_to_b.apply(xa, dim);
            const JacobianSample ja = eval_jacobian(ca, xa);
            const JacobianSample jb = eval_jacobian(cb, xb);
            out.max_phi_jump = std::max(out.max_phi_jump, norm(eval_phi(ca, xa) - eval_phi(cb, xb)));
            for (int a = 0; a < dim; ++a) {
                const int a2 = a_to_b.axes.axis[static_cast<size_t>(a)];
                const double chain = a_to_b.scale * a_to_b.axes.sign[static_cast<size_t>(a)];
                const Vec diff = ja.cols[static_cast<size_t>(a)] - chain * jb.cols[static_cast<size_t>(a2)];
                out.max_grad_jump = std::max(out.max_grad_jump, norm(diff));
            }
        }
    }
}

} // namespace

std::vector<double> sample_points_1d(int n) {
    std::set<double> pts{-1.0, 0.0, 1.0};
    int k = 0;
    const double pi = std::acos(-1.0);
    while (static_cast<int>(pts.size()) < n) {
        // Chebyshev-Gauss points of increasing count until n reached
        const int m = n;
        pts.insert(std::cos(pi * (2.0 * k + 1.0) / (2.0 * m)));
        if (++k >= m) break;
    }
    return std::vector<double>(pts.begin(), pts.end());
}

InterfaceEntry check_c1_interface(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                  int cell_a, int cell_b, int n, double tol) {
    (void)tol;
    const NeighborRecord* rec = nullptr;
    for (const NeighborRecord& r : conn.neighbors) {
        if ((r.a.cell == cell_a && r.b.cell == cell_b) || (r.a.cell == cell_b && r.b.cell == cell_a)) rec = &r;
    }
    if (!rec)
        throw std::invalid_argument("check_c1_interface: cells " + std::to_string(cell_a) + " and " +
                                    std::to_string(cell_b) + " do not share a facet");
    const CellCoefficients ca = local_coefficients(field, mesh, conn, rec->a.cell);
    const CellCoefficients cb = local_coefficients(field, mesh, conn, rec->b.cell);
    InterfaceEntry out;
    out.cells = {rec->a.cell, rec->b.cell};
    out.hanging = false;
    out.scale = std::max(facet_scale(ca, rec->a.axis, rec->a.side), facet_scale(cb, rec->b.axis, rec->b.side));
    compare_traces(ca, cb, rec->a, rec->a_to_b, n, out);
    return out;
}

InterfaceEntry check_hanging_interface(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                       const HangingInterface& hi, int n, double tol) {
    (void)tol;
    const CellCoefficients cc = local_coefficients(field, mesh, conn, hi.coarse.cell);
    InterfaceEntry out;
    out.cells.push_back(hi.coarse.cell);
    out.hanging = true;
    out.scale = facet_scale(cc, hi.coarse.axis, hi.coarse.side);
    for (const HangingPiece& piece : hi.pieces) {
        out.cells.push_back(piece.fine.cell);
        const CellCoefficients cf = local_coefficients(field, mesh, conn, piece.fine.cell);
        out.scale = std::max(out.scale, facet_scale(cf, piece.fine.axis, piece.fine.side));
        compare_traces(cf, cc, piece.fine, piece.fine_to_coarse, n, out);
    }
    return out;
}

std::vector<OrthoEntry> check_orthogonality(const MappingField& field, const Mesh& mesh, const Connectivity& conn) {
    std::vector<OrthoEntry> out;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (conn.is_hanging(v)) continue;
        const VertexDoFs& d = field.dofs[static_cast<size_t>(v)];
        double residual = 0.0;
        for (int i = 0; i < mesh.dim; ++i) {
            for (int j = i + 1; j < mesh.dim; ++j) {
                const double ni = norm(d.derivs[static_cast<size_t>(i)]);
                const double nj = norm(d.derivs[static_cast<size_t>(j)]);
                if (ni == 0.0 || nj == 0.0) continue;
                residual = std::max(residual,
                                    std::abs(dot(d.derivs[static_cast<size_t>(i)], d.derivs[static_cast<size_t>(j)])) /
                                        (ni * nj));
            }
        }
        out.push_back({v, conn.vclass[static_cast<size_t>(v)] == VertexClass::Interior, residual});
    }
    return out;
}

std::vector<JacobianEntry> check_jacobians(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                           int n) {
    std::vector<JacobianEntry> out;
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellCoefficients cc = local_coefficients(field, mesh, conn, c);
        JacobianEntry e;
        e.cell = c;
        e.min_det = std::numeric_limits<double>::infinity();
        e.max_det = -std::numeric_limits<double>::infinity();
        const auto pts = [&] {
            std::vector<double> p(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) p[static_cast<size_t>(i)] = -1.0 + 2.0 * i / (n - 1);
            return p;
        }();
        const size_t nz = mesh.dim == 3 ? pts.size() : 1;
        for (size_t k = 0; k < nz; ++k) {
            for (size_t j = 0; j < pts.size(); ++j) {
                for (size_t i = 0; i < pts.size(); ++i) {
                    Vec x{pts[i], pts[j], mesh.dim == 3 ? pts[k] : 0.0};
                    const double det = eval_jacobian(cc, x).det;
                    e.min_det = std::min(e.min_det, det);
                    e.max_det = std::max(e.max_det, det);
                }
            }
        }
        out.push_back(e);
    }
    return out;
}

bool CheckReport::c1_pass() const {
    for (const InterfaceEntry& e : interfaces) {
        if (e.max_phi_jump > tol * e.scale || e.max_grad_jump > tol * e.scale) return false;
    }
    return true;
}

bool CheckReport::orthogonality_pass() const {
    if (!orthogonality_checked) return true;
    for (const OrthoEntry& e : vertex_orthogonality) {
        if (e.interior && e.residual > tol) return false;
    }
    for (const MidpointOrthoEntry& e : midpoint_orthogonality) {
        if (e.residual > tol) return false;
    }
    return true;
}

bool CheckReport::jacobian_pass() const {
    for (const JacobianEntry& e : jacobians) {
        if (!(e.min_det > 0.0)) return false;
    }
    return true;
}

bool CheckReport::pass() const { return c1_pass() && orthogonality_pass() && jacobian_pass(); }

CheckReport run_checks(const MappingField& field, const Mesh& mesh, const Connectivity& conn, int n, double tol) {
    CheckReport report;
    report.tol = tol;
    report.samples = n;
    report.orthogonality_checked = field.options.orthogonalize;
    for (const NeighborRecord& rec : conn.neighbors)
        report.interfaces.push_back(check_c1_interface(field, mesh, conn, rec.a.cell, rec.b.cell, n, tol));
    for (const HangingInterface& hi : conn.hanging_interfaces)
        report.interfaces.push_back(check_hanging_interface(field, mesh, conn, hi, n, tol));
    std::sort(report.interfaces.begin(), report.interfaces.end(),
              [](const InterfaceEntry& a, const InterfaceEntry& b) { return a.cells < b.cells; });

    report.vertex_orthogonality = check_orthogonality(field, mesh, conn);

    // orthogonality residuals at augmented midpoints
    for (const auto& [idx, coeff] : field.face_augs) {
        (void)coeff;
        const HangingInterface& hi = conn.hanging_interfaces[static_cast<size_t>(idx)];
        const CellCoefficients cc = local_coefficients(field, mesh, conn, hi.coarse.cell);
        Vec mid{0, 0, 0};
        mid[static_cast<size_t>(hi.coarse.axis)] = hi.coarse.side ? 1.0 : -1.0;
        const JacobianSample J = eval_jacobian(cc, mid);
        double residual = 0.0;
        for (int a = 0; a < mesh.dim; ++a) {
            if (a == hi.coarse.axis) continue;
            const double na = norm(J.cols[static_cast<size_t>(hi.coarse.axis)]);
            const double nt = norm(J.cols[static_cast<size_t>(a)]);
            if (na == 0.0 || nt == 0.0) continue;
            residual = std::max(residual, std::abs(dot(J.cols[static_cast<size_t>(hi.coarse.axis)],
                                                       J.cols[static_cast<size_t>(a)])) /
                                              (na * nt));
        }
        MidpointOrthoEntry e;
        e.entity = "facet " + std::to_string(hi.coarse.cell) + " " + std::to_string(hi.coarse.axis) + " " +
                   std::to_string(hi.coarse.side);
        e.residual = residual;
        report.midpoint_orthogonality.push_back(e);
    }
    for (const auto& [eid, rec] : field.edge_augs) {
        const Edge& edge = conn.edges[static_cast<size_t>(eid)];
        const CellCoefficients cc = local_coefficients(field, mesh, conn, rec.cell);
        Vec mid{0, 0, 0};
        for (int a = 0; a < 3; ++a) mid[static_cast<size_t>(a)] = bit(rec.end_code, a) ? 1.0 : -1.0;
        mid[static_cast<size_t>(rec.edge_axis)] = 0.0;
        const JacobianSample J = eval_jacobian(cc, mid);
        double residual = 0.0;
        for (int i = 0; i < 3; ++i) {
            for (int j = i + 1; j < 3; ++j) {
                const double ni = norm(J.cols[static_cast<size_t>(i)]);
                const double nj = norm(J.cols[static_cast<size_t>(j)]);
                if (ni == 0.0 || nj == 0.0) continue;
                residual = std::max(residual, std::abs(dot(J.cols[static_cast<size_t>(i)],
                                                           J.cols[static_cast<size_t>(j)])) /
                                                  (ni * nj));
            }
        }
        MidpointOrthoEntry e;
        e.entity = "edge " + std::to_string(edge.a) + " " + std::to_string(edge.b);
        e.residual = residual;
        report.midpoint_orthogonality.push_back(e);
    }

    report.jacobians = check_jacobians(field, mesh, conn, n);
    return report;
}

} // namespace c1mesh
