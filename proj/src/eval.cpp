#include "c1mesh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace c1mesh {

namespace {

// Hermite + bubble weights of a 1D factor composed with an affine map
// xi_c = a * xi_f + b. Exact for cubic factors and the quartic bubble: the
// bubble has vanishing Hermite data and unit leading coefficient, so the
// composed function splits into its own end data plus a^4 c4 psi_E.
struct Weights5 {
    std::array<double, 4> hermite{0, 0, 0, 0}; // psi_s^o, index s*2+o
    double bubble = 0;
};

double factor_eval(const AugFactor& f, double xi, int deriv) {
    return f.bubble ? eval_edge_bubble(xi, deriv) : eval_hermite_1d(f.hermite, xi, deriv);
}

Weights5 compose_affine(const AugFactor& f, double a, double b) {
    Weights5 w;
    for (int s = 0; s < 2; ++s) {
        const double xi = s ? 1.0 : -1.0;
        w.hermite[static_cast<size_t>(s * 2 + 0)] = factor_eval(f, a * xi + b, 0);
        w.hermite[static_cast<size_t>(s * 2 + 1)] = a * factor_eval(f, a * xi + b, 1);
    }
    if (f.bubble) w.bubble = a * a * a * a;
    return w;
}

// Alignment of cell K's local frame with cell C's at a shared non-hanging
// corner vertex, through the vertex atlas frame.
AxisMap frame_between(const Connectivity& conn, int shared_vertex, int cell_from, int cell_to, int dim) {
    const VertexStar& star = conn.stars[static_cast<size_t>(shared_vertex)];
    const int kf = star.find_cell(cell_from);
    const int kt = star.find_cell(cell_to);
    if (kf < 0 || kt < 0 || !star.frame_ok)
        throw BuildError("no consistent frame between cells " + std::to_string(cell_from) + " and " +
                         std::to_string(cell_to) + " at vertex " + std::to_string(shared_vertex));
    return compose(star.to_slot[static_cast<size_t>(kf)],
                   inverse_map(star.to_slot[static_cast<size_t>(kt)], dim));
}

Vec corner_ref(int code, int dim) {
    Vec r{0, 0, 0};
    for (int a = 0; a < dim; ++a) r[static_cast<size_t>(a)] = bit(code, a) ? 1.0 : -1.0;
    return r;
}

} // namespace

// Embedding of fine cell K into the hanging host C, anchored at a shared
// corner vertex (for the axis correspondence) and at the hanging vertex
// (for the offsets).
CellEmbedding embedding_into_host(const Mesh& mesh, const Connectivity& conn, int fine_cell,
                                  const HangingVertexInfo& h, int hv_code_in_fine) {
    const int dim = mesh.dim;
    int shared = -1;
    for (int code = 0; code < mesh.verts_per_cell() && shared < 0; ++code) {
        const int v = mesh.corner(fine_cell, code);
        if (conn.stars[static_cast<size_t>(v)].find_cell(h.host_cell) >= 0 && !conn.is_hanging(v)) shared = v;
    }
    if (shared < 0)
        throw BuildError("hanging vertex " + std::to_string(h.vertex) + ": fine cell " + std::to_string(fine_cell) +
                         " shares no corner with host cell " + std::to_string(h.host_cell));
    CellEmbedding e;
    e.axes = frame_between(conn, shared, fine_cell, h.host_cell, dim);
    e.scale = 0.5;
    const Vec xf = corner_ref(hv_code_in_fine, dim);
    for (int a = 0; a < dim; ++a) {
        const int ac = e.axes.axis[static_cast<size_t>(a)];
        e.offset[static_cast<size_t>(ac)] =
            h.host_ref[static_cast<size_t>(ac)] - 0.5 * e.axes.sign[static_cast<size_t>(a)] * xf[static_cast<size_t>(a)];
    }
    return e;
}

std::array<Vec, 8> hanging_corner_alphas(const CellCoefficients& host, const CellEmbedding& emb, int hv_code,
                                         int dim) {
    std::array<Vec, 8> out{};
    Vec xf{0, 0, 0};
    for (int a = 0; a < dim; ++a) xf[static_cast<size_t>(a)] = ((hv_code >> a) & 1) ? 1.0 : -1.0;
    const Vec point = emb.apply(xf, dim);
    for (int kappa = 0; kappa < (1 << dim); ++kappa) {
        std::array<int, 3> dc{0, 0, 0};
        double factor = 1.0;
        for (int a = 0; a < dim; ++a) {
            if (!((kappa >> a) & 1)) continue;
            dc[static_cast<size_t>(emb.axes.axis[static_cast<size_t>(a)])] += 1;
            factor *= emb.scale * emb.axes.sign[static_cast<size_t>(a)];
        }
        out[static_cast<size_t>(kappa)] = factor * eval_phi_deriv(host, point, dc);
    }
    return out;
}

double det_cols(const std::array<Vec, 3>& c, int dim) {
    if (dim == 2) return c[0][0] * c[1][1] - c[0][1] * c[1][0];
    return c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1]) -
           c[1][0] * (c[0][1] * c[2][2] - c[0][2] * c[2][1]) +
           c[2][0] * (c[0][1] * c[1][2] - c[0][2] * c[1][1]);
}

Vec eval_phi_deriv(const CellCoefficients& coeffs, const Vec& x, const std::array<int, 3>& deriv) {
    Vec sum{0, 0, 0};
    const int n = 1 << coeffs.dim;
    for (int c = 0; c < n; ++c) {
        for (int kappa = 0; kappa < n; ++kappa) {
            const Vec& a = coeffs.alpha[static_cast<size_t>(c)][static_cast<size_t>(kappa)];
            if (a[0] == 0.0 && a[1] == 0.0 && a[2] == 0.0) continue;
            double prod = 1.0;
            for (int j = 0; j < coeffs.dim; ++j) {
                prod *= eval_hermite_1d({bit(c, j), bit(kappa, j)}, x[static_cast<size_t>(j)],
                                        deriv[static_cast<size_t>(j)]);
            }
            sum += prod * a;
        }
    }
    for (const AugFunction& f : coeffs.augs) sum += eval_augmentation(f.shape, x, deriv) * f.coeff;
    return sum;
}

JacobianSample eval_jacobian(const CellCoefficients& coeffs, const Vec& x) {
    JacobianSample s;
    s.point = x;
    for (int j = 0; j < coeffs.dim; ++j) {
        std::array<int, 3> d{0, 0, 0};
        d[static_cast<size_t>(j)] = 1;
        s.cols[static_cast<size_t>(j)] = eval_phi_deriv(coeffs, x, d);
    }
    s.det = det_cols(s.cols, coeffs.dim);
    return s;
}

Vec transform_tangent(const CellCoefficients& coeffs, const Vec& x, const Vec& t_ref) {
    const JacobianSample s = eval_jacobian(coeffs, x);
    Vec out{0, 0, 0};
    for (int j = 0; j < coeffs.dim; ++j) out += t_ref[static_cast<size_t>(j)] * s.cols[static_cast<size_t>(j)];
    return out;
}

Vec transform_normal(const CellCoefficients& coeffs, const Vec& x, const Vec& n_ref) {
    const JacobianSample s = eval_jacobian(coeffs, x);
    double scale = 0.0;
    for (int j = 0; j < coeffs.dim; ++j) scale = std::max(scale, norm(s.cols[static_cast<size_t>(j)]));
    if (std::abs(s.det) <= 1e-14 * std::pow(scale, coeffs.dim))
        throw BuildError("transform_normal: singular Jacobian in cell " + std::to_string(coeffs.cell));
    // solve J^T y = n via the cofactor inverse
    Vec y{0, 0, 0};
    if (coeffs.dim == 2) {
        const double a = s.cols[0][0], c = s.cols[0][1];
        const double b = s.cols[1][0], d = s.cols[1][1];
        y[0] = (d * n_ref[0] - c * n_ref[1]) / s.det;
        y[1] = (-b * n_ref[0] + a * n_ref[1]) / s.det;
    } else {
        const auto& J = s.cols; // J[col][row]
        // inverse-transpose columns are cross products of Jacobian columns
        const Vec c0 = cross(J[1], J[2]);
        const Vec c1 = cross(J[2], J[0]);
        const Vec c2 = cross(J[0], J[1]);
        y = (n_ref[0] * c0 + n_ref[1] * c1 + n_ref[2] * c2) / s.det;
    }
    return y;
}

double min_jacobian(const CellCoefficients& coeffs, int n) {
    if (n < 2) throw std::invalid_argument("min_jacobian: grid resolution must be >= 2");
    double best = std::numeric_limits<double>::infinity();
    const int nz = coeffs.dim == 3 ? n : 1;
    for (int k = 0; k < nz; ++k) {
        for (int j = 0; j < n; ++j) {
            for (int i = 0; i < n; ++i) {
                Vec x{-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1), 0.0};
                if (coeffs.dim == 3) x[2] = -1.0 + 2.0 * k / (n - 1);
                best = std::min(best, eval_jacobian(coeffs, x).det);
            }
        }
    }
    return best;
}

namespace {

// Shapes a cell carries directly: face augmentations of its own hanging
// facets plus orientation-adapted replicas of the edge augmentations of
// every whole edge it owns.
std::vector<AugFunction> own_aug_functions(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                           int cell) {
    std::vector<AugFunction> out;
    const int dim = mesh.dim;
    for (int axis = 0; axis < dim; ++axis) {
        for (int side = 0; side < 2; ++side) {
            const FacetInfo& fi = conn.facet_info[static_cast<size_t>(cell)][static_cast<size_t>(axis * 2 + side)];
            if (fi.kind != FacetInfo::CoarseSide) continue;
            auto it = field.face_augs.find(fi.index);
            if (it == field.face_augs.end()) continue;
            AugFunction f;
            if (dim == 2) {
                const int t = axis == 0 ? 1 : 0;
                f.shape = make_augmentation(AugKind::Edge2D, axis, side, t);
            } else {
                int t1 = -1, t2 = -1;
                for (int a = 0; a < 3; ++a) {
                    if (a == axis) continue;
                    (t1 < 0 ? t1 : t2) = a;
                }
                f.shape = make_augmentation(AugKind::Face3D, axis, side, t1, t2);
            }
            f.coeff = it->second;
            out.push_back(f);
        }
    }
    if (dim == 3) {
        for (const auto& [eid, rec] : field.edge_augs) {
            const Edge& e = conn.edges[static_cast<size_t>(eid)];
            if (!std::binary_search(e.cells.begin(), e.cells.end(), cell)) continue;
            // locate the edge in this cell
            const VertexStar& star = conn.stars[static_cast<size_t>(e.a)];
            const int k = star.find_cell(cell);
            const int code_a = star.corner[static_cast<size_t>(k)];
            int edge_axis = -1;
            for (int a = 0; a < 3; ++a)
                if (mesh.corner(cell, code_a ^ (1 << a)) == e.b) edge_axis = a;
            if (edge_axis < 0) continue;
            const AxisMap to_canon = frame_between(conn, e.a, cell, rec.cell, 3);
            for (int u = 0; u < 2; ++u) {
                // which local axis corresponds to the canonical transverse axis?
                int local_u = -1, align = 1;
                for (int a = 0; a < 3; ++a) {
                    if (a == edge_axis) continue;
                    if (to_canon.axis[static_cast<size_t>(a)] == rec.u_axis[static_cast<size_t>(u)]) {
                        local_u = a;
                        align = to_canon.sign[static_cast<size_t>(a)];
                    }
                }
                if (local_u < 0)
                    throw BuildError("edge augmentation of edge " + std::to_string(eid) +
                                     ": inconsistent frames at cell " + std::to_string(cell));
                int local_w = 3 - edge_axis - local_u;
                AugFunction f;
                f.shape = make_augmentation(AugKind::Edge3D, local_u, bit(code_a, local_u), edge_axis, local_w,
                                            bit(code_a, local_w));
                f.coeff = static_cast<double>(align) * rec.coeff[static_cast<size_t>(u)];
                out.push_back(f);
            }
        }
    }
    return out;
}

// Pull the coarse side's augmentation traces back onto a fine interface
// facet: per tangent axis the composed 1D factor splits into Hermite data
// plus a bubble part; tensor terms containing at least one bubble become
// fine-side shapes, the rest is absorbed by the (hanging) vertex data.
void pullback_aug_functions(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                            const HangingInterface& hi, const HangingPiece& piece,
                            std::vector<AugFunction>& out) {
    const int dim = mesh.dim;
    const int nf = piece.fine.axis;
    const int nc = hi.coarse.axis;
    const auto coarse_shapes = own_aug_functions(field, mesh, conn, hi.coarse.cell);
    for (const AugFunction& cs : coarse_shapes) {
        const AugFactor& normal_factor = cs.shape.factors[static_cast<size_t>(nc)];
        const double node = hi.coarse.side ? 1.0 : -1.0;
        const double v0 = factor_eval(normal_factor, node, 0);
        const double d0 = factor_eval(normal_factor, node, 1);
        if (v0 == 0.0 && d0 == 0.0) continue;

        std::array<Weights5, 3> tw;
        std::array<int, 2> tangents{-1, -1};
        int nt = 0;
        for (int tf = 0; tf < dim; ++tf) {
            if (tf == nf) continue;
            const int tc = piece.fine_to_coarse.axes.axis[static_cast<size_t>(tf)];
            const double a = piece.fine_to_coarse.scale * piece.fine_to_coarse.axes.sign[static_cast<size_t>(tf)];
            const double b = piece.fine_to_coarse.offset[static_cast<size_t>(tc)];
            tw[static_cast<size_t>(tf)] = compose_affine(cs.shape.factors[static_cast<size_t>(tc)], a, b);
            tangents[static_cast<size_t>(nt++)] = tf;
        }
        const double sigma_n = piece.fine_to_coarse.axes.sign[static_cast<size_t>(nf)];

        // enumerate tensor terms; option 0..3 = Hermite, 4 = bubble
        const int nopt = 5;
        const int terms = nt == 1 ? nopt : nopt * nopt;
        for (int term = 0; term < terms; ++term) {
            std::array<int, 2> opt{term % nopt, nt == 2 ? term / nopt : 0};
            bool has_bubble = false;
            double weight = 1.0;
            for (int q = 0; q < nt; ++q) {
                const Weights5& w = tw[static_cast<size_t>(tangents[static_cast<size_t>(q)])];
                if (opt[static_cast<size_t>(q)] == 4) {
                    has_bubble = true;
                    weight *= w.bubble;
                } else {
                    weight *= w.hermite[static_cast<size_t>(opt[static_cast<size_t>(q)])];
                }
            }
            if (!has_bubble || weight == 0.0) continue;

            auto fine_shape = [&](int normal_order) {
                AugShape s;
                s.dim = dim;
                s.factors[static_cast<size_t>(nf)] = AugFactor{false, {piece.fine.side, normal_order}};
                for (int q = 0; q < nt; ++q) {
                    const int tf = tangents[static_cast<size_t>(q)];
                    if (opt[static_cast<size_t>(q)] == 4)
                        s.factors[static_cast<size_t>(tf)] = AugFactor{true, {}};
                    else
                        s.factors[static_cast<size_t>(tf)] =
                            AugFactor{false, {opt[static_cast<size_t>(q)] / 2, opt[static_cast<size_t>(q)] % 2}};
                }
                return s;
            };
            if (v0 != 0.0) out.push_back({fine_shape(0), (v0 * weight) * cs.coeff});
            if (d0 != 0.0) out.push_back({fine_shape(1), (0.5 * sigma_n * d0 * weight) * cs.coeff});
        }
    }
}

} // namespace

std::vector<AugFunction> cell_aug_functions(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                            int cell) {
    std::vector<AugFunction> out = own_aug_functions(field, mesh, conn, cell);
    for (int axis = 0; axis < mesh.dim; ++axis) {
        for (int side = 0; side < 2; ++side) {
            const FacetInfo& fi = conn.facet_info[static_cast<size_t>(cell)][static_cast<size_t>(axis * 2 + side)];
            if (fi.kind != FacetInfo::FineSide) continue;
            const HangingInterface& hi = conn.hanging_interfaces[static_cast<size_t>(fi.index)];
            for (const HangingPiece& piece : hi.pieces) {
                if (piece.fine.cell == cell && piece.fine.axis == axis && piece.fine.side == side)
                    pullback_aug_functions(field, mesh, conn, hi, piece, out);
            }
        }
    }
    return out;
}

CellCoefficients local_coefficients(const MappingField& field, const Mesh& mesh, const Connectivity& conn,
                                    int cell, HangingStrategy strategy) {
    CellCoefficients cc;
    cc.dim = mesh.dim;
    cc.cell = cell;
    cc.level = mesh.levels[static_cast<size_t>(cell)];

    std::array<double, 3> scale{1, 1, 1};
    for (int a = 0; a < mesh.dim; ++a) scale[static_cast<size_t>(a)] = axis_scale(field, cc.level, cell, a);

    for (int code = 0; code < mesh.verts_per_cell(); ++code) {
        const int v = mesh.corner(cell, code);
        const VertexDoFs& d = field.dofs[static_cast<size_t>(v)];
        const VertexStar& star = conn.stars[static_cast<size_t>(v)];
        const int k = star.find_cell(cell);
        const AxisMap& frame = star.to_slot[static_cast<size_t>(k)];

        if (conn.is_hanging(v) && strategy == HangingStrategy::OnTheFly) {
            const HangingVertexInfo& h = conn.hangings[static_cast<size_t>(conn.hanging_index[static_cast<size_t>(v)])];
            const CellCoefficients host = local_coefficients(field, mesh, conn, h.host_cell, HangingStrategy::Stored);
            const CellEmbedding emb = embedding_into_host(mesh, conn, cell, h, code);
            cc.alpha[static_cast<size_t>(code)] = hanging_corner_alphas(host, emb, code, mesh.dim);
            continue;
        }

        cc.alpha[static_cast<size_t>(code)][0] = d.position;
        for (int kappa = 1; kappa < mesh.verts_per_cell(); ++kappa) {
            int slot_mask = 0;
            int sign = 1;
            double s = 1.0;
            for (int a = 0; a < mesh.dim; ++a) {
                if (!bit(kappa, a)) continue;
                slot_mask |= 1 << frame.axis[static_cast<size_t>(a)];
                sign *= frame.sign[static_cast<size_t>(a)];
                s *= scale[static_cast<size_t>(a)];
            }
            Vec g{0, 0, 0};
            if (kappa_order({bit(kappa, 0), bit(kappa, 1), bit(kappa, 2)}, mesh.dim) == 1) {
                int slot = 0;
                while (!((slot_mask >> slot) & 1)) ++slot;
                g = d.derivs[static_cast<size_t>(slot)];
            } else {
                auto it = d.higher.find(slot_mask);
                if (it != d.higher.end()) g = it->second;
            }
            cc.alpha[static_cast<size_t>(code)][static_cast<size_t>(kappa)] = (sign * s) * g;
        }
    }

    cc.augs = cell_aug_functions(field, mesh, conn, cell);
    return cc;
}

} // namespace c1mesh
