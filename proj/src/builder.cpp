#include "c1mesh/builder.hpp"

#include "c1mesh/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace c1mesh {

namespace {

Vec rotate90(const Vec& v) { return {-v[1], v[0], 0.0}; }

Vec rotate45(const Vec& v) {
    const double c = std::sqrt(0.5);
    return {c * (v[0] - v[1]), c * (v[0] + v[1]), 0.0};
}

// Orthogonal polar factor of a 3x3 matrix by Newton iteration
// Q <- (Q + Q^{-T})/2; columns of the input are the direction vectors.
std::array<Vec, 3> polar_factor(std::array<Vec, 3> q) {
    auto det3 = [](const std::array<Vec, 3>& m) { return det_cols(m, 3); };
    if (std::abs(det3(q)) < 1e-12)
        throw BuildError("orthogonalize: directions are nearly coplanar");
    for (int iter = 0; iter < 60; ++iter) {
        const double d = det3(q);
        // inverse transpose via cross products (columns)
        std::array<Vec, 3> it{cross(q[1], q[2]) / d, cross(q[2], q[0]) / d, cross(q[0], q[1]) / d};
        double delta = 0.0;
        for (int c = 0; c < 3; ++c) {
            const Vec next = 0.5 * (q[static_cast<size_t>(c)] + it[static_cast<size_t>(c)]);
            delta = std::max(delta, norm(next - q[static_cast<size_t>(c)]));
            q[static_cast<size_t>(c)] = next;
        }
        if (delta < 1e-15) break;
    }
    return q;
}

// Fig. 1 construction in the plane: the two angle bisector lines of the unit
// directions are span(u+v) and span(u-v); rotating that orthogonal line pair
// by pi/4 gives the result, each output signed toward its input.
std::pair<Vec, Vec> bisector_orthogonalize_2d(const Vec& a, const Vec& b) {
    const Vec u = normalized(a);
    const Vec v = normalized(b);
    if (std::abs(u[0] * v[1] - u[1] * v[0]) < 1e-12)
        throw BuildError("orthogonalize: input directions are parallel");
    const Vec w1 = u + v;
    const Vec w2 = u - v;
    const Vec m = norm(w1) >= norm(w2) ? normalized(w1) : normalized(w2);
    const Vec d1 = rotate45(m);
    const Vec d2 = rotate90(d1);
    const bool a_takes_d1 = std::abs(dot(a, d1)) >= std::abs(dot(a, d2));
    const Vec da = a_takes_d1 ? d1 : d2;
    const Vec db = a_takes_d1 ? d2 : d1;
    const Vec out_a = (dot(a, da) < 0 ? -1.0 : 1.0) * norm(a) * da;
    const Vec out_b = (dot(b, db) < 0 ? -1.0 : 1.0) * norm(b) * db;
    return {out_a, out_b};
}

// Distance of point p to the hyperplane through the points in `base`
// (2 points in 2D, 3 points in 3D).
double hyperplane_distance(const std::vector<Vec>& base, const Vec& p, int dim) {
    Vec n{0, 0, 0};
    if (dim == 2) {
        n = rotate90(base[1] - base[0]);
    } else {
        n = cross(base[1] - base[0], base[2] - base[0]);
    }
    const double nn = norm(n);
    if (nn < 1e-14) throw BuildError("anisotropic scaling: degenerate facet hyperplane");
    return std::abs(dot(p - base[0], n)) / nn;
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[static_cast<size_t>(x)] != x) {
            parent[static_cast<size_t>(x)] = parent[static_cast<size_t>(parent[static_cast<size_t>(x)])];
            x = parent[static_cast<size_t>(x)];
        }
        return x;
    }
    void join(int a, int b) { parent[static_cast<size_t>(find(a))] = find(b); }
};

int edge_axis_in_cell(const Mesh& mesh, const Connectivity& conn, const Edge& e, int cell) {
    const VertexStar& star = conn.stars[static_cast<size_t>(e.a)];
    const int k = star.find_cell(cell);
    if (k < 0) return -1;
    const int code = star.corner[static_cast<size_t>(k)];
    for (int a = 0; a < mesh.dim; ++a)
        if (mesh.corner(cell, code ^ (1 << a)) == e.b) return a;
    return -1;
}

} // namespace

EdgeVectorTable record_edge_vectors(const Mesh& mesh, const Connectivity& conn, const BuildOptions& opts,
                                    const std::vector<Vec>& aniso_scale) {
    EdgeVectorTable table(static_cast<size_t>(mesh.n_vertices()));
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (conn.is_hanging(v)) continue;
        for (int s = 0; s < mesh.dim; ++s) {
            const SlotEdge& se = conn.slots[static_cast<size_t>(v)][static_cast<size_t>(s)];
            SlotEdgeData& out = table[static_cast<size_t>(v)][static_cast<size_t>(s)];
            auto record = [&](int edge_id, int far, bool forward) {
                const Edge& e = conn.edges[static_cast<size_t>(edge_id)];
                // a stub toward a hanging vertex anchors at the d-linear
                // chord point of its host entity
                const Vec target =
                    conn.is_hanging(far)
                        ? conn.hangings[static_cast<size_t>(conn.hanging_index[static_cast<size_t>(far)])].chord_point
                        : mesh.vertices[static_cast<size_t>(far)];
                Vec evec = target - mesh.vertices[static_cast<size_t>(v)];
                if (opts.anisotropic) {
                    const int cell = e.cells.front();
                    const int axis = edge_axis_in_cell(mesh, conn, e, cell);
                    evec = evec / aniso_scale[static_cast<size_t>(cell)][static_cast<size_t>(axis)];
                }
                const double h = opts.level_scaling ? std::ldexp(1.0, -e.level) : e.length;
                if (forward) {
                    out.has_forward = true;
                    out.forward = evec;
                    out.h_forward = h;
                    out.len_forward = norm(evec);
                } else {
                    out.has_backward = true;
                    out.backward = evec;
                    out.h_backward = h;
                    out.len_backward = norm(evec);
                }
            };
            if (se.forward_edge >= 0) record(se.forward_edge, se.forward_vertex, true);
            if (se.backward_edge >= 0) record(se.backward_edge, se.backward_vertex, false);
        }
    }
    return table;
}

Vec average_derivatives(const SlotEdgeData& slot) {
    if (!slot.has_forward && !slot.has_backward)
        throw BuildError("no edge at all along a reference axis (malformed mesh)");
    if (slot.has_forward && slot.has_backward) {
        const double wb = 1.0 / slot.h_backward;
        const double wf = 1.0 / slot.h_forward;
        return (wb * (-1.0 * slot.backward) + wf * slot.forward) / (wb + wf);
    }
    return slot.has_forward ? slot.forward : -1.0 * slot.backward;
}

Vec project_boundary_tangent(const std::vector<Vec>& tangents, const Vec& v) {
    Vec p{0, 0, 0};
    for (const Vec& t : tangents) p += dot(v, t) * t;
    if (norm(p) < 1e-3 * norm(v))
        throw BuildError("degenerate boundary constraint: derivative is orthogonal to the tangent plane");
    return p;
}

std::vector<Vec> orthogonalize_vertex(const std::vector<Vec>& derivs) {
    if (derivs.size() == 2) {
        auto [a, b] = bisector_orthogonalize_2d(derivs[0], derivs[1]);
        return {a, b};
    }
    std::array<Vec, 3> dirs;
    std::array<double, 3> norms{};
    for (int j = 0; j < 3; ++j) {
        norms[static_cast<size_t>(j)] = norm(derivs[static_cast<size_t>(j)]);
        if (norms[static_cast<size_t>(j)] == 0.0) throw BuildError("orthogonalize: zero direction");
        dirs[static_cast<size_t>(j)] = derivs[static_cast<size_t>(j)] / norms[static_cast<size_t>(j)];
    }
    const auto q = polar_factor(dirs);
    std::vector<Vec> out(3);
    for (int j = 0; j < 3; ++j)
        out[static_cast<size_t>(j)] = norms[static_cast<size_t>(j)] * normalized(q[static_cast<size_t>(j)]);
    return out;
}

double scale_derivative_norm(const SlotEdgeData& slot, NormRule rule) {
    if (slot.has_forward && slot.has_backward) {
        if (rule == NormRule::AverageEdge) return 0.5 * (slot.len_forward + slot.len_backward);
        return 0.5 * norm(slot.forward - slot.backward);
    }
    return slot.has_forward ? slot.len_forward : slot.len_backward;
}

std::vector<Vec> compute_aniso_scales(const Mesh& mesh, const Connectivity& conn) {
    const int dim = mesh.dim;
    std::vector<Vec> h(static_cast<size_t>(mesh.n_cells()), Vec{1, 1, 1});
    for (int c = 0; c < mesh.n_cells(); ++c) {
        for (int axis = 0; axis < dim; ++axis) {
            double acc = 0.0;
            for (int side = 0; side < 2; ++side) {
                const auto codes = facet_corner_codes(dim, axis, side);
                double facet_acc = 0.0;
                for (int code : codes) {
                    std::vector<Vec> base;
                    base.push_back(mesh.vertices[static_cast<size_t>(mesh.corner(c, code))]);
                    for (int t = 0; t < dim; ++t) {
                        if (t == axis) continue;
                        base.push_back(mesh.vertices[static_cast<size_t>(mesh.corner(c, code ^ (1 << t)))]);
                    }
                    const Vec across = mesh.vertices[static_cast<size_t>(mesh.corner(c, code ^ (1 << axis)))];
                    facet_acc += hyperplane_distance(base, across, dim);
                }
                acc += facet_acc / static_cast<double>(codes.size());
            }
            h[static_cast<size_t>(c)][static_cast<size_t>(axis)] = 0.5 * acc;
        }
    }

    // share factors along cell lines: cells joined by an edge share the
    // scale in the edge direction
    UnionFind uf(mesh.n_cells() * dim);
    for (const Edge& e : conn.edges) {
        int first = -1;
        for (int c : e.cells) {
            const int axis = edge_axis_in_cell(mesh, conn, e, c);
            const int node = c * dim + axis;
            if (first < 0) first = node;
            else uf.join(first, node);
        }
    }
    std::map<int, std::vector<int>> classes;
    for (int c = 0; c < mesh.n_cells(); ++c)
        for (int axis = 0; axis < dim; ++axis) classes[uf.find(c * dim + axis)].push_back(c * dim + axis);

    std::vector<Vec> scale(static_cast<size_t>(mesh.n_cells()), Vec{1, 1, 1});
    for (const auto& [root, members] : classes) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0, sum = 0.0;
        for (int node : members) {
            const double val = h[static_cast<size_t>(node / dim)][static_cast<size_t>(node % dim)];
            lo = std::min(lo, val);
            hi = std::max(hi, val);
            sum += val;
        }
        if (hi - lo > 1e-9 * hi)
            throw BuildError("anisotropic scaling factors conflict along a cell line (cell " +
                             std::to_string(members.front() / dim) + ", axis " +
                             std::to_string(members.front() % dim) + "): the anisotropy changes side");
        const double val = sum / static_cast<double>(members.size());
        for (int node : members) scale[static_cast<size_t>(node / dim)][static_cast<size_t>(node % dim)] = val;
    }
    return scale;
}

namespace {

// Step 4 for one refinement level: augmentation coefficients for hanging
// entities whose host has this level.
void augment_level(MappingField& field, const Mesh& mesh, const Connectivity& conn, int level) {
    if (mesh.dim == 3) {
        // edge augmentations first
        std::set<int> edge_ids;
        for (const HangingVertexInfo& h : conn.hangings) {
            if (h.host_edge[0] < 0) continue;
            const int id = conn.edge_id(h.host_edge[0], h.host_edge[1]);
            if (id >= 0 && conn.edges[static_cast<size_t>(id)].level == level) edge_ids.insert(id);
        }
        for (int id : edge_ids) {
            const Edge& e = conn.edges[static_cast<size_t>(id)];
            EdgeAug rec;
            rec.cell = e.cells.front();
            rec.edge_axis = edge_axis_in_cell(mesh, conn, e, rec.cell);
            const VertexStar& star = conn.stars[static_cast<size_t>(e.a)];
            rec.end_code = star.corner[static_cast<size_t>(star.find_cell(rec.cell))];
            int u = 0;
            for (int a = 0; a < 3; ++a)
                if (a != rec.edge_axis) rec.u_axis[static_cast<size_t>(u++)] = a;

            const CellCoefficients cc = local_coefficients(field, mesh, conn, rec.cell);
            Vec mid{0, 0, 0};
            for (int a = 0; a < 3; ++a) mid[static_cast<size_t>(a)] = bit(rec.end_code, a) ? 1.0 : -1.0;
            mid[static_cast<size_t>(rec.edge_axis)] = 0.0;
            const JacobianSample J = eval_jacobian(cc, mid);
            const Vec t = J.cols[static_cast<size_t>(rec.edge_axis)];
            const double tn2 = dot(t, t);
            if (tn2 < 1e-24)
                throw BuildError("edge augmentation: degenerate edge tangent at edge (" + std::to_string(e.a) +
                                 "," + std::to_string(e.b) + ")");
            Vec u1 = J.cols[static_cast<size_t>(rec.u_axis[0])];
            Vec u2 = J.cols[static_cast<size_t>(rec.u_axis[1])];
            const Vec v1 = u1 - (dot(u1, t) / tn2) * t;
            const Vec v2 = u2 - (dot(u2, t) / tn2) * t;
            // Fig. 1 within the plane orthogonal to t
            const Vec e1 = normalized(v1);
            Vec e2p = v2 - dot(v2, e1) * e1;
            if (norm(e2p) < 1e-12 * norm(v2))
                throw BuildError("edge augmentation: transverse directions are parallel at edge (" +
                                 std::to_string(e.a) + "," + std::to_string(e.b) + ")");
            const Vec e2 = normalized(e2p);
            auto [w1p, w2p] = bisector_orthogonalize_2d(vec2(dot(v1, e1), dot(v1, e2)), vec2(dot(v2, e1), dot(v2, e2)));
            const Vec w1 = w1p[0] * e1 + w1p[1] * e2;
            const Vec w2 = w2p[0] * e1 + w2p[1] * e2;
            rec.coeff[0] = w1 - u1;
            rec.coeff[1] = w2 - u2;
            field.edge_augs[id] = rec;
        }
    }

    for (size_t i = 0; i < conn.hanging_interfaces.size(); ++i) {
        const HangingInterface& hi = conn.hanging_interfaces[i];
        if (mesh.levels[static_cast<size_t>(hi.coarse.cell)] != level) continue;
        const CellCoefficients cc = local_coefficients(field, mesh, conn, hi.coarse.cell);
        Vec mid{0, 0, 0};
        mid[static_cast<size_t>(hi.coarse.axis)] = hi.coarse.side ? 1.0 : -1.0;
        const JacobianSample J = eval_jacobian(cc, mid);
        const Vec ax = J.cols[static_cast<size_t>(hi.coarse.axis)];
        if (mesh.dim == 2) {
            const int t = hi.coarse.axis == 0 ? 1 : 0;
            const Vec ay = J.cols[static_cast<size_t>(t)];
            const double n2 = dot(ay, ay);
            if (n2 < 1e-24)
                throw BuildError("augmentation: degenerate tangent on the hanging facet of cell " +
                                 std::to_string(hi.coarse.cell));
            field.face_augs[static_cast<int>(i)] = -(dot(ax, ay) / n2) * ay;
        } else {
            int t1 = -1, t2 = -1;
            for (int a = 0; a < 3; ++a) {
                if (a == hi.coarse.axis) continue;
                (t1 < 0 ? t1 : t2) = a;
            }
            const Vec u = J.cols[static_cast<size_t>(t1)];
            const Vec v = J.cols[static_cast<size_t>(t2)];
            const double g11 = dot(u, u), g12 = dot(u, v), g22 = dot(v, v);
            const double det = g11 * g22 - g12 * g12;
            if (std::abs(det) < 1e-24)
                throw BuildError("augmentation: degenerate tangent plane on the hanging facet of cell " +
                                 std::to_string(hi.coarse.cell));
            const double r1 = dot(ax, u), r2 = dot(ax, v);
            const double c1 = (g22 * r1 - g12 * r2) / det;
            const double c2 = (g11 * r2 - g12 * r1) / det;
            field.face_augs[static_cast<int>(i)] = -1.0 * (c1 * u + c2 * v);
        }
    }
}

// Step 5 for one refinement level: constrain hanging vertices whose host has
// this level.
void constrain_level(MappingField& field, const Mesh& mesh, const Connectivity& conn, int level,
                     std::vector<char>& done) {
    for (size_t hix = 0; hix < conn.hangings.size(); ++hix) {
        const HangingVertexInfo& h = conn.hangings[hix];
        if (mesh.levels[static_cast<size_t>(h.host_cell)] != level) continue;
        // host corners must be final
        for (int code = 0; code < mesh.verts_per_cell(); ++code) {
            const int hv = conn.hanging_index[static_cast<size_t>(mesh.corner(h.host_cell, code))];
            if (hv >= 0 && !done[static_cast<size_t>(hv)])
                throw std::logic_error("hanging vertex " + std::to_string(h.vertex) +
                                       ": host cell DoFs are not final (ordering bug)");
        }
        const CellCoefficients host = local_coefficients(field, mesh, conn, h.host_cell);

        const VertexStar& star = conn.stars[static_cast<size_t>(h.vertex)];
        int fine_cell = -1, hv_code = -1;
        std::string err;
        for (size_t k = 0; k < star.cells.size(); ++k) {
            try {
                (void)embedding_into_host(mesh, conn, star.cells[k], h, star.corner[k]);
                fine_cell = star.cells[k];
                hv_code = star.corner[k];
                break;
            } catch (const BuildError& e) {
                err = e.what();
            }
        }
        if (fine_cell < 0) throw BuildError(err);

        const CellEmbedding emb = embedding_into_host(mesh, conn, fine_cell, h, hv_code);
        const auto alphas = hanging_corner_alphas(host, emb, hv_code, mesh.dim);

        VertexDoFs& d = field.dofs[static_cast<size_t>(h.vertex)];
        d.position = alphas[0];
        const AxisMap& frame = star.to_slot[static_cast<size_t>(star.find_cell(fine_cell))];
        const int flevel = mesh.levels[static_cast<size_t>(fine_cell)];
        for (int kappa = 1; kappa < mesh.verts_per_cell(); ++kappa) {
            int slot_mask = 0, sign = 1;
            double s = 1.0;
            for (int a = 0; a < mesh.dim; ++a) {
                if (!bit(kappa, a)) continue;
                slot_mask |= 1 << frame.axis[static_cast<size_t>(a)];
                sign *= frame.sign[static_cast<size_t>(a)];
                s *= axis_scale(field, flevel, fine_cell, a);
            }
            const Vec g = (sign / s) * alphas[static_cast<size_t>(kappa)];
            if (kappa_order({bit(kappa, 0), bit(kappa, 1), bit(kappa, 2)}, mesh.dim) == 1) {
                int slot = 0;
                while (!((slot_mask >> slot) & 1)) ++slot;
                d.derivs[static_cast<size_t>(slot)] = g;
            } else {
                d.higher[slot_mask] = g;
            }
        }
        done[hix] = 1;
    }
}

} // namespace

void compute_augmentation_coeffs(MappingField& field, const Mesh& mesh, const Connectivity& conn) {
    int max_level = 0;
    for (int l : mesh.levels) max_level = std::max(max_level, l);
    for (int l = 0; l <= max_level; ++l) augment_level(field, mesh, conn, l);
}

void constrain_hanging_vertices(MappingField& field, const Mesh& mesh, const Connectivity& conn) {
    std::vector<char> done(conn.hangings.size(), 0);
    int max_level = 0;
    for (int l : mesh.levels) max_level = std::max(max_level, l);
    for (int l = 0; l <= max_level; ++l) constrain_level(field, mesh, conn, l, done);
}

MappingField build_mapping(const Mesh& mesh, const Connectivity& conn, const BuildOptions& opts) {
    const RegularityReport report = check_regularity(mesh, conn);
    if (!report.admissible()) {
        std::string msg = "mesh is not admissible:";
        for (size_t i = 0; i < report.entries.size() && i < 5; ++i) msg += " [" + report.entries[i].reason + "]";
        throw RegularityError(msg);
    }

    MappingField field;
    field.dim = mesh.dim;
    field.options = opts;
    field.dofs.assign(static_cast<size_t>(mesh.n_vertices()), VertexDoFs{});
    field.aniso_scale.assign(static_cast<size_t>(mesh.n_cells()), Vec{1, 1, 1});
    if (opts.anisotropic) field.aniso_scale = compute_aniso_scales(mesh, conn);

    field.edge_h.resize(conn.edges.size());
    for (size_t e = 0; e < conn.edges.size(); ++e)
        field.edge_h[e] = opts.level_scaling ? std::ldexp(1.0, -conn.edges[e].level) : conn.edges[e].length;

    // step 1: positions
    for (int v = 0; v < mesh.n_vertices(); ++v) field.dofs[static_cast<size_t>(v)].position = mesh.vertices[static_cast<size_t>(v)];

    // step 2: edge vectors
    const EdgeVectorTable table = record_edge_vectors(mesh, conn, opts, field.aniso_scale);

    // step 3: weighted means, boundary projection
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (conn.is_hanging(v)) continue;
        auto tangents = mesh.boundary.find(v);
        for (int s = 0; s < mesh.dim; ++s) {
            const SlotEdgeData& slot = table[static_cast<size_t>(v)][static_cast<size_t>(s)];
            Vec a{0, 0, 0};
            try {
                a = average_derivatives(slot);
            } catch (const BuildError&) {
                throw BuildError("vertex " + std::to_string(v) + ": no edge along reference axis " +
                                 std::to_string(s));
            }
            if (slot.has_forward && slot.has_backward && tangents != mesh.boundary.end()) {
                try {
                    a = project_boundary_tangent(tangents->second, a);
                } catch (const BuildError&) {
                    throw BuildError("vertex " + std::to_string(v) +
                                     ": averaged derivative is orthogonal to the boundary tangent plane");
                }
            }
            field.dofs[static_cast<size_t>(v)].derivs[static_cast<size_t>(s)] = a;
        }
    }

    // step 4a: optional orthogonalization at interior vertices
    if (opts.orthogonalize) {
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (conn.vclass[static_cast<size_t>(v)] != VertexClass::Interior) continue;
            std::vector<Vec> dirs(static_cast<size_t>(mesh.dim));
            for (int s = 0; s < mesh.dim; ++s) dirs[static_cast<size_t>(s)] = field.dofs[static_cast<size_t>(v)].derivs[static_cast<size_t>(s)];
            std::vector<Vec> ortho;
            try {
                ortho = orthogonalize_vertex(dirs);
            } catch (const BuildError& e) {
                throw BuildError("vertex " + std::to_string(v) + ": " + e.what());
            }
            for (int s = 0; s < mesh.dim; ++s) field.dofs[static_cast<size_t>(v)].derivs[static_cast<size_t>(s)] = ortho[static_cast<size_t>(s)];
        }
    }

    // step 3/4 epilogue: derivative norms per the chosen rule
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        if (conn.is_hanging(v)) continue;
        for (int s = 0; s < mesh.dim; ++s) {
            const SlotEdgeData& slot = table[static_cast<size_t>(v)][static_cast<size_t>(s)];
            Vec& d = field.dofs[static_cast<size_t>(v)].derivs[static_cast<size_t>(s)];
            const double target = scale_derivative_norm(slot, opts.norm_rule);
            const double n = norm(d);
            if (n < 1e-14 * std::max(target, 1.0))
                throw BuildError("vertex " + std::to_string(v) + ": degenerate derivative direction on axis " +
                                 std::to_string(s));
            d = (target / n) * d;
        }
    }

    // steps 4b and 5, interleaved by host level
    std::vector<char> done(conn.hangings.size(), 0);
    int max_level = 0;
    for (int l : mesh.levels) max_level = std::max(max_level, l);
    const bool augment = opts.orthogonalize && !conn.hangings.empty();
    for (int l = 0; l <= max_level; ++l) {
        if (augment) augment_level(field, mesh, conn, l);
        constrain_level(field, mesh, conn, l, done);
    }
    return field;
}

} // namespace c1mesh
