#include "c1mesh/connectivity.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <sstream>

namespace c1mesh {

namespace {

std::string vtx(int v) { return "vertex " + std::to_string(v); }

[[noreturn]] void reject(const std::string& msg) { throw RegularityError("connectivity: " + msg); }

struct RawFacet {
    FacetRef ref;
    std::vector<int> verts;  // in facet corner code order
    std::vector<int> sorted; // key
    int level = 0;
    bool used = false;
};

int popcount2(int x) {
    int c = 0;
    while (x) {
        c += x & 1;
        x >>= 1;
    }
    return c;
}

} // namespace

AxisMap compose(const AxisMap& first, const AxisMap& then) {
    AxisMap r;
    for (int a = 0; a < 3; ++a) {
        r.axis[static_cast<size_t>(a)] = then.axis[static_cast<size_t>(first.axis[static_cast<size_t>(a)])];
        r.sign[static_cast<size_t>(a)] = then.sign[static_cast<size_t>(first.axis[static_cast<size_t>(a)])] *
                                         first.sign[static_cast<size_t>(a)];
    }
    return r;
}

AxisMap inverse_map(const AxisMap& m, int dim) {
    AxisMap r;
    for (int a = 0; a < dim; ++a) {
        r.axis[static_cast<size_t>(m.axis[static_cast<size_t>(a)])] = a;
        r.sign[static_cast<size_t>(m.axis[static_cast<size_t>(a)])] = m.sign[static_cast<size_t>(a)];
    }
    return r;
}

int axis_map_det(const AxisMap& m, int dim) {
    // parity of the permutation times the product of signs
    int det = 1;
    for (int a = 0; a < dim; ++a) det *= m.sign[static_cast<size_t>(a)];
    std::array<int, 3> p = m.axis;
    for (int a = 0; a < dim; ++a) {
        while (p[static_cast<size_t>(a)] != a) {
            std::swap(p[static_cast<size_t>(a)], p[static_cast<size_t>(p[static_cast<size_t>(a)])]);
            det = -det;
        }
    }
    return det;
}

std::vector<int> facet_corner_codes(int dim, int axis, int side) {
    std::vector<int> tangents;
    for (int a = 0; a < dim; ++a)
        if (a != axis) tangents.push_back(a);
    std::vector<int> codes;
    for (int u = 0; u < (1 << (dim - 1)); ++u) {
        int code = side << axis;
        for (size_t k = 0; k < tangents.size(); ++k) code |= ((u >> k) & 1) << tangents[k];
        codes.push_back(code);
    }
    return codes;
}

int VertexStar::find_cell(int cell) const {
    for (size_t k = 0; k < cells.size(); ++k)
        if (cells[k] == cell) return static_cast<int>(k);
    return -1;
}

int Connectivity::edge_id(int a, int b) const {
    auto it = edge_index.find({std::min(a, b), std::max(a, b)});
    return it == edge_index.end() ? -1 : it->second;
}

namespace {

// Transition between two cells identified along a shared full facet.
// Throws if the identification is not an affine signed permutation or is
// orientation-reversing.
CellEmbedding facet_transition(const Mesh& mesh, const RawFacet& fa, const RawFacet& fb) {
    const int dim = mesh.dim;
    AxisMap m;
    // global id -> code in cell b
    std::map<int, int> code_in_b;
    const auto codes_b = facet_corner_codes(dim, fb.ref.axis, fb.ref.side);
    for (size_t k = 0; k < codes_b.size(); ++k) code_in_b[fb.verts[k]] = codes_b[k];

    const auto codes_a = facet_corner_codes(dim, fa.ref.axis, fa.ref.side);
    std::array<int, 3> flip{0, 0, 0};
    for (int t = 0; t < dim; ++t) {
        if (t == fa.ref.axis) continue;
        // two facet corners differing only in bit t
        const int c0 = codes_a[0];
        const int c1 = c0 ^ (1 << t);
        int g0 = -1, g1 = -1;
        for (size_t k = 0; k < codes_a.size(); ++k) {
            if (codes_a[k] == c0) g0 = fa.verts[k];
            if (codes_a[k] == c1) g1 = fa.verts[k];
        }
        const int b0 = code_in_b.at(g0);
        const int b1 = code_in_b.at(g1);
        const int diff = b0 ^ b1;
        if (popcount2(diff) != 1)
            reject("cells " + std::to_string(fa.ref.cell) + " and " + std::to_string(fb.ref.cell) +
                   " share a facet with incompatible vertex ordering");
        int tb = 0;
        while (!((diff >> tb) & 1)) ++tb;
        m.axis[static_cast<size_t>(t)] = tb;
        m.sign[static_cast<size_t>(t)] = (bit(b0, tb) == bit(c0, t)) ? 1 : -1;
        flip[static_cast<size_t>(t)] = m.sign[static_cast<size_t>(t)] == 1 ? 0 : 1;
    }
    m.axis[static_cast<size_t>(fa.ref.axis)] = fb.ref.axis;
    m.sign[static_cast<size_t>(fa.ref.axis)] = (fa.ref.side != fb.ref.side) ? 1 : -1;

    // verify the whole corner correspondence is affine
    for (size_t k = 0; k < codes_a.size(); ++k) {
        int predicted = fb.ref.side << fb.ref.axis;
        for (int t = 0; t < dim; ++t) {
            if (t == fa.ref.axis) continue;
            predicted |= (bit(codes_a[k], t) ^ flip[static_cast<size_t>(t)]) << m.axis[static_cast<size_t>(t)];
        }
        if (code_in_b.at(fa.verts[k]) != predicted)
            reject("cells " + std::to_string(fa.ref.cell) + " and " + std::to_string(fb.ref.cell) +
                   " share a facet with incompatible vertex ordering");
    }

    if (axis_map_det(m, dim) < 0)
        reject("reflected (orientation-reversing) adjacency between cells " + std::to_string(fa.ref.cell) +
               " and " + std::to_string(fb.ref.cell));

    CellEmbedding e;
    e.axes = m;
    e.scale = 1.0;
    const int na = fa.ref.axis;
    const int nb = fb.ref.axis;
    e.offset[static_cast<size_t>(nb)] = (fb.ref.side ? 1.0 : -1.0) -
                                        m.sign[static_cast<size_t>(na)] * (fa.ref.side ? 1.0 : -1.0);
    return e;
}

// Embedding of a fine interface cell into its coarse neighbor. The shared
// coarse corner anchors the tangent correspondence; mid_of_tangent[tf] gives
// the coarse corner toward which the fine tangent axis tf points.
CellEmbedding fine_to_coarse_embedding(const Mesh& mesh, const FacetRef& fine, int fine_corner_code,
                                       const FacetRef& coarse, int coarse_corner_code,
                                       const std::array<int, 3>& coarse_axis_of_fine_tangent) {
    const int dim = mesh.dim;
    CellEmbedding e;
    e.scale = 0.5;
    for (int tf = 0; tf < dim; ++tf) {
        if (tf == fine.axis) continue;
        const int tc = coarse_axis_of_fine_tangent[static_cast<size_t>(tf)];
        const int dir_f = bit(fine_corner_code, tf) ? -1 : 1;   // into the facet from the shared corner
        const int dir_c = bit(coarse_corner_code, tc) ? -1 : 1;
        e.axes.axis[static_cast<size_t>(tf)] = tc;
        e.axes.sign[static_cast<size_t>(tf)] = dir_f * dir_c;
        e.offset[static_cast<size_t>(tc)] = -0.5 * dir_c;
    }
    e.axes.axis[static_cast<size_t>(fine.axis)] = coarse.axis;
    e.axes.sign[static_cast<size_t>(fine.axis)] = (fine.side != coarse.side) ? 1 : -1;
    e.offset[static_cast<size_t>(coarse.axis)] =
        (coarse.side ? 1.0 : -1.0) -
        0.5 * e.axes.sign[static_cast<size_t>(fine.axis)] * (fine.side ? 1.0 : -1.0);
    return e;
}

struct Builder {
    const Mesh& mesh;
    Connectivity conn;
    std::vector<RawFacet> facets;
    std::map<int, std::vector<int>> singles_by_vertex; // unmatched facet ids per member vertex
    std::vector<int> edge_level_of_vertexpair;

    explicit Builder(const Mesh& m) : mesh(m) {}

    void vertex_stars() {
        conn.stars.resize(static_cast<size_t>(mesh.n_vertices()));
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for (int code = 0; code < mesh.verts_per_cell(); ++code) {
                auto& star = conn.stars[static_cast<size_t>(mesh.corner(c, code))];
                star.cells.push_back(c);
                star.corner.push_back(code);
            }
        }
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            const auto& star = conn.stars[static_cast<size_t>(v)];
            if (star.cells.empty()) reject(vtx(v) + " is not referenced by any cell");
            int lmin = mesh.levels[static_cast<size_t>(star.cells.front())];
            int lmax = lmin;
            for (int c : star.cells) {
                lmin = std::min(lmin, mesh.levels[static_cast<size_t>(c)]);
                lmax = std::max(lmax, mesh.levels[static_cast<size_t>(c)]);
            }
            if (lmax - lmin > 1)
                reject("multi-level irregularity at " + vtx(v) + " (incident levels " + std::to_string(lmin) +
                       ".." + std::to_string(lmax) + "); only one-irregular meshes are supported");
        }
    }

    void whole_edges() {
        std::map<std::pair<int, int>, std::vector<int>> owners;
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for (int a = 0; a < mesh.dim; ++a) {
                for (int code = 0; code < mesh.verts_per_cell(); ++code) {
                    if (bit(code, a)) continue;
                    const int va = mesh.corner(c, code);
                    const int vb = mesh.corner(c, code | (1 << a));
                    owners[{std::min(va, vb), std::max(va, vb)}].push_back(c);
                }
            }
        }
        for (auto& [key, cells] : owners) {
            Edge e;
            e.a = key.first;
            e.b = key.second;
            std::sort(cells.begin(), cells.end());
            cells.erase(std::unique(cells.begin(), cells.end()), cells.end());
            e.cells = cells;
            e.level = mesh.levels[static_cast<size_t>(cells.front())];
            for (int c : cells) {
                if (mesh.levels[static_cast<size_t>(c)] != e.level)
                    reject("edge (" + std::to_string(e.a) + "," + std::to_string(e.b) +
                           ") is adjacent to cells of different levels along its own direction");
            }
            e.length = norm(mesh.vertices[static_cast<size_t>(e.b)] - mesh.vertices[static_cast<size_t>(e.a)]);
            conn.edge_index[key] = static_cast<int>(conn.edges.size());
            conn.edges.push_back(std::move(e));
        }
    }

    void collect_facets() {
        for (int c = 0; c < mesh.n_cells(); ++c) {
            for (int axis = 0; axis < mesh.dim; ++axis) {
                for (int side = 0; side < 2; ++side) {
                    RawFacet f;
                    f.ref = {c, axis, side};
                    for (int code : facet_corner_codes(mesh.dim, axis, side)) f.verts.push_back(mesh.corner(c, code));
                    f.sorted = f.verts;
                    std::sort(f.sorted.begin(), f.sorted.end());
                    f.level = mesh.levels[static_cast<size_t>(c)];
                    facets.push_back(std::move(f));
                }
            }
        }
        conn.facet_info.assign(static_cast<size_t>(mesh.n_cells()),
                               std::vector<FacetInfo>(static_cast<size_t>(2 * mesh.dim)));
    }

    FacetInfo& info_of(const FacetRef& r) {
        return conn.facet_info[static_cast<size_t>(r.cell)][static_cast<size_t>(r.axis * 2 + r.side)];
    }

    void match_conforming() {
        std::map<std::vector<int>, std::vector<int>> by_key;
        for (size_t i = 0; i < facets.size(); ++i) by_key[facets[i].sorted].push_back(static_cast<int>(i));
        for (const auto& [key, ids] : by_key) {
            if (ids.size() > 2) {
                std::ostringstream os;
                os << "non-manifold configuration: facet {";
                for (size_t k = 0; k < key.size(); ++k) os << (k ? "," : "") << key[k];
                os << "} is shared by " << ids.size() << " cells";
                reject(os.str());
            }
            if (ids.size() != 2) continue;
            RawFacet& fa = facets[static_cast<size_t>(ids[0])];
            RawFacet& fb = facets[static_cast<size_t>(ids[1])];
            if (fa.level != fb.level)
                reject("cells " + std::to_string(fa.ref.cell) + " and " + std::to_string(fb.ref.cell) +
                       " share a full facet but have different refinement levels");
            NeighborRecord rec;
            const bool order = fa.ref.cell < fb.ref.cell;
            const RawFacet& lo = order ? fa : fb;
            const RawFacet& hi = order ? fb : fa;
            rec.a = lo.ref;
            rec.b = hi.ref;
            rec.a_to_b = facet_transition(mesh, lo, hi);
            info_of(fa.ref) = {FacetInfo::Conforming, static_cast<int>(conn.neighbors.size())};
            info_of(fb.ref) = {FacetInfo::Conforming, static_cast<int>(conn.neighbors.size())};
            conn.neighbors.push_back(std::move(rec));
            fa.used = fb.used = true;
        }
        for (size_t i = 0; i < facets.size(); ++i) {
            if (facets[i].used) continue;
            for (int v : facets[i].sorted) singles_by_vertex[v].push_back(static_cast<int>(i));
        }
    }

    void register_hanging(int v, int host_cell, const Vec& ref, std::array<int, 2> host_edge,
                          const Vec& chord) {
        auto& idx = conn.hanging_index[static_cast<size_t>(v)];
        if (idx >= 0) return; // first registration wins; traces agree by construction
        HangingVertexInfo h;
        h.vertex = v;
        h.host_cell = host_cell;
        h.host_ref = ref;
        h.host_edge = host_edge;
        h.chord_point = chord;
        idx = static_cast<int>(conn.hangings.size());
        conn.hangings.push_back(h);
        conn.vclass[static_cast<size_t>(v)] = VertexClass::Hanging;
    }

    Vec corner_ref(int code) const {
        Vec r{0, 0, 0};
        for (int a = 0; a < mesh.dim; ++a) r[static_cast<size_t>(a)] = bit(code, a) ? 1.0 : -1.0;
        return r;
    }

    // The diagonal corner of vertex g inside fine facet f (the facet corner
    // differing from g in every tangent bit).
    int facet_diagonal(const RawFacet& f, int g) const {
        const auto codes = facet_corner_codes(mesh.dim, f.ref.axis, f.ref.side);
        int cg = -1;
        for (size_t k = 0; k < codes.size(); ++k)
            if (f.verts[k] == g) cg = codes[k];
        if (cg < 0) return -1;
        int diag = cg;
        for (int t = 0; t < mesh.dim; ++t)
            if (t != f.ref.axis) diag ^= 1 << t;
        for (size_t k = 0; k < codes.size(); ++k)
            if (codes[k] == diag) return f.verts[k];
        return -1;
    }

    void match_hanging_2d() {
        for (size_t ci = 0; ci < facets.size(); ++ci) {
            RawFacet& fc = facets[ci];
            if (fc.used) continue;
            const int a = fc.verts[0];
            const int b = fc.verts[1];
            int u1 = -1, u2 = -1, mid = -1;
            for (int cand1 : singles_by_vertex[a]) {
                const RawFacet& f1 = facets[static_cast<size_t>(cand1)];
                if (f1.used || f1.level != fc.level + 1) continue;
                const int m = f1.verts[0] == a ? f1.verts[1] : f1.verts[0];
                if (m == b) continue;
                for (int cand2 : singles_by_vertex[b]) {
                    const RawFacet& f2 = facets[static_cast<size_t>(cand2)];
                    if (f2.used || f2.level != fc.level + 1 || cand2 == cand1) continue;
                    const int m2 = f2.verts[0] == b ? f2.verts[1] : f2.verts[0];
                    if (m2 == m) {
                        u1 = cand1;
                        u2 = cand2;
                        mid = m;
                        break;
                    }
                }
                if (mid >= 0) break;
            }
            if (mid < 0) continue;

            HangingInterface hi;
            hi.coarse = fc.ref;
            hi.center_vertex = mid;
            const auto coarse_codes = facet_corner_codes(2, fc.ref.axis, fc.ref.side);
            const int tangent_c = fc.ref.axis == 0 ? 1 : 0;
            for (int k = 0; k < 2; ++k) {
                const int corner_id = fc.verts[static_cast<size_t>(k)];
                const RawFacet& ff = facets[static_cast<size_t>(k == 0 ? u1 : u2)];
                HangingPiece piece;
                piece.fine = ff.ref;
                piece.coarse_corner = corner_id;
                const auto fine_codes = facet_corner_codes(2, ff.ref.axis, ff.ref.side);
                int fine_corner_code = -1;
                for (size_t q = 0; q < fine_codes.size(); ++q)
                    if (ff.verts[q] == corner_id) fine_corner_code = fine_codes[q];
                std::array<int, 3> axis_of{-1, -1, -1};
                axis_of[static_cast<size_t>(ff.ref.axis == 0 ? 1 : 0)] = tangent_c;
                piece.fine_to_coarse = fine_to_coarse_embedding(mesh, ff.ref, fine_corner_code, fc.ref,
                                                                coarse_codes[static_cast<size_t>(k)], axis_of);
                hi.pieces.push_back(piece);
            }
            facets[ci].used = true;
            facets[static_cast<size_t>(u1)].used = true;
            facets[static_cast<size_t>(u2)].used = true;
            info_of(fc.ref) = {FacetInfo::CoarseSide, static_cast<int>(conn.hanging_interfaces.size())};
            info_of(hi.pieces[0].fine) = {FacetInfo::FineSide, static_cast<int>(conn.hanging_interfaces.size())};
            info_of(hi.pieces[1].fine) = {FacetInfo::FineSide, static_cast<int>(conn.hanging_interfaces.size())};

            Vec mid_ref = corner_ref(coarse_codes[0]);
            mid_ref[static_cast<size_t>(tangent_c)] = 0.0;
            const Vec chord = 0.5 * (mesh.vertices[static_cast<size_t>(a)] + mesh.vertices[static_cast<size_t>(b)]);
            register_hanging(mid, fc.ref.cell, mid_ref, {std::min(a, b), std::max(a, b)}, chord);
            conn.hanging_interfaces.push_back(std::move(hi));
        }
    }

    void match_hanging_3d() {
        for (size_t ci = 0; ci < facets.size(); ++ci) {
            RawFacet& fc = facets[ci];
            if (fc.used) continue;
            const auto coarse_codes = facet_corner_codes(3, fc.ref.axis, fc.ref.side);

            std::array<int, 4> piece_id{-1, -1, -1, -1};
            int center = -1;
            bool ok = true;
            for (int k = 0; k < 4 && ok; ++k) {
                const int g = fc.verts[static_cast<size_t>(k)];
                int found = -1;
                for (int cand : singles_by_vertex[g]) {
                    const RawFacet& ff = facets[static_cast<size_t>(cand)];
                    if (ff.used || ff.level != fc.level + 1) continue;
                    bool taken = false;
                    for (int q = 0; q < k; ++q) taken |= piece_id[static_cast<size_t>(q)] == cand;
                    if (taken) continue;
                    const int diag = facet_diagonal(ff, g);
                    if (diag < 0) continue;
                    if (center < 0 || diag == center) {
                        if (center < 0) center = diag;
                        found = cand;
                        break;
                    }
                }
                if (found < 0) ok = false;
                piece_id[static_cast<size_t>(k)] = found;
            }
            if (!ok || center < 0) continue;

            // shared edge midpoints between adjacent pieces
            std::map<std::pair<int, int>, int> mid_of_edge; // (corner k1,k2) -> vertex
            bool chain_ok = true;
            for (int k1 = 0; k1 < 4 && chain_ok; ++k1) {
                for (int k2 = k1 + 1; k2 < 4 && chain_ok; ++k2) {
                    if (popcount2(coarse_codes[static_cast<size_t>(k1)] ^ coarse_codes[static_cast<size_t>(k2)]) != 1)
                        continue; // not an edge of the coarse facet
                    const RawFacet& f1 = facets[static_cast<size_t>(piece_id[static_cast<size_t>(k1)])];
                    const RawFacet& f2 = facets[static_cast<size_t>(piece_id[static_cast<size_t>(k2)])];
                    std::vector<int> common;
                    std::set_intersection(f1.sorted.begin(), f1.sorted.end(), f2.sorted.begin(), f2.sorted.end(),
                                          std::back_inserter(common));
                    common.erase(std::remove(common.begin(), common.end(), center), common.end());
                    if (common.size() != 1) {
                        chain_ok = false;
                        break;
                    }
                    mid_of_edge[{k1, k2}] = common.front();
                }
            }
            if (!chain_ok || mid_of_edge.size() != 4) continue;

            HangingInterface hi;
            hi.coarse = fc.ref;
            hi.center_vertex = center;
            const int idx = static_cast<int>(conn.hanging_interfaces.size());
            info_of(fc.ref) = {FacetInfo::CoarseSide, idx};
            fc.used = true;

            for (int k = 0; k < 4; ++k) {
                RawFacet& ff = facets[static_cast<size_t>(piece_id[static_cast<size_t>(k)])];
                ff.used = true;
                info_of(ff.ref) = {FacetInfo::FineSide, idx};
                HangingPiece piece;
                piece.fine = ff.ref;
                piece.coarse_corner = fc.verts[static_cast<size_t>(k)];
                const auto fine_codes = facet_corner_codes(3, ff.ref.axis, ff.ref.side);
                int fine_corner_code = -1;
                for (size_t q = 0; q < fine_codes.size(); ++q)
                    if (ff.verts[q] == piece.coarse_corner) fine_corner_code = fine_codes[q];
                // map each fine tangent axis to a coarse tangent axis through
                // the edge midpoint its facet edge leads to
                std::array<int, 3> axis_of{-1, -1, -1};
                for (int tf = 0; tf < 3; ++tf) {
                    if (tf == ff.ref.axis) continue;
                    const int neighbor_code = fine_corner_code ^ (1 << tf);
                    int neighbor_vertex = -1;
                    for (size_t q = 0; q < fine_codes.size(); ++q)
                        if (fine_codes[q] == neighbor_code) neighbor_vertex = ff.verts[q];
                    // which coarse facet edge does this midpoint belong to?
                    int tc = -1;
                    for (const auto& [kk, mv] : mid_of_edge) {
                        if (mv != neighbor_vertex) continue;
                        if (kk.first != k && kk.second != k) continue;
                        const int other = kk.first == k ? kk.second : kk.first;
                        tc = 0;
                        const int diffc = coarse_codes[static_cast<size_t>(k)] ^ coarse_codes[static_cast<size_t>(other)];
                        while (!((diffc >> tc) & 1)) ++tc;
                    }
                    if (tc < 0) {
                        chain_ok = false;
                        break;
                    }
                    axis_of[static_cast<size_t>(tf)] = tc;
                }
                if (!chain_ok)
                    reject("hanging interface of cell " + std::to_string(fc.ref.cell) + " has inconsistent fine facets");
                piece.fine_to_coarse =
                    fine_to_coarse_embedding(mesh, ff.ref, fine_corner_code, fc.ref,
                                             coarse_codes[static_cast<size_t>(k)], axis_of);
                hi.pieces.push_back(piece);
            }

            // register hangings: center + the four edge midpoints
            Vec center_ref{0, 0, 0};
            center_ref[static_cast<size_t>(fc.ref.axis)] = fc.ref.side ? 1.0 : -1.0;
            Vec face_chord{0, 0, 0};
            for (int vtx_id : fc.verts) face_chord += 0.25 * mesh.vertices[static_cast<size_t>(vtx_id)];
            register_hanging(center, fc.ref.cell, center_ref, {-1, -1}, face_chord);
            for (const auto& [kk, mv] : mid_of_edge) {
                const int c1 = coarse_codes[static_cast<size_t>(kk.first)];
                const int c2 = coarse_codes[static_cast<size_t>(kk.second)];
                Vec ref = corner_ref(c1);
                int tc = 0;
                while (!(((c1 ^ c2) >> tc) & 1)) ++tc;
                ref[static_cast<size_t>(tc)] = 0.0;
                const int va = fc.verts[static_cast<size_t>(kk.first)];
                const int vb = fc.verts[static_cast<size_t>(kk.second)];
                const Vec chord = 0.5 * (mesh.vertices[static_cast<size_t>(va)] + mesh.vertices[static_cast<size_t>(vb)]);
                register_hanging(mv, fc.ref.cell, ref, {std::min(va, vb), std::max(va, vb)}, chord);
                hi.edge_mid_vertices.push_back(mv);
            }
            conn.hanging_interfaces.push_back(std::move(hi));
        }
    }

    // Hanging vertices in the middle of a coarse edge whose faces are all
    // conforming (edge-neighbor refinement in 3D).
    void match_hanging_edges_3d() {
        for (const Edge& e : conn.edges) {
            // look for m with whole edges (a,m) and (m,b) one level finer
            for (const Edge& e1 : conn.edges) {
                if (e1.level != e.level + 1) continue;
                int m = -1;
                if (e1.a == e.a) m = e1.b;
                else if (e1.b == e.a) m = e1.a;
                else continue;
                if (m == e.b || conn.hanging_index[static_cast<size_t>(m)] >= 0) continue;
                const int id2 = conn.edge_id(m, e.b);
                if (id2 < 0 || conn.edges[static_cast<size_t>(id2)].level != e.level + 1) continue;
                if (!edges_aligned(e1, conn.edges[static_cast<size_t>(id2)], m)) continue;
                // locate (e.a, e.b) in the host cell
                const int host = e.cells.front();
                const auto& star = conn.stars[static_cast<size_t>(e.a)];
                const int k = star.find_cell(host);
                const int ca = star.corner[static_cast<size_t>(k)];
                int axis = -1;
                for (int a = 0; a < mesh.dim; ++a)
                    if (mesh.corner(host, ca ^ (1 << a)) == e.b) axis = a;
                if (axis < 0) continue;
                Vec ref = corner_ref(ca);
                ref[static_cast<size_t>(axis)] = 0.0;
                const Vec chord =
                    0.5 * (mesh.vertices[static_cast<size_t>(e.a)] + mesh.vertices[static_cast<size_t>(e.b)]);
                register_hanging(m, host, ref, {e.a, e.b}, chord);
            }
        }
    }

    // Do fine edges (p,m) and (m,q) continue each other across m?
    bool edges_aligned(const Edge& e1, const Edge& e2, int m) {
        for (int c1 : e1.cells) {
            const auto& star = conn.stars[static_cast<size_t>(m)];
            const int k1 = star.find_cell(c1);
            if (k1 < 0) continue;
            const int cm = star.corner[static_cast<size_t>(k1)];
            const int p = e1.a == m ? e1.b : e1.a;
            int axis = -1;
            for (int a = 0; a < mesh.dim; ++a)
                if (mesh.corner(c1, cm ^ (1 << a)) == p) axis = a;
            if (axis < 0) continue;
            // step across the facet of c1 at the m end of this axis
            const FacetInfo& fi =
                conn.facet_info[static_cast<size_t>(c1)][static_cast<size_t>(axis * 2 + bit(cm, axis))];
            if (fi.kind != FacetInfo::Conforming) continue;
            const NeighborRecord& nb = conn.neighbors[static_cast<size_t>(fi.index)];
            const bool lo = nb.a.cell == c1;
            const int c2 = lo ? nb.b.cell : nb.a.cell;
            const AxisMap map = lo ? nb.a_to_b.axes : inverse_map(nb.a_to_b.axes, mesh.dim);
            const int axis2 = map.axis[static_cast<size_t>(axis)];
            const int k2 = conn.stars[static_cast<size_t>(m)].find_cell(c2);
            if (k2 < 0) continue;
            const int cm2 = conn.stars[static_cast<size_t>(m)].corner[static_cast<size_t>(k2)];
            const int q = e2.a == m ? e2.b : e2.a;
            if (mesh.corner(c2, cm2 ^ (1 << axis2)) == q) return true;
        }
        return false;
    }

    void classify_boundary() {
        for (const RawFacet& f : facets) {
            if (f.used) continue;
            info_of(f.ref) = {FacetInfo::Boundary, -1};
            for (int v : f.verts) {
                if (conn.vclass[static_cast<size_t>(v)] != VertexClass::Hanging)
                    conn.vclass[static_cast<size_t>(v)] = VertexClass::Boundary;
            }
        }
    }

    void build_frames() {
        // per-vertex transition lists: (cell_from, cell_to, axis map from->to)
        struct Trans {
            int from, to;
            AxisMap map;
        };
        std::map<int, std::vector<Trans>> at_vertex;
        auto add = [&](int v, int c1, int c2, const AxisMap& m) {
            at_vertex[v].push_back({c1, c2, m});
            at_vertex[v].push_back({c2, c1, inverse_map(m, mesh.dim)});
        };
        for (const NeighborRecord& nb : conn.neighbors) {
            for (int code : facet_corner_codes(mesh.dim, nb.a.axis, nb.a.side))
                add(mesh.corner(nb.a.cell, code), nb.a.cell, nb.b.cell, nb.a_to_b.axes);
        }
        for (const HangingInterface& hi : conn.hanging_interfaces) {
            for (const HangingPiece& p : hi.pieces)
                add(p.coarse_corner, p.fine.cell, hi.coarse.cell, p.fine_to_coarse.axes);
        }

        for (int v = 0; v < mesh.n_vertices(); ++v) {
            VertexStar& star = conn.stars[static_cast<size_t>(v)];
            star.to_slot.assign(star.cells.size(), AxisMap{});
            std::vector<char> visited(star.cells.size(), 0);
            std::deque<int> queue;
            visited[0] = 1;
            queue.push_back(0);
            while (!queue.empty()) {
                const int k = queue.front();
                queue.pop_front();
                const int cell = star.cells[static_cast<size_t>(k)];
                auto it = at_vertex.find(v);
                if (it == at_vertex.end()) continue;
                for (const Trans& t : it->second) {
                    if (t.from != cell) continue;
                    const int k2 = star.find_cell(t.to);
                    if (k2 < 0) continue;
                    // frame of `to`: local axis -> slot = inverse(map) then frame(from)
                    const AxisMap frame2 = compose(inverse_map(t.map, mesh.dim), star.to_slot[static_cast<size_t>(k)]);
                    if (!visited[static_cast<size_t>(k2)]) {
                        visited[static_cast<size_t>(k2)] = 1;
                        star.to_slot[static_cast<size_t>(k2)] = frame2;
                        queue.push_back(k2);
                    } else {
                        const AxisMap& have = star.to_slot[static_cast<size_t>(k2)];
                        for (int a = 0; a < mesh.dim; ++a) {
                            if (have.axis[static_cast<size_t>(a)] != frame2.axis[static_cast<size_t>(a)] ||
                                have.sign[static_cast<size_t>(a)] != frame2.sign[static_cast<size_t>(a)]) {
                                star.frame_ok = false;
                                star.issue = "incompatible cell orientations around " + vtx(v);
                            }
                        }
                    }
                }
            }
            for (size_t k = 0; k < star.cells.size(); ++k) {
                if (!visited[k]) {
                    star.frame_ok = false;
                    star.issue = "cell fan around " + vtx(v) + " is not facet-connected";
                }
            }
        }
    }

    void build_slots() {
        conn.slots.assign(static_cast<size_t>(mesh.n_vertices()), {});
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (conn.is_hanging(v)) continue;
            const VertexStar& star = conn.stars[static_cast<size_t>(v)];
            if (!star.frame_ok) continue;
            auto& slots = conn.slots[static_cast<size_t>(v)];
            for (size_t k = 0; k < star.cells.size(); ++k) {
                const int cell = star.cells[k];
                const int code = star.corner[k];
                for (int a = 0; a < mesh.dim; ++a) {
                    int far = mesh.corner(cell, code ^ (1 << a));
                    if (conn.is_hanging(far)) {
                        const auto& h = conn.hangings[static_cast<size_t>(conn.hanging_index[static_cast<size_t>(far)])];
                        // along the host entity the edge runs to the far coarse
                        // endpoint; perpendicular stubs keep the fine edge and
                        // later anchor at the d-linear chord point
                        if (h.host_edge[0] == v) far = h.host_edge[1];
                        else if (h.host_edge[1] == v) far = h.host_edge[0];
                    }
                    const int slot = star.to_slot[k].axis[static_cast<size_t>(a)];
                    const int gsign = star.to_slot[k].sign[static_cast<size_t>(a)] * (bit(code, a) ? -1 : 1);
                    const int eid = conn.edge_id(v, far);
                    if (eid < 0)
                        reject("missing edge between " + vtx(v) + " and " + vtx(far));
                    SlotEdge& se = slots[static_cast<size_t>(slot)];
                    int& fv = gsign > 0 ? se.forward_vertex : se.backward_vertex;
                    int& fe = gsign > 0 ? se.forward_edge : se.backward_edge;
                    if (fv >= 0 && fv != far)
                        reject("inconsistent edge structure at " + vtx(v) +
                               " (conflicting neighbors " + std::to_string(fv) + " and " + std::to_string(far) +
                               " along one direction; is a coarse facet only partially refined?)");
                    fv = far;
                    fe = eid;
                }
            }
        }
    }

    Connectivity run() {
        conn.dim = mesh.dim;
        conn.vclass.assign(static_cast<size_t>(mesh.n_vertices()), VertexClass::Interior);
        conn.hanging_index.assign(static_cast<size_t>(mesh.n_vertices()), -1);
        vertex_stars();
        whole_edges();
        collect_facets();
        match_conforming();
        if (mesh.dim == 2) match_hanging_2d();
        else match_hanging_3d();
        if (mesh.dim == 3) match_hanging_edges_3d();
        classify_boundary();
        build_frames();
        build_slots();
        return std::move(conn);
    }
};

} // namespace

Connectivity build_connectivity(const Mesh& mesh) {
    Builder b(mesh);
    return b.run();
}

RegularityReport check_regularity(const Mesh& mesh, const Connectivity& conn) {
    RegularityReport report;
    for (int v = 0; v < mesh.n_vertices(); ++v) {
        const VertexStar& star = conn.stars[static_cast<size_t>(v)];
        const int count = static_cast<int>(star.cells.size());
        if (!star.frame_ok) {
            report.entries.push_back({v, count, star.issue});
            continue;
        }
        if (conn.vclass[static_cast<size_t>(v)] != VertexClass::Interior) continue;
        if (count != (1 << mesh.dim)) {
            report.entries.push_back({v, count,
                                      "interior vertex with " + std::to_string(count) + " incident cells (expected " +
                                          std::to_string(1 << mesh.dim) + ")"});
        }
    }
    return report;
}

OppositePairs opposite_edge_pairs(const Connectivity& conn, int vertex) {
    if (conn.is_hanging(vertex))
        throw std::invalid_argument("opposite_edge_pairs: vertex " + std::to_string(vertex) + " is hanging");
    OppositePairs result;
    const auto& slots = conn.slots[static_cast<size_t>(vertex)];
    for (int s = 0; s < conn.dim; ++s) {
        const SlotEdge& se = slots[static_cast<size_t>(s)];
        if (se.forward_edge >= 0 && se.backward_edge >= 0)
            result.pairs.push_back({se.backward_edge, se.forward_edge});
        else if (se.forward_edge >= 0)
            result.unpaired.push_back(se.forward_edge);
        else if (se.backward_edge >= 0)
            result.unpaired.push_back(se.backward_edge);
    }
    return result;
}

} // namespace c1mesh
