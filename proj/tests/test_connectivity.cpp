#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "test_support.hpp"

#include <random>

using namespace c1mesh;
using testsup::cartesian;

TEST_CASE("two-cell strip: one interior facet") {
    const Mesh m = cartesian(2, 1);
    const Connectivity conn = build_connectivity(m);
    CHECK(conn.neighbors.size() == 1);
    CHECK(conn.edges.size() == 7); // m(n+1) + n(m+1)
    CHECK(conn.hangings.empty());
}

TEST_CASE("edge count in Cartesian meshes") {
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> d(1, 5);
    for (int trial = 0; trial < 8; ++trial) {
        const int m = d(rng), n = d(rng);
        const Connectivity conn = build_connectivity(cartesian(m, n));
        CHECK(static_cast<int>(conn.edges.size()) == m * (n + 1) + n * (m + 1));
    }
}

TEST_CASE("edges are stored once with canonical direction") {
    const Connectivity conn = build_connectivity(cartesian(3, 3));
    for (size_t e = 0; e < conn.edges.size(); ++e) {
        CHECK(conn.edges[e].a < conn.edges[e].b);
        if (e > 0)
            CHECK(std::make_pair(conn.edges[e - 1].a, conn.edges[e - 1].b) <
                  std::make_pair(conn.edges[e].a, conn.edges[e].b));
    }
}

TEST_CASE("opposite pairs at the center of a 3x3 mesh") {
    const Mesh m = cartesian(3, 3);
    const Connectivity conn = build_connectivity(m);
    const int center = 1 * 4 + 1 + 4; // vertex (1,2)? use (1,1): j*(m+1)+i
    const int v = 1 * 4 + 1;
    (void)center;
    const OppositePairs p = opposite_edge_pairs(conn, v);
    CHECK(p.pairs.size() == 2);
    CHECK(p.unpaired.empty());
    // the slot pairs connect (0,1)-(2,1) and (1,0)-(1,2)
    for (const auto& pr : p.pairs) {
        const Edge& b = conn.edges[static_cast<size_t>(pr.backward_edge)];
        const Edge& f = conn.edges[static_cast<size_t>(pr.forward_edge)];
        CHECK(((b.a == v) || (b.b == v)));
        CHECK(((f.a == v) || (f.b == v)));
        CHECK(pr.backward_edge != pr.forward_edge);
    }
}

TEST_CASE("corner vertex: no pairs, two unpaired edges") {
    const Connectivity conn = build_connectivity(cartesian(1, 1));
    const OppositePairs p = opposite_edge_pairs(conn, 0);
    CHECK(p.pairs.empty());
    CHECK(p.unpaired.size() == 2);
}

TEST_CASE("cross configuration pairs the spokes") {
    Mesh m = testsup::cross_mesh();
    const Connectivity conn = build_connectivity(m);
    CHECK(check_regularity(m, conn).admissible());
    const OppositePairs p = opposite_edge_pairs(conn, 0);
    REQUIRE(p.pairs.size() == 2);
    // pairs are (l,r) and (b,t): edge endpoints {0,1}+{0,2} and {0,3}+{0,4}
    auto other = [&](int eid) {
        const Edge& e = conn.edges[static_cast<size_t>(eid)];
        return e.a == 0 ? e.b : e.a;
    };
    std::set<std::set<int>> got;
    for (const auto& pr : p.pairs) got.insert({other(pr.backward_edge), other(pr.forward_edge)});
    CHECK(got == std::set<std::set<int>>{{1, 2}, {3, 4}});
}

TEST_CASE("pairing is coordinate-free") {
    Mesh m = testsup::cross_mesh();
    const Connectivity before = build_connectivity(m);
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> jitter(-0.2, 0.2);
    for (Vec& v : m.vertices) {
        v[0] += jitter(rng);
        v[1] += jitter(rng);
    }
    const Connectivity after = build_connectivity(m);
    for (int v = 0; v < m.n_vertices(); ++v) {
        const OppositePairs a = opposite_edge_pairs(before, v);
        const OppositePairs b = opposite_edge_pairs(after, v);
        REQUIRE(a.pairs.size() == b.pairs.size());
        for (size_t k = 0; k < a.pairs.size(); ++k) {
            CHECK(a.pairs[k].backward_edge == b.pairs[k].backward_edge);
            CHECK(a.pairs[k].forward_edge == b.pairs[k].forward_edge);
        }
        CHECK(a.unpaired == b.unpaired);
    }
}

TEST_CASE("one-irregular interface is detected topologically") {
    const Mesh m = testsup::load("hanging_min.json");
    const Connectivity conn = build_connectivity(m);
    REQUIRE(conn.hanging_interfaces.size() == 1);
    const HangingInterface& hi = conn.hanging_interfaces[0];
    CHECK(hi.coarse.cell == 0);
    CHECK(hi.pieces.size() == 2);
    CHECK(hi.center_vertex == 7);
    CHECK(conn.vclass[7] == VertexClass::Hanging);
    const HangingVertexInfo& h = conn.hangings[static_cast<size_t>(conn.hanging_index[7])];
    CHECK(h.host_cell == 0);
    CHECK(h.host_edge == std::array<int, 2>{1, 3});
    // the coarse facet is registered on both sides
    CHECK(conn.facet_info[0][0 * 2 + 1].kind == FacetInfo::CoarseSide);
    CHECK(conn.facet_info[1][0 * 2 + 0].kind == FacetInfo::FineSide);
    // regularity ignores hanging vertices
    CHECK(check_regularity(m, conn).admissible());
    CHECK_THROWS_AS(opposite_edge_pairs(conn, 7), std::invalid_argument);
}

TEST_CASE("2x2x2 cube: center vertex has 8 incident cells") {
    const Mesh m = testsup::load("cube_2x2x2.json");
    const Connectivity conn = build_connectivity(m);
    CHECK(check_regularity(m, conn).admissible());
    int center = -1;
    for (int v = 0; v < m.n_vertices(); ++v)
        if (norm(m.vertices[static_cast<size_t>(v)] - vec3(1, 1, 1)) == 0.0) center = v;
    REQUIRE(center >= 0);
    CHECK(conn.stars[static_cast<size_t>(center)].cells.size() == 8);
    CHECK(conn.vclass[static_cast<size_t>(center)] == VertexClass::Interior);
    const OppositePairs p = opposite_edge_pairs(conn, center);
    CHECK(p.pairs.size() == 3);
}

TEST_CASE("irregular interior vertex (valence 3) is reported") {
    // three quads closing around one interior vertex
    Mesh m;
    m.dim = 2;
    const double pi = std::acos(-1.0);
    m.vertices.push_back(vec2(0, 0)); // center
    for (int k = 0; k < 3; ++k) {
        const double a = 2 * pi * k / 3;
        m.vertices.push_back(vec2(std::cos(a), std::sin(a))); // spokes 1..3
    }
    for (int k = 0; k < 3; ++k) {
        const double a = 2 * pi * (k + 0.5) / 3;
        m.vertices.push_back(vec2(1.6 * std::cos(a), 1.6 * std::sin(a))); // outer 4..6
    }
    for (int k = 0; k < 3; ++k) m.cells.push_back({0, 1 + k, 1 + (k + 1) % 3, 4 + k});
    m.levels.assign(3, 0);
    m.parents.assign(3, -1);
    const Connectivity conn = build_connectivity(m);
    const RegularityReport report = check_regularity(m, conn);
    CHECK(!report.admissible());
    bool found = false;
    for (const auto& e : report.entries) found |= e.vertex == 0;
    CHECK(found);
}

TEST_CASE("rotated neighbor listings are accepted, reflected ones rejected") {
    Mesh m;
    m.dim = 2;
    m.vertices = {vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(1, 1), vec2(2, 0), vec2(2, 1)};
    m.levels.assign(2, 0);
    m.parents.assign(2, -1);
    m.cells = {{0, 1, 2, 3}, {4, 5, 1, 3}}; // neighbor rotated by 90 degrees
    CHECK_NOTHROW(build_connectivity(m));
    m.cells = {{0, 1, 2, 3}, {3, 5, 1, 4}}; // reflected
    CHECK_THROWS_AS(build_connectivity(m), RegularityError);
}

TEST_CASE("non-manifold facet is rejected") {
    Mesh m;
    m.dim = 2;
    m.vertices = {vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(1, 1), vec2(2, 0), vec2(2, 1), vec2(1, 2), vec2(2, 2)};
    m.cells = {{0, 1, 2, 3}, {1, 4, 3, 5}, {1, 4, 6, 7}}; // edge (1,4) shared three times
    m.levels.assign(3, 0);
    m.parents.assign(3, -1);
    CHECK_THROWS_AS(build_connectivity(m), RegularityError);
}

TEST_CASE("multi-level irregularity is rejected") {
    // level-0 cell touching level-2 cells at a vertex
    Mesh m;
    m.dim = 2;
    m.vertices = {vec2(0, 0), vec2(2, 0), vec2(0, 2), vec2(2, 2), vec2(2.5, 0), vec2(2.5, 0.5), vec2(2, 0.5)};
    m.cells = {{0, 1, 2, 3}, {1, 4, 6, 5}};
    m.levels = {0, 2};
    m.parents = {-1, -1};
    CHECK_THROWS_AS(build_connectivity(m), RegularityError);
}

TEST_CASE("partially refined coarse facet is rejected") {
    // one fine cell next to the lower half of a coarse facet, nothing above;
    // rejected either at connectivity build (conflicting edge structure) or
    // by the regularity report (broken vertex fan)
    Mesh m;
    m.dim = 2;
    m.vertices = {vec2(0, 0), vec2(2, 0), vec2(0, 2), vec2(2, 2), vec2(3, 0), vec2(3, 1), vec2(2, 1)};
    m.cells = {{0, 1, 2, 3}, {1, 4, 6, 5}};
    m.levels = {0, 1};
    m.parents = {-1, 0};
    bool rejected = false;
    try {
        const Connectivity conn = build_connectivity(m);
        rejected = !check_regularity(m, conn).admissible();
    } catch (const RegularityError&) {
        rejected = true;
    }
    CHECK(rejected);
}

TEST_CASE("full-facet neighbors of different levels are rejected") {
    Mesh m;
    m.dim = 2;
    m.vertices = {vec2(0, 0), vec2(1, 0), vec2(0, 1), vec2(1, 1), vec2(2, 0), vec2(2, 1)};
    m.cells = {{0, 1, 2, 3}, {1, 4, 3, 5}};
    m.levels = {0, 1};
    m.parents = {-1, -1};
    CHECK_THROWS_AS(build_connectivity(m), RegularityError);
}

TEST_CASE("hanging vertices agree with the family structure") {
    const Mesh m = testsup::load("refined_l2.json");
    const Connectivity conn = build_connectivity(m);
    CHECK(conn.hangings.size() == 4);
    for (const auto& h : conn.hangings) {
        // every hanging vertex bisects a host edge whose endpoints are
        // non-hanging corners of the host cell
        CHECK(h.host_edge[0] >= 0);
        CHECK(!conn.is_hanging(h.host_edge[0]));
        CHECK(!conn.is_hanging(h.host_edge[1]));
        bool e0 = false, e1 = false;
        for (int code = 0; code < m.verts_per_cell(); ++code) {
            e0 |= m.corner(h.host_cell, code) == h.host_edge[0];
            e1 |= m.corner(h.host_cell, code) == h.host_edge[1];
        }
        CHECK(e0);
        CHECK(e1);
    }
    CHECK(check_regularity(m, conn).admissible());
}

TEST_CASE("3d hanging face: center and edge midpoints") {
    const Mesh m = testsup::load("hanging3d.json");
    const Connectivity conn = build_connectivity(m);
    REQUIRE(conn.hanging_interfaces.size() == 1);
    const HangingInterface& hi = conn.hanging_interfaces[0];
    CHECK(hi.pieces.size() == 4);
    CHECK(hi.edge_mid_vertices.size() == 4);
    CHECK(conn.hangings.size() == 5);
    int centers = 0;
    for (const auto& h : conn.hangings) centers += h.host_edge[0] < 0 ? 1 : 0;
    CHECK(centers == 1);
    CHECK(check_regularity(m, conn).admissible());
}
