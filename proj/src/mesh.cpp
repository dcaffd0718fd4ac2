#include "c1mesh/mesh.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace c1mesh {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& msg) { throw ParseError("mesh: " + msg); }

Vec read_point(const ordered_json& j, int dim, const std::string& what) {
    if (!j.is_array() || static_cast<int>(j.size()) != dim) fail(what + " must be an array of " + std::to_string(dim) + " numbers");
    Vec p{0.0, 0.0, 0.0};
    for (int k = 0; k < dim; ++k) {
        if (!j[static_cast<size_t>(k)].is_number()) fail(what + " component " + std::to_string(k) + " is not a number");
        p[static_cast<size_t>(k)] = j[static_cast<size_t>(k)].get<double>();
    }
    return p;
}

void validate(Mesh& m) {
    const int npc = m.verts_per_cell();
    const int nv = m.n_vertices();
    for (int c = 0; c < m.n_cells(); ++c) {
        const auto& cell = m.cells[static_cast<size_t>(c)];
        if (static_cast<int>(cell.size()) != npc)
            fail("cell " + std::to_string(c) + " must list " + std::to_string(npc) + " vertices");
        std::set<int> seen;
        for (int v : cell) {
            if (v < 0 || v >= nv)
                fail("cell " + std::to_string(c) + " references vertex " + std::to_string(v) + " out of range");
            if (!seen.insert(v).second) fail("duplicate vertex in cell " + std::to_string(c));
        }
        if (m.levels[static_cast<size_t>(c)] < 0) fail("cell " + std::to_string(c) + " has negative level");
    }

    // Family ids: siblings share one level >= 1 and there are at most 2^dim.
    std::map<int, std::vector<int>> families;
    for (int c = 0; c < m.n_cells(); ++c) {
        if (m.parents[static_cast<size_t>(c)] >= 0) families[m.parents[static_cast<size_t>(c)]].push_back(c);
    }
    for (const auto& [fam, members] : families) {
        if (static_cast<int>(members.size()) > npc)
            fail("family " + std::to_string(fam) + " has more than " + std::to_string(npc) + " members");
        const int lvl = m.levels[static_cast<size_t>(members.front())];
        if (lvl < 1) fail("family " + std::to_string(fam) + " members must have level >= 1");
        for (int c : members) {
            if (m.levels[static_cast<size_t>(c)] != lvl)
                fail("family " + std::to_string(fam) + " members have mixed levels");
        }
    }

    for (auto& [v, tangents] : m.boundary) {
        if (v < 0 || v >= nv) fail("boundary entry references vertex " + std::to_string(v) + " out of range");
        if (static_cast<int>(tangents.size()) != m.dim - 1)
            fail("boundary vertex " + std::to_string(v) + " needs " + std::to_string(m.dim - 1) + " tangent vector(s)");
        for (size_t i = 0; i < tangents.size(); ++i) {
            if (std::abs(norm(tangents[i]) - 1.0) > 1e-9)
                fail("boundary vertex " + std::to_string(v) + " tangent " + std::to_string(i) + " is not unit length");
            for (size_t j = i + 1; j < tangents.size(); ++j) {
                if (std::abs(dot(tangents[i], tangents[j])) > 1e-9)
                    fail("boundary vertex " + std::to_string(v) + " tangents are not orthogonal");
            }
        }
    }
}

} // namespace

Mesh parse_mesh(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail(std::string("JSON syntax error: ") + e.what());
    }
    if (!j.is_object()) fail("top level must be a JSON object");

    Mesh m;
    if (!j.contains("dim") || !j["dim"].is_number_integer()) fail("missing integer key 'dim'");
    m.dim = j["dim"].get<int>();
    if (m.dim != 2 && m.dim != 3) fail("dim must be 2 or 3");

    if (!j.contains("vertices") || !j["vertices"].is_array()) fail("missing array key 'vertices'");
    for (size_t i = 0; i < j["vertices"].size(); ++i) {
        m.vertices.push_back(read_point(j["vertices"][i], m.dim, "vertex " + std::to_string(i)));
    }

    if (!j.contains("cells") || !j["cells"].is_array()) fail("missing array key 'cells'");
    for (size_t c = 0; c < j["cells"].size(); ++c) {
        const auto& jc = j["cells"][c];
        if (!jc.is_array()) fail("cell " + std::to_string(c) + " must be an array");
        std::vector<int> cell;
        for (const auto& v : jc) {
            if (!v.is_number_integer()) fail("cell " + std::to_string(c) + " has a non-integer vertex index");
            cell.push_back(v.get<int>());
        }
        m.cells.push_back(std::move(cell));
    }

    m.levels.assign(m.cells.size(), 0);
    if (j.contains("levels")) {
        if (!j["levels"].is_array() || j["levels"].size() != m.cells.size()) fail("'levels' must list one integer per cell");
        for (size_t c = 0; c < m.cells.size(); ++c) {
            if (!j["levels"][c].is_number_integer()) fail("level of cell " + std::to_string(c) + " is not an integer");
            m.levels[c] = j["levels"][c].get<int>();
        }
    }

    m.parents.assign(m.cells.size(), -1);
    if (j.contains("parents")) {
        if (!j["parents"].is_array() || j["parents"].size() != m.cells.size()) fail("'parents' must list one entry per cell");
        for (size_t c = 0; c < m.cells.size(); ++c) {
            const auto& p = j["parents"][c];
            if (p.is_null()) continue;
            if (!p.is_number_integer()) fail("parent of cell " + std::to_string(c) + " must be an integer or null");
            m.parents[c] = p.get<int>();
        }
    }

    if (j.contains("boundary")) {
        if (!j["boundary"].is_array()) fail("'boundary' must be an array");
        for (const auto& entry : j["boundary"]) {
            if (!entry.is_object() || !entry.contains("vertex") || !entry.contains("tangents"))
                fail("boundary entries need keys 'vertex' and 'tangents'");
            const int v = entry["vertex"].get<int>();
            if (m.boundary.count(v)) fail("boundary vertex " + std::to_string(v) + " listed twice");
            std::vector<Vec> tangents;
            for (const auto& t : entry["tangents"]) {
                tangents.push_back(read_point(t, m.dim, "tangent of boundary vertex " + std::to_string(v)));
            }
            m.boundary[v] = std::move(tangents);
        }
    }

    validate(m);
    return m;
}

std::string write_mesh_json(const Mesh& mesh) {
    ordered_json j;
    j["dim"] = mesh.dim;
    j["vertices"] = ordered_json::array();
    for (const auto& p : mesh.vertices) {
        ordered_json pt = ordered_json::array();
        for (int k = 0; k < mesh.dim; ++k) pt.push_back(p[static_cast<size_t>(k)]);
        j["vertices"].push_back(pt);
    }
    j["cells"] = mesh.cells;
    j["levels"] = mesh.levels;
    j["parents"] = ordered_json::array();
    for (int p : mesh.parents) {
        if (p < 0) j["parents"].push_back(nullptr);
        else j["parents"].push_back(p);
    }
    j["boundary"] = ordered_json::array();
    for (const auto& [v, tangents] : mesh.boundary) {
        ordered_json entry;
        entry["vertex"] = v;
        entry["tangents"] = ordered_json::array();
        for (const auto& t : tangents) {
            ordered_json pt = ordered_json::array();
            for (int k = 0; k < mesh.dim; ++k) pt.push_back(t[static_cast<size_t>(k)]);
            entry["tangents"].push_back(pt);
        }
        j["boundary"].push_back(entry);
    }
    return j.dump(2);
}

} // namespace c1mesh
