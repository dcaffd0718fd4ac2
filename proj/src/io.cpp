#include "c1mesh/io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <sstream>

namespace c1mesh {

namespace {

using nlohmann::ordered_json;

ordered_json vec_to_json(const Vec& v, int dim) {
    ordered_json a = ordered_json::array();
    for (int k = 0; k < dim; ++k) a.push_back(v[static_cast<size_t>(k)]);
    return a;
}

Vec vec_from_json(const ordered_json& a, int dim) {
    Vec v{0, 0, 0};
    for (int k = 0; k < dim; ++k) v[static_cast<size_t>(k)] = a.at(static_cast<size_t>(k)).get<double>();
    return v;
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace

std::string write_mapping_json(const Mesh& mesh, const MappingField& field) {
    ordered_json j;
    j["format"] = "c1mesh-mapping";
    j["mesh"] = ordered_json::parse(write_mesh_json(mesh));
    ordered_json opts;
    opts["orthogonalize"] = field.options.orthogonalize;
    opts["norm_rule"] = field.options.norm_rule == NormRule::AverageEdge ? "average" : "half-distance";
    opts["anisotropic"] = field.options.anisotropic;
    opts["level_scaling"] = field.options.level_scaling;
    j["options"] = opts;

    j["vertices"] = ordered_json::array();
    for (const VertexDoFs& d : field.dofs) {
        ordered_json v;
        v["position"] = vec_to_json(d.position, field.dim);
        v["derivs"] = ordered_json::array();
        for (int s = 0; s < field.dim; ++s) v["derivs"].push_back(vec_to_json(d.derivs[static_cast<size_t>(s)], field.dim));
        if (!d.higher.empty()) {
            v["higher"] = ordered_json::array();
            for (const auto& [mask, vec] : d.higher) {
                ordered_json h;
                h["mask"] = mask;
                h["value"] = vec_to_json(vec, field.dim);
                v["higher"].push_back(h);
            }
        }
        j["vertices"].push_back(v);
    }

    j["edge_h"] = field.edge_h;

    j["face_augs"] = ordered_json::array();
    for (const auto& [idx, coeff] : field.face_augs) {
        ordered_json a;
        a["interface"] = idx;
        a["coeff"] = vec_to_json(coeff, field.dim);
        j["face_augs"].push_back(a);
    }
    j["edge_augs"] = ordered_json::array();
    for (const auto& [eid, rec] : field.edge_augs) {
        ordered_json a;
        a["edge"] = eid;
        a["cell"] = rec.cell;
        a["edge_axis"] = rec.edge_axis;
        a["end_code"] = rec.end_code;
        a["u_axis"] = {rec.u_axis[0], rec.u_axis[1]};
        a["coeff"] = ordered_json::array();
        a["coeff"].push_back(vec_to_json(rec.coeff[0], field.dim));
        a["coeff"].push_back(vec_to_json(rec.coeff[1], field.dim));
        j["edge_augs"].push_back(a);
    }
    if (field.options.anisotropic) {
        j["aniso_scale"] = ordered_json::array();
        for (const Vec& s : field.aniso_scale) j["aniso_scale"].push_back(vec_to_json(s, field.dim));
    }
    return j.dump(2) + "\n";
}

LoadedMapping read_mapping_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("mapping: JSON syntax error: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "c1mesh-mapping")
        throw ParseError("mapping: not a c1mesh-mapping file");
    LoadedMapping out;
    out.mesh = parse_mesh(j.at("mesh").dump());
    MappingField& f = out.field;
    f.dim = out.mesh.dim;
    const auto& opts = j.at("options");
    f.options.orthogonalize = opts.at("orthogonalize").get<bool>();
    f.options.norm_rule = opts.at("norm_rule").get<std::string>() == "half-distance" ? NormRule::HalfDistance
                                                                                     : NormRule::AverageEdge;
    f.options.anisotropic = opts.at("anisotropic").get<bool>();
    f.options.level_scaling = opts.at("level_scaling").get<bool>();

    for (const auto& v : j.at("vertices")) {
        VertexDoFs d;
        d.position = vec_from_json(v.at("position"), f.dim);
        for (int s = 0; s < f.dim; ++s) d.derivs[static_cast<size_t>(s)] = vec_from_json(v.at("derivs").at(static_cast<size_t>(s)), f.dim);
        if (v.contains("higher")) {
            for (const auto& h : v.at("higher")) d.higher[h.at("mask").get<int>()] = vec_from_json(h.at("value"), f.dim);
        }
        f.dofs.push_back(std::move(d));
    }
    if (f.dofs.size() != out.mesh.vertices.size()) throw ParseError("mapping: vertex DoF count mismatch");

    f.edge_h = j.at("edge_h").get<std::vector<double>>();
    for (const auto& a : j.at("face_augs")) f.face_augs[a.at("interface").get<int>()] = vec_from_json(a.at("coeff"), f.dim);
    for (const auto& a : j.at("edge_augs")) {
        EdgeAug rec;
        rec.cell = a.at("cell").get<int>();
        rec.edge_axis = a.at("edge_axis").get<int>();
        rec.end_code = a.at("end_code").get<int>();
        rec.u_axis = {a.at("u_axis").at(0).get<int>(), a.at("u_axis").at(1).get<int>()};
        rec.coeff[0] = vec_from_json(a.at("coeff").at(0), f.dim);
        rec.coeff[1] = vec_from_json(a.at("coeff").at(1), f.dim);
        f.edge_augs[a.at("edge").get<int>()] = rec;
    }
    if (j.contains("aniso_scale")) {
        for (const auto& s : j.at("aniso_scale")) f.aniso_scale.push_back(vec_from_json(s, f.dim));
    } else {
        f.aniso_scale.assign(out.mesh.cells.size(), Vec{1, 1, 1});
    }
    return out;
}

std::string write_report_json(const CheckReport& r) {
    ordered_json j;
    j["tolerance"] = r.tol;
    j["samples"] = r.samples;
    j["interfaces"] = ordered_json::array();
    for (const InterfaceEntry& e : r.interfaces) {
        ordered_json o;
        o["cells"] = e.cells;
        o["hanging"] = e.hanging;
        o["max_phi_jump"] = e.max_phi_jump;
        o["max_grad_jump"] = e.max_grad_jump;
        o["scale"] = e.scale;
        j["interfaces"].push_back(o);
    }
    j["vertex_orthogonality"] = ordered_json::array();
    for (const OrthoEntry& e : r.vertex_orthogonality) {
        ordered_json o;
        o["vertex"] = e.vertex;
        o["interior"] = e.interior;
        o["residual"] = e.residual;
        j["vertex_orthogonality"].push_back(o);
    }
    j["midpoint_orthogonality"] = ordered_json::array();
    for (const MidpointOrthoEntry& e : r.midpoint_orthogonality) {
        ordered_json o;
        o["entity"] = e.entity;
        o["residual"] = e.residual;
        j["midpoint_orthogonality"].push_back(o);
    }
    j["jacobians"] = ordered_json::array();
    for (const JacobianEntry& e : r.jacobians) {
        ordered_json o;
        o["cell"] = e.cell;
        o["min_det"] = e.min_det;
        o["max_det"] = e.max_det;
        j["jacobians"].push_back(o);
    }
    ordered_json verdicts;
    verdicts["c1"] = r.c1_pass();
    verdicts["orthogonality"] = r.orthogonality_pass();
    verdicts["orthogonality_checked"] = r.orthogonality_checked;
    verdicts["jacobian_positive"] = r.jacobian_pass();
    verdicts["pass"] = r.pass();
    j["verdicts"] = verdicts;
    return j.dump(2) + "\n";
}

std::string write_report_table(const CheckReport& r) {
    std::ostringstream os;
    os << "interface            kind        max|dPhi|      max|dGrad|     scale\n";
    for (const InterfaceEntry& e : r.interfaces) {
        std::string cells;
        for (size_t i = 0; i < e.cells.size(); ++i) cells += (i ? "/" : "") + std::to_string(e.cells[i]);
        char line[160];
        std::snprintf(line, sizeof line, "%-20s %-10s % .8e % .8e %.3e\n", cells.c_str(),
                      e.hanging ? "hanging" : "conforming", e.max_phi_jump, e.max_grad_jump, e.scale);
        os << line;
    }
    os << "cell   min det J        max det J\n";
    for (const JacobianEntry& e : r.jacobians) {
        char line[120];
        std::snprintf(line, sizeof line, "%-6d % .8e % .8e\n", e.cell, e.min_det, e.max_det);
        os << line;
    }
    if (r.orthogonality_checked) {
        os << "orthogonality residuals (interior vertices)\n";
        for (const OrthoEntry& e : r.vertex_orthogonality) {
            if (!e.interior) continue;
            char line[120];
            std::snprintf(line, sizeof line, "vertex %-6d %.8e\n", e.vertex, e.residual);
            os << line;
        }
        for (const MidpointOrthoEntry& e : r.midpoint_orthogonality) {
            char line[160];
            std::snprintf(line, sizeof line, "%-16s %.8e\n", e.entity.c_str(), e.residual);
            os << line;
        }
    }
    os << "verdict: c1=" << (r.c1_pass() ? "pass" : "FAIL");
    if (r.orthogonality_checked) os << " orthogonality=" << (r.orthogonality_pass() ? "pass" : "FAIL");
    os << " jacobian=" << (r.jacobian_pass() ? "pass" : "FAIL") << " overall="
       << (r.pass() ? "pass" : "FAIL") << "\n";
    return os.str();
}

std::string write_samples_csv(const MappingField& field, const Mesh& mesh, const Connectivity& conn, int n) {
    std::ostringstream os;
    const int dim = mesh.dim;
    if (dim == 2) os << "cell,i,j,xi,eta,phi_x,phi_y,J00,J01,J10,J11,det\n";
    else os << "cell,i,j,k,xi,eta,zeta,phi_x,phi_y,phi_z,J00,J01,J02,J10,J11,J12,J20,J21,J22,det\n";
    for (int c = 0; c < mesh.n_cells(); ++c) {
        const CellCoefficients cc = local_coefficients(field, mesh, conn, c);
        const int nz = dim == 3 ? n : 1;
        for (int k = 0; k < nz; ++k) {
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    Vec x{-1.0 + 2.0 * i / (n - 1), -1.0 + 2.0 * j / (n - 1), 0.0};
                    if (dim == 3) x[2] = -1.0 + 2.0 * k / (n - 1);
                    const Vec phi = eval_phi(cc, x);
                    const JacobianSample J = eval_jacobian(cc, x);
                    os << c << ',' << i << ',' << j;
                    if (dim == 3) os << ',' << k;
                    for (int a = 0; a < dim; ++a) os << ',' << fmt(x[static_cast<size_t>(a)]);
                    for (int a = 0; a < dim; ++a) os << ',' << fmt(phi[static_cast<size_t>(a)]);
                    for (int row = 0; row < dim; ++row)
                        for (int col = 0; col < dim; ++col)
                            os << ',' << fmt(J.cols[static_cast<size_t>(col)][static_cast<size_t>(row)]);
                    os << ',' << fmt(J.det) << '\n';
                }
            }
        }
    }
    return os.str();
}

} // namespace c1mesh
