#include "c1mesh/builder.hpp"
#include "c1mesh/check.hpp"
#include "c1mesh/io.hpp"
#include "c1mesh/svg.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1; // also I/O
constexpr int kExitRegularity = 2;
constexpr int kExitBuild = 3;
constexpr int kExitCheckFailed = 4;

bool verbose() {
    const char* env = std::getenv("C1MESH_LOG");
    return env != nullptr && env[0] != '\0';
}

void log_info(const std::string& msg) {
    if (verbose()) std::cerr << "[c1mesh] " << msg << "\n";
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw c1mesh::ParseError("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw c1mesh::ParseError("cannot write " + path);
    out << content;
}

struct CommonArgs {
    std::string input;
    std::string output;
    bool orthogonalize = false;
    bool anisotropic = false;
    bool no_level_scaling = false;
    std::string norm_rule = "average";
    int samples = 10;
    double tol = 1e-10;
};

c1mesh::BuildOptions to_options(const CommonArgs& a) {
    c1mesh::BuildOptions o;
    o.orthogonalize = a.orthogonalize;
    o.anisotropic = a.anisotropic;
    o.level_scaling = !a.no_level_scaling;
    o.norm_rule = a.norm_rule == "half-distance" ? c1mesh::NormRule::HalfDistance : c1mesh::NormRule::AverageEdge;
    return o;
}

int cmd_build(const CommonArgs& args) {
    const c1mesh::Mesh mesh = c1mesh::parse_mesh(read_file(args.input));
    log_info("parsed mesh: " + std::to_string(mesh.n_vertices()) + " vertices, " + std::to_string(mesh.n_cells()) +
             " cells");
    const c1mesh::Connectivity conn = c1mesh::build_connectivity(mesh);
    const c1mesh::RegularityReport reg = c1mesh::check_regularity(mesh, conn);
    if (!reg.admissible()) {
        for (const auto& e : reg.entries) std::cerr << "regularity: " << e.reason << "\n";
        return kExitRegularity;
    }
    const c1mesh::MappingField field = c1mesh::build_mapping(mesh, conn, to_options(args));
    std::string out = args.output;
    if (out.empty()) out = args.input + ".map.json";
    write_file(out, c1mesh::write_mapping_json(mesh, field));
    log_info("wrote " + out);
    return kExitOk;
}

int cmd_check(const CommonArgs& args) {
    const c1mesh::LoadedMapping lm = c1mesh::read_mapping_json(read_file(args.input));
    const c1mesh::Connectivity conn = c1mesh::build_connectivity(lm.mesh);
    const c1mesh::CheckReport report = c1mesh::run_checks(lm.field, lm.mesh, conn, args.samples, args.tol);
    std::cout << c1mesh::write_report_table(report);
    if (!args.output.empty()) write_file(args.output, c1mesh::write_report_json(report));
    return report.pass() ? kExitOk : kExitCheckFailed;
}

int cmd_sample(const CommonArgs& args) {
    const c1mesh::LoadedMapping lm = c1mesh::read_mapping_json(read_file(args.input));
    const c1mesh::Connectivity conn = c1mesh::build_connectivity(lm.mesh);
    write_file(args.output, c1mesh::write_samples_csv(lm.field, lm.mesh, conn, args.samples));
    return kExitOk;
}

int cmd_render(const CommonArgs& args, const c1mesh::SvgOptions& svg) {
    const c1mesh::LoadedMapping lm = c1mesh::read_mapping_json(read_file(args.input));
    const c1mesh::Connectivity conn = c1mesh::build_connectivity(lm.mesh);
    write_file(args.output, c1mesh::render_svg(lm.field, lm.mesh, conn, svg));
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"C1 piecewise-cubic Hermite geometry mappings for quad/hex meshes"};
    app.require_subcommand(1);

    CommonArgs args;
    c1mesh::SvgOptions svg;

    auto add_build_flags = [&](CLI::App* cmd) {
        cmd->add_flag("--orthogonalize", args.orthogonalize, "orthogonalize derivative directions at vertices");
        cmd->add_flag("--anisotropic", args.anisotropic, "per-cell anisotropic derivative rescaling");
        cmd->add_flag("--no-level-scaling", args.no_level_scaling, "disable h_E = 2^-level scaling");
        cmd->add_option("--norm-rule", args.norm_rule, "derivative norm rule")
            ->check(CLI::IsMember({"average", "half-distance"}));
    };

    CLI::App* build = app.add_subcommand("build", "build a mapping from a mesh file");
    build->add_option("input", args.input, "mesh file (JSON)")->required();
    build->add_option("-o,--output", args.output, "output mapping file");
    add_build_flags(build);

    CLI::App* check = app.add_subcommand("check", "verify C1 conformity and Jacobian positivity");
    check->add_option("input", args.input, "mapping file")->required();
    check->add_option("-o,--output", args.output, "write the JSON report here");
    check->add_option("--samples", args.samples, "samples per direction")->check(CLI::Range(2, 100000));
    check->add_option("--tol", args.tol, "relative tolerance");

    CLI::App* sample = app.add_subcommand("sample", "evaluate the mapping on a per-cell tensor grid (CSV)");
    sample->add_option("input", args.input, "mapping file")->required();
    sample->add_option("-o,--output", args.output, "output CSV file");
    sample->add_option("--samples", args.samples, "samples per direction")->check(CLI::Range(2, 100000));

    CLI::App* render = app.add_subcommand("render", "export the mapped grid as SVG");
    render->add_option("input", args.input, "mapping file")->required();
    render->add_option("-o,--output", args.output, "output SVG file");
    render->add_option("--grid", svg.grid_lines, "iso-curves per direction")->check(CLI::Range(1, 256));
    render->add_option("--subdiv", svg.subdivisions, "polyline segments per curve")->check(CLI::Range(1, 4096));
    render->add_option("--stroke-width", svg.stroke_width, "stroke width in pixels");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build(args);
        if (check->parsed()) return cmd_check(args);
        if (sample->parsed()) return cmd_sample(args);
        if (render->parsed()) return cmd_render(args, svg);
    } catch (const c1mesh::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const c1mesh::RegularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRegularity;
    } catch (const c1mesh::BuildError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBuild;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBuild;
    }
    return kExitOk;
}
