#pragma once

#include "c1mesh/check.hpp"
#include "c1mesh/field.hpp"

#include <string>

namespace c1mesh {

// Self-contained mapping file: the mesh plus the built field. Numeric
// payload round-trips bit-identically (shortest round-trip decimals).
std::string write_mapping_json(const Mesh& mesh, const MappingField& field);

struct LoadedMapping {
    Mesh mesh;
    MappingField field;
};
LoadedMapping read_mapping_json(const std::string& text);

std::string write_report_json(const CheckReport& report);
std::string write_report_table(const CheckReport& report);

// CSV of (cell, grid index, reference point, Phi, Jacobian entries, det) on
// the n^dim tensor grid per cell; innermost index varies fastest.
std::string write_samples_csv(const MappingField& field, const Mesh& mesh, const Connectivity& conn, int n);

} // namespace c1mesh
