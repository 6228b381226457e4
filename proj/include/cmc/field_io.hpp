#pragma once

#include "cmc/residual.hpp"

#include <filesystem>
#include <iosfwd>

#include "json.hpp"

namespace cmc {

/// Domains as JSON: {"kind": "ball", "center": [x, y], "radius": r} or
/// {"kind": "ellipse", "center": [x, y], "semi_axes": [a, b]}. Sub-level
/// domains are internal to the continuation and are not serialized.
nlohmann::json domain_to_json(const ConvexDomain& d);
/// Throws ConfigError on an unknown kind or missing keys.
ConvexDomain domain_from_json(const nlohmann::json& j);

/// Header stored next to the CSV: format tag, c, model, resolutions, both
/// domains, eps_space and the "dual" flag (true for fields of the exchanged
/// problem).
nlohmann::json field_header(const ProblemSpec& spec, const SolutionField& field);

/// One row per node with columns rho_index, phi_index, x1, x2, u, du1, du2,
/// d2u11, d2u12, d2u22. u is printed with 17 significant digits so that it
/// reads back bit-exact, everything else with 9.
void write_field_csv(std::ostream& os, const SolutionField& field);

/// Parses the CSV against a grid. Throws ConfigError on a header, row count
/// or index mismatch.
Eigen::VectorXd read_field_csv(std::istream& is, const MappedGrid& grid);

/// Writes <stem>.csv and <stem>.json.
void write_field(const std::filesystem::path& stem, const ProblemSpec& spec,
                 const SolutionField& field);

struct StoredField {
    ProblemSpec spec;
    SolutionField field;
    bool dual = false;
};

/// Reads <stem>.json and <stem>.csv and rebuilds the problem on a fresh grid.
/// Throws ConfigError on any schema mismatch.
StoredField read_field(const std::filesystem::path& stem);

} // namespace cmc
