#include "cmc/field_io.hpp"

#include "cmc/errors.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace cmc {

namespace {

constexpr const char* kFormat = "cmc-field";
constexpr int kVersion = 1;
constexpr const char* kColumns = "rho_index,phi_index,x1,x2,u,du1,du2,d2u11,d2u12,d2u22";

std::string fmt(double v, int digits) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

Vec2 vec_from(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ConfigError("expected a two-element array");
    return Vec2(j[0].get<double>(), j[1].get<double>());
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
}

double parse_double(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("malformed number in field CSV: '" + s + "'");
    return v;
}

int parse_int(const std::string& s) {
    int v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw ConfigError("malformed index in field CSV: '" + s + "'");
    return v;
}

} // namespace

nlohmann::json domain_to_json(const ConvexDomain& d) {
    if (d.kind() == DomainKind::Sublevel) throw ConfigError("sub-level domains are not serialized");
    nlohmann::json j;
    j["center"] = {d.center().x(), d.center().y()};
    if (d.kind() == DomainKind::Ball) {
        j["kind"] = "ball";
        j["radius"] = d.circumradius();
    } else {
        j["kind"] = "ellipse";
        j["semi_axes"] = {d.quadric_a(), d.quadric_b()};
    }
    return j;
}

ConvexDomain domain_from_json(const nlohmann::json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const Vec2 c = vec_from(j.at("center"));
        if (kind == "ball") return ConvexDomain::ball(c, j.at("radius").get<double>());
        if (kind == "ellipse") {
            const Vec2 ab = vec_from(j.at("semi_axes"));
            return ConvexDomain::ellipse(c, ab.x(), ab.y());
        }
        throw ConfigError("unknown domain kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad domain declaration: ") + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(std::string("bad domain declaration: ") + e.what());
    }
}

nlohmann::json field_header(const ProblemSpec& spec, const SolutionField& field) {
    nlohmann::json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["c"] = field.c;
    j["model"] = to_string(spec.model);
    j["n_rho"] = spec.grid->n_rho();
    j["n_phi"] = spec.grid->n_phi();
    j["dual"] = spec.op == OperatorKind::Dual;
    j["omega"] = domain_to_json(spec.omega);
    j["omega_tilde"] = domain_to_json(spec.omega_tilde);
    j["eps_space"] = spec.eps_space;
    j["columns"] = kColumns;
    return j;
}

void write_field_csv(std::ostream& os, const SolutionField& field) {
    const MappedGrid& g = *field.grid;
    const auto d = derivatives(g, field.u);
    os << kColumns << "\n";
    for (int k = 0; k < g.size(); ++k) {
        const auto ks = static_cast<std::size_t>(k);
        const Vec2& x = g.node(k);
        os << g.ring_of(k) << ',' << g.col_of(k) << ',' << fmt(x.x(), 9) << ',' << fmt(x.y(), 9)
           << ',' << fmt(field.u[k], 17) << ',' << fmt(d.du[ks].x(), 9) << ','
           << fmt(d.du[ks].y(), 9) << ',' << fmt(d.d2u[ks](0, 0), 9) << ','
           << fmt(d.d2u[ks](0, 1), 9) << ',' << fmt(d.d2u[ks](1, 1), 9) << "\n";
    }
}

Eigen::VectorXd read_field_csv(std::istream& is, const MappedGrid& grid) {
    std::string line;
    if (!std::getline(is, line) || line != kColumns)
        throw ConfigError("field CSV header mismatch");
    Eigen::VectorXd u(grid.size());
    int k = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto cells = split(line);
        if (cells.size() != 10) throw ConfigError("field CSV row with wrong column count");
        if (k >= grid.size()) throw ConfigError("field CSV has more rows than grid nodes");
        if (parse_int(cells[0]) != grid.ring_of(k) || parse_int(cells[1]) != grid.col_of(k))
            throw ConfigError("field CSV row " + std::to_string(k) + " has unexpected indices");
        u[k] = parse_double(cells[4]);
        ++k;
    }
    if (k != grid.size()) throw ConfigError("field CSV has fewer rows than grid nodes");
    return u;
}

void write_field(const std::filesystem::path& stem, const ProblemSpec& spec,
                 const SolutionField& field) {
    std::filesystem::path csv = stem, js = stem;
    csv += ".csv";
    js += ".json";
    std::ofstream c(csv);
    if (!c) throw ConfigError("cannot write " + csv.string());
    write_field_csv(c, field);
    std::ofstream j(js);
    if (!j) throw ConfigError("cannot write " + js.string());
    j << field_header(spec, field).dump(2) << "\n";
}

StoredField read_field(const std::filesystem::path& stem) {
    std::filesystem::path csv = stem, js = stem;
    csv += ".csv";
    js += ".json";
    std::ifstream jf(js);
    if (!jf) throw ConfigError("cannot read " + js.string());
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(jf);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field header is not valid JSON: ") + e.what());
    }
    StoredField out;
    try {
        if (h.at("format").get<std::string>() != kFormat || h.at("version").get<int>() != kVersion)
            throw ConfigError("unsupported field format");
        if (h.at("columns").get<std::string>() != kColumns)
            throw ConfigError("field header lists unexpected columns");
        const std::string model = h.at("model").get<std::string>();
        ModelKind mk;
        if (model == "minkowski")
            mk = ModelKind::Minkowski;
        else if (model == "euclidean")
            mk = ModelKind::Euclidean;
        else
            throw ConfigError("unknown model '" + model + "'");
        out.dual = h.at("dual").get<bool>();
        try {
            out.spec = make_problem(domain_from_json(h.at("omega")),
                                    domain_from_json(h.at("omega_tilde")), mk,
                                    h.at("n_rho").get<int>(), h.at("n_phi").get<int>(),
                                    out.dual ? OperatorKind::Dual : OperatorKind::Primal,
                                    h.at("eps_space").get<double>());
        } catch (const DomainError& e) {
            throw ConfigError(std::string("stored problem is invalid: ") + e.what());
        }
        out.field.c = h.at("c").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("field header schema mismatch: ") + e.what());
    }
    std::ifstream cf(csv);
    if (!cf) throw ConfigError("cannot read " + csv.string());
    out.field.grid = out.spec.grid;
    out.field.model = out.spec.model;
    out.field.role = out.dual ? FieldRole::Dual : FieldRole::Primal;
    out.field.u = read_field_csv(cf, *out.spec.grid);
    return out;
}

} // namespace cmc
