#include "lastzero/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "lastzero/errors.hpp"

namespace lastzero {

using nlohmann::json;

namespace {

constexpr const char* kBoundaryTag = "lastzero-boundaries";
constexpr const char* kSurfaceTag = "lastzero-surface";
constexpr const char* kBoundaryHeader = "t,b_minus,b_plus,h_minus,h_plus,residual_minus,residual_plus";
constexpr const char* kSurfaceHeader = "t,x,V";

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double number_from(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!j.is_number()) throw SchemaError("expected a number");
    return j.get<double>();
}

json column(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(number_or_null(x));
    return a;
}

std::vector<double> column_from(const json& j, const char* name) {
    if (!j.contains(name) || !j[name].is_array()) {
        throw SchemaError(std::string("missing column '") + name + "'");
    }
    std::vector<double> out;
    for (const auto& x : j[name]) out.push_back(number_from(x));
    return out;
}

double parse_double(const std::string& s, const std::string& what) {
    const char* b = s.c_str();
    char* e = nullptr;
    const double v = std::strtod(b, &e);
    if (e == b || *e != '\0') throw SchemaError("bad number '" + s + "' in " + what);
    return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

// "# <tag> v<version> key=value ..." -> key/value map; checks tag and version.
std::map<std::string, std::string> parse_version_line(const std::string& line, const std::string& tag, int version) {
    std::istringstream is(line);
    std::string hash, name, ver;
    is >> hash >> name >> ver;
    if (hash != "#" || name != tag) {
        throw SchemaError("not a " + tag + " file (first line: '" + line + "')");
    }
    if (ver != "v" + std::to_string(version)) {
        throw SchemaError("unsupported " + tag + " version '" + ver + "'");
    }
    std::map<std::string, std::string> kv;
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) throw SchemaError("malformed field '" + tok + "' in version line");
        kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    return kv;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "' for reading");
    return is;
}

void finish(std::ofstream& os, const std::filesystem::path& path) {
    os.flush();
    if (!os) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

json to_json(const ProblemSpec& spec) { return {{"mu", spec.mu}, {"T", spec.T}}; }

json to_json(const SolverConfig& cfg) {
    return {{"n_steps", cfg.n_steps},
            {"max_iter", cfg.max_iter},
            {"tol_b", cfg.tol_b},
            {"tol_res", cfg.tol_res},
            {"damping", cfg.damping},
            {"quadrature",
             {{"first_order", cfg.quadrature.first_order},
              {"panel_order", cfg.quadrature.panel_order},
              {"inner_order", cfg.quadrature.inner_order},
              {"inner_refine", cfg.quadrature.inner_refine}}}};
}

json to_json(const LatticeSpec& lat) { return {{"n_t", lat.n_t}, {"n_x", lat.n_x}, {"x_span", lat.x_span}}; }

json to_json(const SimConfig& cfg) {
    return {{"n_paths", cfg.n_paths},
            {"n_steps", cfg.n_steps},
            {"seed", cfg.seed},
            {"bridge_correction", cfg.bridge_correction},
            {"mirror_noise", cfg.mirror_noise}};
}

json to_json(const PolicyReport& r) {
    return {{"policy", r.policy_name},   {"estimate", r.estimate}, {"std_error", r.std_error},
            {"n_paths", r.n_paths},      {"n_steps", r.n_steps},   {"seed", r.seed},
            {"spec", to_json(r.spec)}};
}

json to_json(const OracleDistance& d) {
    return {{"sup_minus", d.sup_minus}, {"sup_plus", d.sup_plus}, {"sup", d.sup},        {"l2_minus", d.l2_minus},
            {"l2_plus", d.l2_plus},     {"l2", d.l2},             {"t_max", d.t_max}, {"n_points", d.n_points}};
}

json to_json(const SmoothFitReport& r) {
    json samples = json::array();
    for (const auto& s : r.samples) {
        samples.push_back({{"t", s.t},
                           {"side", s.side},
                           {"boundary", s.boundary},
                           {"eps", s.eps},
                           {"inner_slope", s.inner_slope},
                           {"outer_slope", s.outer_slope},
                           {"gap", s.gap}});
    }
    return {{"fraction_decreasing", r.fraction_decreasing()}, {"max_final_gap", r.max_final_gap()},
            {"samples", samples}};
}

void write_boundaries_csv(const BoundaryPair& bp, const std::filesystem::path& path, const std::string& manifest) {
    bp.check_shape();
    auto os = open_out(path);
    os << "# " << kBoundaryTag << " v" << kBoundarySchemaVersion << " mu=" << format_number(bp.spec.mu)
       << " T=" << format_number(bp.spec.T) << " source=" << bp.source
       << " manifest=" << (manifest.empty() ? "none" : manifest) << "\n";
    os << kBoundaryHeader << "\n";
    for (std::size_t i = 0; i < bp.size(); ++i) {
        os << format_number(bp.grid[i]) << ',' << format_number(bp.b_minus[i]) << ','
           << format_number(bp.b_plus[i]) << ',' << format_number(bp.h_minus[i]) << ','
           << format_number(bp.h_plus[i]) << ',' << format_number(bp.residual_minus[i]) << ','
           << format_number(bp.residual_plus[i]) << "\n";
    }
    finish(os, path);
}

BoundaryPair read_boundaries_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("empty boundary file '" + path.string() + "'");
    const auto kv = parse_version_line(line, kBoundaryTag, kBoundarySchemaVersion);
    if (!kv.contains("mu") || !kv.contains("T")) throw SchemaError("boundary file lacks mu or T");
    BoundaryPair bp;
    bp.spec = {parse_double(kv.at("mu"), "version line"), parse_double(kv.at("T"), "version line")};
    try {
        bp.spec.validate();
    } catch (const std::exception& e) {
        throw SchemaError(std::string("invalid spec in boundary file: ") + e.what());
    }
    if (kv.contains("source")) bp.source = kv.at("source");
    if (!std::getline(is, line) || line != kBoundaryHeader) {
        throw SchemaError("boundary file header must be '" + std::string(kBoundaryHeader) + "'");
    }
    std::size_t row = 2;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 7) throw SchemaError("row " + std::to_string(row) + ": expected 7 fields");
        const std::string where = "row " + std::to_string(row);
        bp.grid.push_back(parse_double(f[0], where));
        bp.b_minus.push_back(parse_double(f[1], where));
        bp.b_plus.push_back(parse_double(f[2], where));
        bp.h_minus.push_back(parse_double(f[3], where));
        bp.h_plus.push_back(parse_double(f[4], where));
        bp.residual_minus.push_back(parse_double(f[5], where));
        bp.residual_plus.push_back(parse_double(f[6], where));
    }
    try {
        bp.check_shape();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("boundary file: ") + e.what());
    }
    return bp;
}

void write_boundaries_json(const BoundaryPair& bp, const std::filesystem::path& path, const std::string& manifest) {
    bp.check_shape();
    json j;
    j["schema"] = "lastzero.boundaries";
    j["version"] = kBoundarySchemaVersion;
    j["manifest"] = manifest.empty() ? json(nullptr) : json(manifest);
    j["spec"] = to_json(bp.spec);
    j["source"] = bp.source;
    j["config"] = bp.config ? to_json(*bp.config) : json(nullptr);
    j["max_clamp"] = bp.max_clamp;
    j["values"] = {{"t", column(bp.grid)},
                   {"b_minus", column(bp.b_minus)},
                   {"b_plus", column(bp.b_plus)},
                   {"h_minus", column(bp.h_minus)},
                   {"h_plus", column(bp.h_plus)},
                   {"residual_minus", column(bp.residual_minus)},
                   {"residual_plus", column(bp.residual_plus)}};
    auto os = open_out(path);
    os << j.dump(1) << "\n";
    finish(os, path);
}

BoundaryPair read_boundaries_json(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_text(path));
    } catch (const json::exception& e) {
        throw SchemaError("boundary JSON does not parse: " + std::string(e.what()));
    }
    if (!j.is_object() || j.value("schema", "") != "lastzero.boundaries") {
        throw SchemaError("not a lastzero.boundaries document");
    }
    if (!j.contains("version") || !j["version"].is_number_integer() || j["version"].get<int>() != kBoundarySchemaVersion) {
        throw SchemaError("unsupported lastzero.boundaries version");
    }
    BoundaryPair bp;
    try {
        bp.spec = {number_from(j.at("spec").at("mu")), number_from(j.at("spec").at("T"))};
        bp.spec.validate();
        bp.source = j.value("source", "integral");
        bp.max_clamp = j.value("max_clamp", 0.0);
        if (j.contains("config") && j["config"].is_object()) {
            const auto& c = j["config"];
            SolverConfig cfg;
            cfg.n_steps = c.at("n_steps").get<std::size_t>();
            cfg.max_iter = c.at("max_iter").get<std::size_t>();
            cfg.tol_b = c.at("tol_b").get<double>();
            cfg.tol_res = c.at("tol_res").get<double>();
            cfg.damping = c.at("damping").get<double>();
            if (c.contains("quadrature")) {
                const auto& q = c["quadrature"];
                cfg.quadrature.first_order = q.at("first_order").get<std::size_t>();
                cfg.quadrature.panel_order = q.at("panel_order").get<std::size_t>();
                cfg.quadrature.inner_order = q.at("inner_order").get<std::size_t>();
                cfg.quadrature.inner_refine = q.at("inner_refine").get<int>();
            }
            bp.config = cfg;
        }
    } catch (const json::exception& e) {
        throw SchemaError("boundary JSON: " + std::string(e.what()));
    } catch (const std::invalid_argument& e) {
        throw SchemaError("boundary JSON: " + std::string(e.what()));
    }
    if (!j.contains("values") || !j["values"].is_object()) throw SchemaError("boundary JSON lacks values");
    const auto& v = j["values"];
    bp.grid = column_from(v, "t");
    bp.b_minus = column_from(v, "b_minus");
    bp.b_plus = column_from(v, "b_plus");
    bp.h_minus = column_from(v, "h_minus");
    bp.h_plus = column_from(v, "h_plus");
    bp.residual_minus = column_from(v, "residual_minus");
    bp.residual_plus = column_from(v, "residual_plus");
    try {
        bp.check_shape();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("boundary JSON: ") + e.what());
    }
    return bp;
}

BoundaryPair read_boundaries(const std::filesystem::path& path) {
    return path.extension() == ".json" ? read_boundaries_json(path) : read_boundaries_csv(path);
}

void write_surface_csv(const ValueSurface& vs, const std::filesystem::path& path, const std::string& manifest) {
    auto os = open_out(path);
    os << "# " << kSurfaceTag << " v" << kSurfaceSchemaVersion << " mu=" << format_number(vs.spec.mu)
       << " T=" << format_number(vs.spec.T) << " source=" << to_string(vs.source)
       << " manifest=" << (manifest.empty() ? "none" : manifest) << "\n";
    os << kSurfaceHeader << "\n";
    for (std::size_t i = 0; i < vs.t_grid.size(); ++i) {
        for (std::size_t j = 0; j < vs.x_grid.size(); ++j) {
            os << format_number(vs.t_grid[i]) << ',' << format_number(vs.x_grid[j]) << ','
               << format_number(vs.at(i, j)) << "\n";
        }
    }
    finish(os, path);
}

void write_surface_json(const ValueSurface& vs, const std::filesystem::path& path, const std::string& manifest) {
    json j;
    j["schema"] = "lastzero.surface";
    j["version"] = kSurfaceSchemaVersion;
    j["manifest"] = manifest.empty() ? json(nullptr) : json(manifest);
    j["spec"] = to_json(vs.spec);
    j["source"] = to_string(vs.source);
    j["t"] = column(vs.t_grid);
    j["x"] = column(vs.x_grid);
    j["V"] = column(vs.values);
    auto os = open_out(path);
    os << j.dump() << "\n";
    finish(os, path);
}

ValueSurface read_surface_csv(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::string line;
    if (!std::getline(is, line)) throw SchemaError("empty surface file '" + path.string() + "'");
    const auto kv = parse_version_line(line, kSurfaceTag, kSurfaceSchemaVersion);
    ValueSurface vs;
    vs.spec = {parse_double(kv.at("mu"), "version line"), parse_double(kv.at("T"), "version line")};
    vs.source = surface_source_from_string(kv.count("source") ? kv.at("source") : "integral_formula");
    if (!std::getline(is, line) || line != kSurfaceHeader) throw SchemaError("surface header must be 't,x,V'");
    std::vector<double> ts, xs;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 3) throw SchemaError("surface row: expected 3 fields");
        const double t = parse_double(f[0], "surface");
        const double x = parse_double(f[1], "surface");
        if (vs.t_grid.empty() || vs.t_grid.back() != t) vs.t_grid.push_back(t);
        if (vs.t_grid.size() == 1) vs.x_grid.push_back(x);
        vs.values.push_back(parse_double(f[2], "surface"));
    }
    if (vs.values.size() != vs.t_grid.size() * vs.x_grid.size()) throw SchemaError("surface is not rectangular");
    return vs;
}

std::string policy_report_line(const PolicyReport& r, const std::string& manifest) {
    json j = to_json(r);
    j["schema"] = "lastzero.policy_report";
    j["version"] = 1;
    j["manifest"] = manifest.empty() ? json(nullptr) : json(manifest);
    return j.dump();
}

void write_per_path_csv(const PolicyEvaluation& ev, std::size_t policy, const std::filesystem::path& path) {
    auto os = open_out(path);
    os << "path_id,g,tau,abs_error\n";
    const auto& tau = ev.tau.at(policy);
    const auto& loss = ev.loss.at(policy);
    for (std::size_t p = 0; p < ev.g.size(); ++p) {
        os << p << ',' << format_number(ev.g[p]) << ',' << format_number(tau[p]) << ',' << format_number(loss[p])
           << "\n";
    }
    finish(os, path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    auto os = open_out(path);
    os << text;
    finish(os, path);
}

std::string read_text(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

std::string RunManifest::hash() const {
    const json core = {
        {"command", command}, {"spec", spec}, {"config", config}, {"inputs", inputs}, {"tool_version", tool_version}};
    return hex64(fnv1a64(core.dump()));
}

json RunManifest::to_json() const {
    return {{"schema", "lastzero.manifest"},
            {"version", 1},
            {"hash", hash()},
            {"command", command},
            {"spec", spec},
            {"config", config},
            {"inputs", inputs},
            {"outputs", outputs},
            {"tool_version", tool_version},
            {"started_at", started_at},
            {"wall_time_s", wall_time_s}};
}

}  // namespace lastzero
