#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "lastzero/bellman.hpp"
#include "lastzero/boundary.hpp"
#include "lastzero/errors.hpp"
#include "lastzero/io.hpp"
#include "lastzero/montecarlo.hpp"
#include "lastzero/plot.hpp"
#include "lastzero/value.hpp"

namespace lastzero::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Flag error raised after parsing; maps to exit code 2.
struct BadArgs : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

std::size_t count_flag(const std::string& flag, double v, double min) {
    if (!std::isfinite(v) || v < min || v != std::floor(v) || v > 1e15) {
        std::ostringstream os;
        os << flag << ": expected an integer >= " << min << ", got " << v;
        throw BadArgs(os.str());
    }
    return static_cast<std::size_t>(v);
}

std::pair<std::size_t, std::size_t> parse_dims(const std::string& flag, const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw BadArgs(flag + ": expected AxB, got '" + s + "'");
    try {
        std::size_t used = 0;
        const double a = std::stod(s.substr(0, x), &used);
        if (used != x) throw std::invalid_argument("a");
        const std::string rest = s.substr(x + 1);
        const double b = std::stod(rest, &used);
        if (used != rest.size()) throw std::invalid_argument("b");
        return {count_flag(flag, a, 2), count_flag(flag, b, 2)};
    } catch (const BadArgs&) {
        throw;
    } catch (const std::exception&) {
        throw BadArgs(flag + ": expected AxB, got '" + s + "'");
    }
}

fs::path stem_of(const std::string& out) {
    fs::path p(out);
    if (p.extension() == ".csv" || p.extension() == ".json") p.replace_extension();
    return p;
}

fs::path with_suffix(const fs::path& stem, const std::string& suffix) { return fs::path(stem.string() + suffix); }

std::string now_iso() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

std::string input_ref(const std::string& path) { return path + "#" + hex64(fnv1a64(read_text(path))); }

void ensure_parent(const fs::path& p) {
    if (p.has_parent_path() && !fs::exists(p.parent_path())) {
        std::error_code ec;
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw IoError("cannot create directory '" + p.parent_path().string() + "'");
    }
}

class Timer {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void write_manifest(RunManifest& m, const fs::path& path, const Timer& timer) {
    m.wall_time_s = timer.seconds();
    m.outputs.push_back(path.string());
    write_text(path, m.to_json().dump(2) + "\n");
}

struct SolveArgs {
    double mu = 0.0;
    double horizon = 1.0;
    double n_steps = 400;
    double tol = 1e-6;
    double tol_b = 1e-7;
    double max_iter = 200;
    double damping = 0.8;
    std::string out;
};

int cmd_solve(const SolveArgs& a, std::ostream& out) {
    Timer timer;
    const ProblemSpec spec{a.mu, a.horizon};
    SolverConfig cfg;
    cfg.n_steps = count_flag("--n-steps", a.n_steps, 2);
    cfg.max_iter = count_flag("--max-iter", a.max_iter, 1);
    cfg.tol_res = a.tol;
    cfg.tol_b = a.tol_b;
    cfg.damping = a.damping;

    RunManifest m;
    m.command = "solve";
    m.spec = to_json(spec);
    m.config = to_json(cfg);
    m.started_at = now_iso();
    const std::string hash = m.hash();

    const BoundaryPair bp = solve_boundaries(spec, cfg);
    const fs::path stem = stem_of(a.out);
    ensure_parent(stem);
    const fs::path csv = with_suffix(stem, ".csv");
    const fs::path js = with_suffix(stem, ".json");
    write_boundaries_csv(bp, csv, hash);
    write_boundaries_json(bp, js, hash);
    m.outputs = {csv.string(), js.string()};
    write_manifest(m, with_suffix(stem, ".manifest.json"), timer);

    double worst = 0.0;
    for (std::size_t i = 0; i < bp.size(); ++i) {
        worst = std::max({worst, std::abs(bp.residual_minus[i]), std::abs(bp.residual_plus[i])});
    }
    out << "b_minus(0) = " << format_number(bp.b_minus.front()) << "\n";
    out << "b_plus(0) = " << format_number(bp.b_plus.front()) << "\n";
    out << "max |residual| = " << format_number(worst) << "\n";
    out << "manifest = " << hash << "\n";
    return kOk;
}

struct ValueArgs {
    std::string boundaries;
    std::string grid = "100x200";
    std::string out;
};

int cmd_value(const ValueArgs& a, std::ostream& out) {
    Timer timer;
    const auto [n_t, n_x] = parse_dims("--grid", a.grid);
    const BoundaryPair bp = read_boundaries(a.boundaries);
    RunManifest m;
    m.command = "value";
    m.spec = to_json(bp.spec);
    m.config = {{"grid", {n_t, n_x}}};
    m.inputs = {input_ref(a.boundaries)};
    m.started_at = now_iso();
    const std::string hash = m.hash();

    const double v00 = value_at(bp, 0.0, 0.0);
    const double eg = mean_g(bp.spec);
    if (!a.out.empty()) {
        const ValueSurface vs = value_surface(bp, n_t, n_x);
        const fs::path stem = stem_of(a.out);
        ensure_parent(stem);
        const fs::path csv = with_suffix(stem, ".csv");
        write_surface_csv(vs, csv, hash);
        m.outputs = {csv.string()};
        write_manifest(m, with_suffix(stem, ".manifest.json"), timer);
    }
    out << "V(0,0) = " << format_number(v00) << "\n";
    out << "E(g) = " << format_number(eg) << "\n";
    out << "V* = " << format_number(v00 + eg) << "\n";
    return kOk;
}

struct SimulateArgs {
    std::string boundaries;
    double mu = 0.0;
    double horizon = 1.0;
    double paths = 1e5;
    double steps = 4000;
    std::uint64_t seed = SimConfig{}.seed;
    std::vector<std::string> policies;
    bool no_bridge = false;
    std::string out;
    std::string per_path;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    Timer timer;
    SimConfig cfg;
    cfg.n_paths = count_flag("--paths", a.paths, 1);
    cfg.n_steps = count_flag("--steps", a.steps, 2);
    cfg.seed = a.seed;
    cfg.bridge_correction = !a.no_bridge;
    if (!a.per_path.empty() && cfg.n_paths > kMaxStoredPaths) {
        throw BadArgs("--per-path: only available for --paths <= " + std::to_string(kMaxStoredPaths));
    }
    std::shared_ptr<const BoundaryPair> bp;
    ProblemSpec spec{a.mu, a.horizon};
    RunManifest m;
    if (!a.boundaries.empty()) {
        bp = std::make_shared<const BoundaryPair>(read_boundaries(a.boundaries));
        spec = bp->spec;
        m.inputs = {input_ref(a.boundaries)};
    }
    std::vector<std::string> names = a.policies;
    if (names.empty()) names = {"optimal"};
    std::vector<Policy> policies;
    for (const auto& n : names) {
        try {
            policies.push_back(parse_policy(n, bp));
        } catch (const std::invalid_argument& e) {
            throw BadArgs(std::string("--policy: ") + e.what());
        }
    }
    m.command = "simulate";
    m.spec = to_json(spec);
    m.config = to_json(cfg);
    m.config["policies"] = names;
    m.started_at = now_iso();
    const std::string hash = m.hash();

    const PolicyEvaluation ev = evaluate_policies(spec, policies, cfg);
    std::string lines;
    for (const auto& r : ev.reports) lines += policy_report_line(r, hash) + "\n";
    out << lines;
    if (!a.out.empty()) {
        const fs::path p(a.out);
        ensure_parent(p);
        write_text(p, lines);
        m.outputs.push_back(p.string());
    }
    if (!a.per_path.empty()) {
        const fs::path p(a.per_path);
        ensure_parent(p);
        write_per_path_csv(ev, 0, p);
        m.outputs.push_back(p.string());
    }
    if (!a.out.empty()) {
        fs::path mp(a.out);
        mp.replace_extension(".manifest.json");
        write_manifest(m, mp, timer);
    }
    return kOk;
}

struct CompareArgs {
    double mu = 0.0;
    double horizon = 1.0;
    double n_steps = 400;
    std::string lattice = "2000x2001";
    std::vector<std::string> boundaries;
    std::string out;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    Timer timer;
    RunManifest m;
    m.command = "compare";
    m.started_at = now_iso();
    json report;
    OracleDistance d;
    if (!a.boundaries.empty()) {
        if (a.boundaries.size() != 2) throw BadArgs("--boundaries: compare takes exactly two files");
        const BoundaryPair x = read_boundaries(a.boundaries[0]);
        const BoundaryPair y = read_boundaries(a.boundaries[1]);
        m.spec = to_json(x.spec);
        m.inputs = {input_ref(a.boundaries[0]), input_ref(a.boundaries[1])};
        d = oracle_compare(x, y);
    } else {
        const ProblemSpec spec{a.mu, a.horizon};
        SolverConfig cfg;
        cfg.n_steps = count_flag("--n-steps", a.n_steps, 2);
        const auto [n_t, n_x] = parse_dims("--lattice", a.lattice);
        LatticeSpec lat;
        lat.n_t = n_t;
        lat.n_x = n_x;
        if (n_x % 2 == 0) throw BadArgs("--lattice: the space dimension must be odd");
        m.spec = to_json(spec);
        m.config = {{"solver", to_json(cfg)}, {"lattice", to_json(lat)}};
        const BoundaryPair bi = solve_boundaries(spec, cfg);
        const BellmanResult br = bellman_solve(spec, lat);
        d = oracle_compare(bi, br.boundaries);
        const double vi = value_at(bi, 0.0, 0.0);
        report["value_00"] = {{"integral", vi}, {"bellman", br.value_00}, {"difference", vi - br.value_00}};
        out << "V(0,0) integral = " << format_number(vi) << "\n";
        out << "V(0,0) bellman = " << format_number(br.value_00) << "\n";
    }
    const std::string hash = m.hash();
    report["schema"] = "lastzero.compare";
    report["version"] = 1;
    report["manifest"] = hash;
    report["spec"] = m.spec;
    report["distance"] = to_json(d);
    out << "sup = " << format_number(d.sup) << "\n";
    out << "l2 = " << format_number(d.l2) << "\n";
    if (!a.out.empty()) {
        const fs::path p(a.out);
        ensure_parent(p);
        write_text(p, report.dump(2) + "\n");
        m.outputs = {p.string()};
        fs::path mp(p);
        mp.replace_extension(".manifest.json");
        write_manifest(m, mp, timer);
    }
    return kOk;
}

struct PlotArgs {
    std::vector<std::string> boundaries;
    std::string out;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
    Timer timer;
    if (a.boundaries.empty()) throw BadArgs("--boundaries: at least one file is required");
    RunManifest m;
    m.command = "plot";
    m.started_at = now_iso();
    std::vector<BoundaryPair> pairs;
    for (const auto& f : a.boundaries) {
        pairs.push_back(read_boundaries(f));
        m.inputs.push_back(input_ref(f));
    }
    m.spec = json::array();
    for (const auto& bp : pairs) m.spec.push_back(to_json(bp.spec));
    PlotOptions opts;
    opts.manifest = m.hash();
    const fs::path p(a.out);
    ensure_parent(p);
    write_text(p, render_boundaries_svg(pairs, opts));
    m.outputs = {p.string()};
    fs::path mp(p);
    mp.replace_extension(".manifest.json");
    write_manifest(m, mp, timer);
    out << "wrote " << p.string() << "\n";
    return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Optimal prediction of the last zero of Brownian motion with drift", "lastzero"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);
    std::function<int()> action;

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Solve for the optimal stopping boundaries");
    s->add_option("--mu", solve.mu, "Drift")->capture_default_str();
    s->add_option("--horizon", solve.horizon, "Horizon T")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--n-steps", solve.n_steps, "Time steps")->capture_default_str();
    s->add_option("--tol", solve.tol, "Residual tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--tol-b", solve.tol_b, "Boundary tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    s->add_option("--max-iter", solve.max_iter, "Iterations per step")->capture_default_str();
    s->add_option("--damping", solve.damping, "Newton damping in (0,1]")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    s->add_option("--out", solve.out, "Output stem (writes .csv, .json, .manifest.json)")->required();
    s->callback([&] { action = [&] { return cmd_solve(solve, out); }; });

    ValueArgs value;
    auto* v = app.add_subcommand("value", "Value surface from a boundary file");
    v->add_option("--boundaries", value.boundaries, "Boundary CSV or JSON")->required();
    v->add_option("--grid", value.grid, "Surface size TxX")->capture_default_str();
    v->add_option("--out", value.out, "Output stem for the surface CSV");
    v->callback([&] { action = [&] { return cmd_value(value, out); }; });

    SimulateArgs sim;
    auto* m = app.add_subcommand("simulate", "Monte Carlo evaluation of stopping rules");
    m->add_option("--boundaries", sim.boundaries, "Boundary CSV or JSON");
    m->add_option("--mu", sim.mu, "Drift when no boundary file is given")->capture_default_str();
    m->add_option("--horizon", sim.horizon, "Horizon when no boundary file is given")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    m->add_option("--paths", sim.paths, "Number of paths")->capture_default_str();
    m->add_option("--steps", sim.steps, "Steps per path")->capture_default_str();
    m->add_option("--seed", sim.seed, "64-bit seed")->capture_default_str();
    m->add_option("--policy", sim.policies,
                  "optimal | fixed_time:C | sqrt_rule:Z | scaled_optimal:F (repeatable)");
    m->add_flag("--no-bridge", sim.no_bridge, "Disable the bridge crossing correction");
    m->add_option("--out", sim.out, "Report file (JSON lines)");
    m->add_option("--per-path", sim.per_path, "Per-path CSV for the first policy");
    m->callback([&] { action = [&] { return cmd_simulate(sim, out); }; });

    CompareArgs cmp;
    auto* c = app.add_subcommand("compare", "Integral-equation boundaries against the lattice oracle");
    c->add_option("--mu", cmp.mu, "Drift")->capture_default_str();
    c->add_option("--horizon", cmp.horizon, "Horizon T")->check(CLI::PositiveNumber)->capture_default_str();
    c->add_option("--n-steps", cmp.n_steps, "Integral solver steps")->capture_default_str();
    c->add_option("--lattice", cmp.lattice, "Lattice size NTxNX")->capture_default_str();
    c->add_option("--boundaries", cmp.boundaries, "Compare two boundary files instead")->expected(2);
    c->add_option("--out", cmp.out, "Report JSON");
    c->callback([&] { action = [&] { return cmd_compare(cmp, out); }; });

    PlotArgs plot;
    auto* p = app.add_subcommand("plot", "SVG of boundary files");
    p->add_option("--boundaries", plot.boundaries, "Boundary files")->expected(0, -1);
    p->add_option("--out", plot.out, "SVG file")->required();
    p->callback([&] { action = [&] { return cmd_plot(plot, out); }; });

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kBadArgs;
    }

    try {
        return action ? action() : kBadArgs;
    } catch (const BadArgs& e) {
        err << "error: " << e.what() << "\n";
        return kBadArgs;
    } catch (const NonConvergence& e) {
        err << "error: solver did not converge at step " << e.step() << " (residual " << format_number(e.residual())
            << "): " << e.what() << "\n";
        return kNonConvergence;
    } catch (const InvariantViolation& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const LatticeTooCoarse& e) {
        err << "error: " << e.what() << "\n";
        return kNonConvergence;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return kIoError;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << "\n";
        return kSchemaMismatch;
    } catch (const SpecMismatch& e) {
        err << "error: " << e.what() << "\n";
        return kSchemaMismatch;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kBadArgs;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kBadArgs;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInternal;
    }
}

}  // namespace lastzero::cli
