#include "homogenlab/config.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "homogenlab/vtk_io.hpp"

namespace homogen {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad number for '" + key + "': " + v);
    return x;
}

long to_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw ConfigError("config: bad integer for '" + key + "': " + v);
    return x;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::istringstream is(v);
    std::string tok;
    while (std::getline(is, tok, ',')) out.push_back(to_double(key, trim(tok)));
    if (out.empty()) throw ConfigError("config: empty list for '" + key + "'");
    return out;
}

Vec3 to_vec3(const std::string& key, const std::string& v) {
    std::vector<double> lst = to_list(key, v);
    if (lst.size() != 3)
        throw ConfigError("config: '" + key + "' needs three comma-separated values");
    return {lst[0], lst[1], lst[2]};
}

struct SourceKeys {
    std::string kind = "constant";
    double amplitude = 0.0;
    Vec3 center{0.5, 0.5, 0.5};
    bool center_set = false;
    double width = 0.1;
    double support_radius = -1.0;  // <= 0 means none
};

SourceSpec finalize_source(const std::string& section, const SourceKeys& k,
                           const BoxDomain& box) {
    SourceSpec s;
    if (k.kind == "constant") {
        s = SourceSpec::constant(k.amplitude);
    } else if (k.kind == "gaussian") {
        s = SourceSpec::gaussian(k.amplitude, k.center, k.width);
    } else if (k.kind == "product_sine") {
        s = SourceSpec::product_sine(box, k.amplitude);
    } else {
        throw ConfigError("config: unknown kind for '" + section + ".kind': " + k.kind);
    }
    if (!k.center_set)
        for (int d = 0; d < 3; ++d) s.center[d] = 0.5 * (box.lo[d] + box.hi[d]);
    else if (k.kind != "product_sine")
        s.center = k.center;
    if (k.support_radius > 0.0) s.support_radius = k.support_radius;
    if (k.kind == "gaussian" && k.width <= 0.0)
        throw ConfigError("config: 'source." + section + ".width' must be positive");
    return s;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig c;
    SourceKeys fk, gk;
    bool seen_workers_env = false;
    if (const char* env = std::getenv("HOMOGENLAB_WORKERS")) {
        c.workers = (int)to_int("HOMOGENLAB_WORKERS", env);
        seen_workers_env = true;
    }
    (void)seen_workers_env;

    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "config: line " << lineno << " is not key=value: " << line;
            throw ConfigError(os.str());
        }
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "box.lo") c.box.lo = to_vec3(key, val);
        else if (key == "box.hi") c.box.hi = to_vec3(key, val);
        else if (key == "grid.n") {
            Vec3 v = to_vec3(key, val);
            c.grid_n = {(int)v[0], (int)v[1], (int)v[2]};
        } else if (key == "sweep.epsilon") c.epsilons = to_list(key, val);
        else if (key == "physics.gamma") c.gamma = to_double(key, val);
        else if (key == "physics.a") c.rayleigh = to_double(key, val);
        else if (key == "physics.b") c.conductivity_b = to_double(key, val);
        else if (key == "source.f.kind") fk.kind = val;
        else if (key == "source.f.amplitude") fk.amplitude = to_double(key, val);
        else if (key == "source.f.center") { fk.center = to_vec3(key, val); fk.center_set = true; }
        else if (key == "source.f.width") fk.width = to_double(key, val);
        else if (key == "source.f.support_radius") fk.support_radius = to_double(key, val);
        else if (key == "source.g.kind") gk.kind = val;
        else if (key == "source.g.amplitude") gk.amplitude = to_double(key, val);
        else if (key == "source.g.center") { gk.center = to_vec3(key, val); gk.center_set = true; }
        else if (key == "source.g.width") gk.width = to_double(key, val);
        else if (key == "source.g.support_radius") gk.support_radius = to_double(key, val);
        else if (key == "solver.rel_tol") c.rel_tol = to_double(key, val);
        else if (key == "solver.abs_tol") c.abs_tol = to_double(key, val);
        else if (key == "solver.max_iter") c.max_iter = (int)to_int(key, val);
        else if (key == "solver.preconditioner") {
            if (val == "none") c.precond = Preconditioner::None;
            else if (val == "jacobi") c.precond = Preconditioner::Jacobi;
            else throw ConfigError("config: 'solver.preconditioner' must be none or jacobi");
        } else if (key == "picard.relax") c.relax = to_double(key, val);
        else if (key == "picard.max_outer") c.picard_max_outer = (int)to_int(key, val);
        else if (key == "domain.r_rule") {
            if (val == "geometric_mean") c.r_rule = RRule::GeometricMean;
            else if (val == "midpoint") c.r_rule = RRule::Midpoint;
            else throw ConfigError("config: 'domain.r_rule' must be geometric_mean or midpoint");
        } else if (key == "run.out_dir") c.out_dir = val;
        else if (key == "run.seed") c.seed = (std::uint64_t)to_int(key, val);
        else if (key == "run.workers") c.workers = (int)to_int(key, val);
        else throw ConfigError("config: unknown key '" + key + "'");
    }

    // Schema validation, naming the offending field.
    for (int d = 0; d < 3; ++d) {
        if (c.box.hi[d] <= c.box.lo[d])
            throw ConfigError("config: 'box.hi' must exceed 'box.lo' on every axis");
        if (c.grid_n[d] < 4)
            throw ConfigError("config: 'grid.n' must be at least 4 per axis");
    }
    if (c.gamma <= 0.0) throw ConfigError("config: 'physics.gamma' must be positive");
    if (c.rayleigh < 0.0) throw ConfigError("config: 'physics.a' must be nonnegative");
    if (c.conductivity_b <= 0.0)
        throw ConfigError("config: 'physics.b' must be positive");
    if (c.rel_tol <= 0.0) throw ConfigError("config: 'solver.rel_tol' must be positive");
    if (c.abs_tol <= 0.0) throw ConfigError("config: 'solver.abs_tol' must be positive");
    if (c.max_iter < 1) throw ConfigError("config: 'solver.max_iter' must be >= 1");
    if (c.relax <= 0.0 || c.relax > 1.0)
        throw ConfigError("config: 'picard.relax' must be in (0, 1]");
    if (c.picard_max_outer < 1)
        throw ConfigError("config: 'picard.max_outer' must be >= 1");
    if (c.workers < 1) throw ConfigError("config: 'run.workers' must be >= 1");
    for (double e : c.epsilons)
        if (e <= 0.0) throw ConfigError("config: 'sweep.epsilon' entries must be positive");

    c.f = finalize_source("f", fk, c.box);
    c.g = finalize_source("g", gk, c.box);
    return c;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::stringstream buf;
    buf << is.rdbuf();
    return parse_config_text(buf.str());
}

namespace {

std::string vec3_str(const Vec3& v) {
    return format_double(v[0]) + "," + format_double(v[1]) + "," + format_double(v[2]);
}

void source_entries(std::vector<std::pair<std::string, std::string>>& out,
                    const std::string& prefix, const SourceSpec& s) {
    const char* kinds[] = {"constant", "gaussian", "product_sine"};
    out.emplace_back(prefix + ".kind", kinds[(int)s.kind]);
    out.emplace_back(prefix + ".amplitude", format_double(s.amplitude));
    out.emplace_back(prefix + ".center", vec3_str(s.center));
    out.emplace_back(prefix + ".width", format_double(s.width));
    out.emplace_back(prefix + ".support_radius",
                     s.support_radius ? format_double(*s.support_radius) : "none");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> manifest_entries(const RunConfig& c) {
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("box.lo", vec3_str(c.box.lo));
    out.emplace_back("box.hi", vec3_str(c.box.hi));
    {
        std::ostringstream os;
        os << c.grid_n[0] << "," << c.grid_n[1] << "," << c.grid_n[2];
        out.emplace_back("grid.n", os.str());
    }
    {
        std::string eps;
        for (std::size_t q = 0; q < c.epsilons.size(); ++q)
            eps += (q ? "," : "") + format_double(c.epsilons[q]);
        out.emplace_back("sweep.epsilon", eps);
    }
    out.emplace_back("physics.gamma", format_double(c.gamma));
    out.emplace_back("physics.a", format_double(c.rayleigh));
    out.emplace_back("physics.b", format_double(c.conductivity_b));
    source_entries(out, "source.f", c.f);
    source_entries(out, "source.g", c.g);
    out.emplace_back("solver.rel_tol", format_double(c.rel_tol));
    out.emplace_back("solver.abs_tol", format_double(c.abs_tol));
    out.emplace_back("solver.max_iter", std::to_string(c.max_iter));
    out.emplace_back("solver.preconditioner",
                     c.precond == Preconditioner::Jacobi ? "jacobi" : "none");
    out.emplace_back("picard.relax", format_double(c.relax));
    out.emplace_back("picard.max_outer", std::to_string(c.picard_max_outer));
    out.emplace_back("domain.r_rule",
                     c.r_rule == RRule::GeometricMean ? "geometric_mean" : "midpoint");
    out.emplace_back("run.seed", std::to_string(c.seed));
    out.emplace_back("run.workers", std::to_string(c.workers));
    return out;
}

}  // namespace homogen
