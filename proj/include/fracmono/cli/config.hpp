#pragma once

// INI run configuration for the fracmono tool. Every schema violation is
// reported as ConfigError naming the offending key as section.key.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "fracmono/extension.hpp"
#include "fracmono/io/csv.hpp"
#include "fracmono/leray_lions.hpp"
#include "fracmono/mesh.hpp"
#include "fracmono/monops.hpp"

namespace fracmono::cli {

class ConfigError : public InvalidArgument {
public:
    ConfigError(const std::string& path, const std::string& what)
        : InvalidArgument("config error at " + path + ": " + what), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct OperatorSpec {
    std::string kind;  // scalar | linear_spd | box | power_prox | plap_grid | leray_lions
    long dim = 1;
    double a = 1.0;
    std::string matrix_file;
    double lo = -1.0, hi = 1.0;
    double q = 2.0, c = 1.0;
    double p = 2.0;
    int nx = 8, ny = 1;
    double h = 1.0;
    double kappa = 1.0, kappa_x = 0.0, eps = 1e-3;  // leray_lions: kappa(x, y) = kappa + kappa_x x
    LateralBC lateral = LateralBC::Dirichlet;
};

struct MeshSpec {
    int n_cells = 1024;
    std::optional<double> z_max;    // auto when empty
    std::optional<double> grading;  // auto when empty
    FarBC far_bc = FarBC::DirichletAtZero;
};

struct RunSpec {
    std::string name;
    HVector phi;
    bool robin = false;
    double lambda = 1.0;
    double t_final = 1.0;
    int m = 16;
    bool record_u = false;
    int u_stride = 1;
};

struct VerifySpec {
    std::vector<std::string> checks;
    int pairs = 20;
    double lambda = 1.0;
};

struct ConvergeSpec {
    std::vector<int> n_list;
    std::vector<int> m_list;
};

struct RunConfig {
    std::filesystem::path source;
    std::string text;  ///< raw file contents, hashed into the manifest
    OperatorSpec op;
    std::vector<double> s_list;
    MeshSpec mesh;
    SolverConfig solver;
    RunSpec run;
    VerifySpec verify;
    ConvergeSpec converge;
};

namespace detail {

using boost::property_tree::ptree;

inline std::string key(const std::string& section, const std::string& k) { return section + "." + k; }

inline std::optional<std::string> get(const ptree& pt, const std::string& path) {
    if (auto v = pt.get_optional<std::string>(ptree::path_type(path, '.'))) return *v;
    return std::nullopt;
}

inline double to_double(const std::string& path, const std::string& s) {
    try {
        return io::parse_number(s, path);
    } catch (const InvalidArgument&) {
        throw ConfigError(path, "not a number: '" + s + "'");
    }
}

inline long to_long(const std::string& path, const std::string& s) {
    const double v = to_double(path, s);
    if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError(path, "not an integer: '" + s + "'");
    return static_cast<long>(v);
}

inline bool to_bool(const std::string& path, const std::string& s) {
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(path, "expected true or false, got '" + s + "'");
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& c : io::split_csv_line(s))
        if (!c.empty()) out.push_back(c);
    return out;
}

inline double num_or(const ptree& pt, const std::string& path, double def) {
    auto v = get(pt, path);
    return v ? to_double(path, *v) : def;
}

inline long integer(const ptree& pt, const std::string& path, long def) {
    auto v = get(pt, path);
    return v ? to_long(path, *v) : def;
}

inline std::string str(const ptree& pt, const std::string& path, const std::string& def) {
    auto v = get(pt, path);
    return v ? *v : def;
}

inline std::string required(const ptree& pt, const std::string& path) {
    auto v = get(pt, path);
    if (!v) throw ConfigError(path, "missing required key");
    return *v;
}

inline void check(bool ok, const std::string& path, const std::string& what) {
    if (!ok) throw ConfigError(path, what);
}

inline void reject_unknown(const ptree& pt, const std::map<std::string, std::set<std::string>>& schema) {
    for (const auto& [section, body] : pt) {
        auto it = schema.find(section);
        if (it == schema.end()) throw ConfigError(section, "unknown section");
        for (const auto& [k, v] : body)
            if (!it->second.count(k)) throw ConfigError(key(section, k), "unknown key");
    }
}

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path q(p);
    return q.is_absolute() ? q : base.parent_path() / q;
}

}  // namespace detail

inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& source = "config.ini") {
    using namespace detail;
    ptree pt;
    {
        std::istringstream in(text);
        try {
            boost::property_tree::ini_parser::read_ini(in, pt);
        } catch (const boost::property_tree::ini_parser_error& e) {
            throw ConfigError("line " + std::to_string(e.line()), e.message());
        }
    }
    reject_unknown(pt, {
                           {"operator", {"kind", "dim", "a", "matrix", "lo", "hi", "q", "c", "p", "nx", "ny", "h",
                                         "lateral", "kappa", "kappa_x", "eps"}},
                           {"frac", {"s", "s_list"}},
                           {"mesh", {"n_nodes", "z_max", "grading", "far_bc"}},
                           {"solver", {"method", "step", "relaxation", "max_iters", "tol", "k_max"}},
                           {"run", {"name", "phi", "phi_file", "boundary", "lambda", "t_final", "m", "record_u",
                                    "u_stride"}},
                           {"verify", {"checks", "pairs", "lambda"}},
                           {"converge", {"n_list", "m_list"}},
                       });

    RunConfig cfg;
    cfg.source = source;
    cfg.text = text;

    // [operator]
    auto& op = cfg.op;
    op.kind = required(pt, "operator.kind");
    op.dim = integer(pt, "operator.dim", 1);
    check(op.dim >= 1, "operator.dim", "must be >= 1");
    if (op.kind == "scalar") {
        op.a = num_or(pt, "operator.a", 1.0);
        check(op.a >= 0.0, "operator.a", "must be nonnegative");
    } else if (op.kind == "linear_spd") {
        op.matrix_file = resolve_path(source, required(pt, "operator.matrix")).string();
    } else if (op.kind == "box") {
        op.lo = num_or(pt, "operator.lo", -1.0);
        op.hi = num_or(pt, "operator.hi", 1.0);
        check(op.lo <= op.hi, "operator.hi", "must be >= operator.lo");
    } else if (op.kind == "power_prox") {
        op.q = num_or(pt, "operator.q", 2.0);
        op.c = num_or(pt, "operator.c", 1.0);
        check(op.q > 1.0, "operator.q", "must exceed 1");
        check(op.c > 0.0, "operator.c", "must be positive");
    } else if (op.kind == "plap_grid" || op.kind == "leray_lions") {
        op.p = num_or(pt, "operator.p", 2.0);
        op.nx = static_cast<int>(integer(pt, "operator.nx", 8));
        op.ny = static_cast<int>(integer(pt, "operator.ny", 1));
        op.h = num_or(pt, "operator.h", 1.0);
        check(op.p > 1.0, "operator.p", "must exceed 1");
        check(op.nx >= 1, "operator.nx", "must be >= 1");
        check(op.ny >= 1, "operator.ny", "must be >= 1");
        check(op.h > 0.0, "operator.h", "must be positive");
        const std::string lat = str(pt, "operator.lateral", "dirichlet");
        if (lat == "dirichlet") op.lateral = LateralBC::Dirichlet;
        else if (lat == "neumann") op.lateral = LateralBC::Neumann;
        else if (lat == "robin") op.lateral = LateralBC::Robin;
        else throw ConfigError("operator.lateral", "expected dirichlet, neumann or robin");
        if (op.kind == "leray_lions") {
            op.kappa = num_or(pt, "operator.kappa", 1.0);
            op.kappa_x = num_or(pt, "operator.kappa_x", 0.0);
            op.eps = num_or(pt, "operator.eps", 1e-3);
            check(op.p >= 2.0, "operator.p", "must be >= 2 for leray_lions");
            check(op.kappa > 0.0 && op.kappa + op.kappa_x * op.h * (op.nx + 1) > 0.0, "operator.kappa",
                  "kappa(x) must stay positive on the grid");
            check(op.eps >= 0.0, "operator.eps", "must be nonnegative");
        }
    } else {
        throw ConfigError("operator.kind", "unknown operator '" + op.kind + "'");
    }

    // [frac]
    if (auto l = get(pt, "frac.s_list")) {
        check(!get(pt, "frac.s"), "frac.s", "give either s or s_list");
        for (const auto& t : split_list(*l)) cfg.s_list.push_back(to_double("frac.s_list", t));
        check(!cfg.s_list.empty(), "frac.s_list", "must not be empty");
        for (double s : cfg.s_list) check(s > 0.0 && s < 1.0, "frac.s_list", "values must lie in (0, 1)");
    } else {
        const double s = to_double("frac.s", required(pt, "frac.s"));
        check(s > 0.0 && s < 1.0, "frac.s", "must lie in (0, 1)");
        cfg.s_list = {s};
    }

    // [mesh]
    cfg.mesh.n_cells = static_cast<int>(integer(pt, "mesh.n_nodes", 1024));
    check(cfg.mesh.n_cells >= 8, "mesh.n_nodes", "must be >= 8");
    const std::string zm = str(pt, "mesh.z_max", "auto");
    if (zm != "auto") {
        cfg.mesh.z_max = to_double("mesh.z_max", zm);
        check(*cfg.mesh.z_max > 0.0, "mesh.z_max", "must be positive");
    }
    const std::string gr = str(pt, "mesh.grading", "auto");
    if (gr != "auto") {
        cfg.mesh.grading = to_double("mesh.grading", gr);
        check(*cfg.mesh.grading >= 1.0, "mesh.grading", "must be >= 1");
    }
    const std::string fb = str(pt, "mesh.far_bc", "dirichlet_at_zero");
    if (fb == "dirichlet_at_zero") cfg.mesh.far_bc = FarBC::DirichletAtZero;
    else if (fb == "neumann") cfg.mesh.far_bc = FarBC::HomogeneousNeumann;
    else throw ConfigError("mesh.far_bc", "expected dirichlet_at_zero or neumann");

    // [solver]
    auto& sv = cfg.solver;
    const std::string method = str(pt, "solver.method", "splitting");
    if (method == "splitting") sv.method = SolverMethod::Splitting;
    else if (method == "regularized_path") sv.method = SolverMethod::RegularizedPath;
    else throw ConfigError("solver.method", "expected splitting or regularized_path");
    if (const std::string st = str(pt, "solver.step", "auto"); st != "auto") {
        sv.step = to_double("solver.step", st);
        check(*sv.step > 0.0, "solver.step", "must be positive");
    }
    sv.relaxation = num_or(pt, "solver.relaxation", 1.0);
    check(sv.relaxation > 0.0 && sv.relaxation < 2.0, "solver.relaxation", "must lie in (0, 2)");
    sv.max_iters = integer(pt, "solver.max_iters", 50000);
    check(sv.max_iters >= 1, "solver.max_iters", "must be >= 1");
    sv.tol = num_or(pt, "solver.tol", 1e-10);
    check(sv.tol > 0.0, "solver.tol", "must be positive");
    const long k_max = integer(pt, "solver.k_max", 20);
    check(k_max >= 20, "solver.k_max", "must be >= 20 (last λ at most 1e-6 of the first)");
    sv.schedule = RegularizationSchedule::geometric(static_cast<int>(k_max));

    // [run]
    auto& run = cfg.run;
    run.name = str(pt, "run.name", source.stem().string());
    check(!run.name.empty() && run.name.find('/') == std::string::npos && run.name != "." && run.name != "..",
          "run.name", "must be a plain directory name");
    const auto phi_inline = get(pt, "run.phi");
    const auto phi_file = get(pt, "run.phi_file");
    check(!(phi_inline && phi_file), "run.phi", "give either phi or phi_file");
    if (phi_inline) {
        const auto cells = split_list(*phi_inline);
        run.phi.resize(static_cast<long>(cells.size()));
        for (std::size_t i = 0; i < cells.size(); ++i) run.phi[static_cast<long>(i)] = to_double("run.phi", cells[i]);
    } else if (phi_file) {
        try {
            run.phi = io::read_vector(resolve_path(source, *phi_file).string());
        } catch (const InvalidArgument& e) {
            throw ConfigError("run.phi_file", e.what());
        }
    }
    const std::string bd = str(pt, "run.boundary", "dirichlet");
    if (bd == "dirichlet") run.robin = false;
    else if (bd == "robin") run.robin = true;
    else throw ConfigError("run.boundary", "expected dirichlet or robin");
    run.lambda = num_or(pt, "run.lambda", 1.0);
    check(run.lambda > 0.0, "run.lambda", "must be positive");
    run.t_final = num_or(pt, "run.t_final", 1.0);
    check(run.t_final > 0.0, "run.t_final", "must be positive");
    run.m = static_cast<int>(integer(pt, "run.m", 16));
    check(run.m >= 1, "run.m", "must be >= 1");
    if (auto r = get(pt, "run.record_u")) run.record_u = to_bool("run.record_u", *r);
    run.u_stride = static_cast<int>(integer(pt, "run.u_stride", 1));
    check(run.u_stride >= 1, "run.u_stride", "must be >= 1");

    // [verify]
    static const std::set<std::string> known = {"spectral", "bessel",     "resolvent", "monotonicity",
                                                "square",   "contraction", "complete",  "semigroup"};
    for (const auto& c : split_list(str(pt, "verify.checks", ""))) {
        check(known.count(c) > 0, "verify.checks", "unknown check '" + c + "'");
        cfg.verify.checks.push_back(c);
    }
    cfg.verify.pairs = static_cast<int>(integer(pt, "verify.pairs", 20));
    check(cfg.verify.pairs >= 1, "verify.pairs", "must be >= 1");
    cfg.verify.lambda = num_or(pt, "verify.lambda", 1.0);
    check(cfg.verify.lambda > 0.0, "verify.lambda", "must be positive");

    // [converge]
    for (const auto& t : split_list(str(pt, "converge.n_list", ""))) {
        const long n = to_long("converge.n_list", t);
        check(n >= 8, "converge.n_list", "entries must be >= 8");
        cfg.converge.n_list.push_back(static_cast<int>(n));
    }
    for (const auto& t : split_list(str(pt, "converge.m_list", ""))) {
        const long m = to_long("converge.m_list", t);
        check(m >= 1, "converge.m_list", "entries must be >= 1");
        cfg.converge.m_list.push_back(static_cast<int>(m));
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("--config", "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str(), path);
}

inline MonotoneOp build_operator(const OperatorSpec& spec) {
    if (spec.kind == "scalar") return make_scalar(spec.a, spec.dim);
    if (spec.kind == "box") return make_box(spec.lo, spec.hi, spec.dim);
    if (spec.kind == "power_prox") return make_power_prox(spec.q, spec.dim, spec.c);
    if (spec.kind == "linear_spd") {
        Matrix M;
        try {
            M = io::read_matrix(spec.matrix_file);
            return make_linear_spd(M);
        } catch (const InvalidArgument& e) {
            throw ConfigError("operator.matrix", e.what());
        }
    }
    GridSpec g;
    g.nx = spec.nx;
    g.ny = spec.ny;
    g.h = spec.h;
    if (spec.kind == "leray_lions") {
        const double k0 = spec.kappa, k1 = spec.kappa_x;
        const double kmin = std::min(k0, k0 + k1 * spec.h * (spec.nx + 1));
        return make_plap_grid(LerayLionsField::weighted_power(
                                  spec.p, [k0, k1](GridPoint x) { return k0 + k1 * x.x; }, kmin, spec.eps,
                                  spec.lateral),
                              g);
    }
    return make_plap_grid(LerayLionsField::p_laplacian(spec.p, spec.lateral), g);
}

}  // namespace fracmono::cli
