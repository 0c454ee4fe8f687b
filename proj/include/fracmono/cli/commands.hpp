#pragma once

// Commands of the fracmono tool. Each writes into <out>/<command>/<name>/ and
// returns the process exit status. Outputs depend only on (config, seed).

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include <json.hpp>

#include "fracmono/audit.hpp"
#include "fracmono/cli/config.hpp"
#include "fracmono/dtn.hpp"
#include "fracmono/extension.hpp"
#include "fracmono/semigroup.hpp"
#include "fracmono/verify/bessel.hpp"
#include "fracmono/verify/contraction.hpp"
#include "fracmono/verify/spectral.hpp"

namespace fracmono::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

struct Context {
    RunConfig cfg;
    fs::path out_root = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
};

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string num(double x) { return fmt::format("{:.17g}", x); }

namespace detail {

/// f(i) for i < n on up to `jobs` threads; results are indexed, so the order
/// of completion never shows in the output.
template <class T>
std::vector<T> parallel_map(std::size_t n, int jobs, const std::function<T(std::size_t)>& f) {
    std::vector<T> out(n);
    std::vector<std::exception_ptr> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next++) < n;) {
            try {
                out[i] = f(i);
            } catch (...) {
                err[i] = std::current_exception();
            }
        }
    };
    const std::size_t k = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < k; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : err)
        if (e) std::rethrow_exception(e);
    return out;
}

inline Json vec_json(const HVector& v) {
    Json a = Json::array();
    for (long i = 0; i < v.size(); ++i) a.push_back(v[i]);
    return a;
}

inline std::string s_tag(double s) { return fmt::format("s{}", s); }

class RunDir {
public:
    RunDir(const Context& ctx, const std::string& command) : ctx_(ctx), command_(command) {
        dir_ = ctx.out_root / command / ctx.cfg.run.name;
        fs::create_directories(dir_);
    }

    const fs::path& path() const { return dir_; }

    void write(const std::string& file, const std::string& contents) {
        std::ofstream out(dir_ / file, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + (dir_ / file).string());
        out << contents;
        files_.push_back(file);
    }

    void write_json(const std::string& file, const Json& j) { write(file, j.dump(2) + "\n"); }

    void finish(bool pass) {
        Json m;
        m["command"] = command_;
        m["name"] = ctx_.cfg.run.name;
        m["config"] = ctx_.cfg.source.filename().string();
        m["config_hash"] = fmt::format("fnv1a64:{:016x}", fnv1a(ctx_.cfg.text + "\nseed=" + std::to_string(ctx_.seed)));
        m["seed"] = ctx_.seed;
        std::sort(files_.begin(), files_.end());
        m["files"] = files_;
        m["pass"] = pass;
        std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
        out << m.dump(2) << "\n";
    }

private:
    const Context& ctx_;
    std::string command_;
    fs::path dir_;
    std::vector<std::string> files_;
};

inline ZMesh make_mesh(const RunConfig& cfg, const MonotoneOp& op, const FracParams& p, int n_cells) {
    try {
        return default_zmesh(op, p, n_cells, cfg.mesh.z_max, cfg.mesh.grading, cfg.mesh.far_bc);
    } catch (const InvalidArgument& e) {
        throw ConfigError("mesh.z_max", e.what());
    }
}

inline HVector require_phi(const RunConfig& cfg, const MonotoneOp& op) {
    if (cfg.run.phi.size() == 0) throw ConfigError("run.phi", "boundary data required by this command");
    if (cfg.run.phi.size() != op.dim)
        throw ConfigError("run.phi", fmt::format("has {} entries, operator dimension is {}", cfg.run.phi.size(), op.dim));
    return cfg.run.phi;
}

inline std::string coord_header(long n) {
    std::string h;
    for (long k = 0; k < n; ++k) h += fmt::format(",x{}", k);
    return h;
}

inline std::string row(std::initializer_list<double> lead, const HVector& v) {
    std::string r;
    for (double x : lead) r += (r.empty() ? "" : ",") + num(x);
    for (long k = 0; k < v.size(); ++k) r += "," + num(v[k]);
    return r + "\n";
}

}  // namespace detail

inline int cmd_solve(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const MonotoneOp op = build_operator(cfg.op);
    const HVector phi = detail::require_phi(cfg, op);
    const Boundary bd = cfg.run.robin ? Boundary::robin(cfg.run.lambda, phi) : Boundary::dirichlet(phi);

    struct Out {
        std::string csv;
        Json summary;
        bool ok = false;
    };
    auto results = detail::parallel_map<Out>(cfg.s_list.size(), ctx.jobs, [&](std::size_t k) {
        const FracParams p = FracParams::from_s(cfg.s_list[k]);
        const ZMesh mesh = detail::make_mesh(cfg, op, p, cfg.mesh.n_cells);
        const ExtensionProblem prob{op, p, mesh, bd, cfg.solver, std::nullopt};
        const auto sol = solve(prob);
        const auto rep = audit_estimates(sol, prob);

        Out o;
        o.csv = fmt::format("# s={} N={} Z={} grading={} far_bc={} method={} boundary={} residual={}\n", num(p.s),
                            mesh.n_cells(), num(mesh.Z), num(mesh.grading), to_string(mesh.far_bc),
                            to_string(sol.method), bd.is_robin() ? "robin" : "dirichlet", num(sol.inclusion_residual));
        o.csv += "z,t" + detail::coord_header(op.dim) + "\n";
        for (std::size_t i = 0; i < sol.v.size(); ++i)
            o.csv += detail::row({sol.v.nodes[i], t_of_z(p, sol.v.nodes[i])}, sol.v.values[i]);

        Json& j = o.summary;
        j["s"] = p.s;
        j["converged"] = sol.converged;
        j["iterations"] = sol.iterations;
        j["inclusion_residual"] = sol.inclusion_residual;
        j["trace_v0"] = detail::vec_json(sol.trace_v0);
        j["trace_dv0"] = detail::vec_json(sol.trace_dv0);
        if (!bd.is_robin()) j["lambda_s_phi"] = detail::vec_json(-p.trace_const * sol.trace_dv0);
        j["fit_residual"] = sol.fit_residual;
        j["eps_disc"] = rep.eps_disc;
        Json est = Json::array();
        for (const auto& e : rep.entries)
            est.push_back({{"name", e.name}, {"lhs", e.lhs}, {"rhs", e.rhs}, {"slack", e.slack}, {"pass", e.pass}});
        j["estimates"] = est;
        j["estimates_pass"] = rep.all_pass();
        o.ok = sol.converged;
        return o;
    });

    detail::RunDir dir(ctx, "solve");
    Json summary = Json::array();
    bool ok = true;
    for (std::size_t k = 0; k < results.size(); ++k) {
        dir.write("solution_" + detail::s_tag(cfg.s_list[k]) + ".csv", results[k].csv);
        summary.push_back(results[k].summary);
        ok = ok && results[k].ok;
    }
    dir.write_json("summary.json", summary);
    dir.finish(ok);
    return ok ? 0 : 1;
}

inline int cmd_dtn(const Context& ctx, const std::string& mode) {
    if (mode != "apply" && mode != "resolve") throw InvalidArgument("dtn: mode must be apply or resolve");
    const auto& cfg = ctx.cfg;
    const MonotoneOp op = build_operator(cfg.op);
    const HVector phi = detail::require_phi(cfg, op);

    auto results = detail::parallel_map<Json>(cfg.s_list.size(), ctx.jobs, [&](std::size_t k) {
        const FracParams p = FracParams::from_s(cfg.s_list[k]);
        const ZMesh mesh = detail::make_mesh(cfg, op, p, cfg.mesh.n_cells);
        Json j;
        j["s"] = p.s;
        if (mode == "apply") {
            const auto r = apply_lambda_s(op, p, phi, mesh, cfg.solver);
            j["result"] = detail::vec_json(r.lambda_s_phi);
            j["fit_residual"] = r.fit_residual;
            j["outside_domain"] = r.outside_domain;
            j["iterations"] = r.solution.iterations;
        } else {
            const auto sol = resolve_lambda_s_solution(op, p, cfg.run.lambda, phi, mesh, cfg.solver);
            j["lambda"] = cfg.run.lambda;
            j["result"] = detail::vec_json(sol.trace_v0);
            j["iterations"] = sol.iterations;
            j["identity_residual"] =
                resolvent_identity_residual(op, p, cfg.run.lambda, phi, sol.trace_v0, mesh, cfg.solver);
        }
        return j;
    });

    detail::RunDir dir(ctx, "dtn");
    std::string csv = "s,index,phi,result\n";
    for (std::size_t k = 0; k < results.size(); ++k)
        for (long i = 0; i < phi.size(); ++i)
            csv += fmt::format("{},{},{},{}\n", num(cfg.s_list[k]), i, num(phi[i]),
                               num(results[k]["result"][static_cast<std::size_t>(i)].get<double>()));
    dir.write(mode + ".csv", csv);
    Json summary;
    summary["mode"] = mode;
    summary["runs"] = results;
    dir.write_json("summary.json", summary);
    dir.finish(true);
    return 0;
}

inline int cmd_evolve(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const MonotoneOp op = build_operator(cfg.op);
    const HVector phi = detail::require_phi(cfg, op);

    struct Out {
        std::string traj, ufield;
        Json summary;
    };
    auto results = detail::parallel_map<Out>(cfg.s_list.size(), ctx.jobs, [&](std::size_t k) {
        const FracParams p = FracParams::from_s(cfg.s_list[k]);
        const ZMesh mesh = detail::make_mesh(cfg, op, p, cfg.mesh.n_cells);
        const auto tr = evolve(op, p, phi, cfg.run.t_final, cfg.run.m, mesh, cfg.solver, cfg.run.record_u,
                               cfg.run.u_stride);
        Out o;
        o.traj = "t" + detail::coord_header(op.dim) + "\n";
        for (std::size_t i = 0; i < tr.states.size(); ++i) o.traj += detail::row({tr.times[i]}, tr.states[i]);
        if (cfg.run.record_u) {
            o.ufield = "t,r" + detail::coord_header(op.dim) + "\n";
            for (std::size_t q = 0; q < tr.u_field.size(); ++q) {
                const double t = tr.times[tr.u_time_index[q]];
                const auto& f = tr.u_field[q];
                for (std::size_t i = 0; i < f.size(); ++i) o.ufield += detail::row({t, f.nodes[i]}, f.values[i]);
            }
        }
        o.summary["s"] = p.s;
        o.summary["t_final"] = cfg.run.t_final;
        o.summary["substeps"] = tr.substeps;
        o.summary["final_state"] = detail::vec_json(tr.states.back());
        return o;
    });

    detail::RunDir dir(ctx, "evolve");
    Json summary = Json::array();
    for (std::size_t k = 0; k < results.size(); ++k) {
        const std::string tag = detail::s_tag(cfg.s_list[k]);
        dir.write("trajectory_" + tag + ".csv", results[k].traj);
        if (cfg.run.record_u) dir.write("u_field_" + tag + ".csv", results[k].ufield);
        summary.push_back(results[k].summary);
    }
    dir.write_json("summary.json", summary);
    dir.finish(true);
    return 0;
}

struct CheckReport {
    std::string check;
    int instances = 0;
    double worst_margin = INFINITY;  ///< pass iff >= 0
    bool skipped = false;
    std::string note;

    bool pass() const { return skipped || worst_margin >= 0.0; }
    void add(double margin) {
        ++instances;
        worst_margin = std::min(worst_margin, margin);
    }
};

namespace detail {

inline CheckReport run_check(const std::string& name, const RunConfig& cfg, const MonotoneOp& op, double s,
                             std::uint64_t seed) {
    CheckReport r;
    r.check = fmt::format("{}(s={})", name, s);
    const FracParams p = FracParams::from_s(s);
    const ZMesh mesh = make_mesh(cfg, op, p, cfg.mesh.n_cells);
    const auto& sv = cfg.solver;
    std::mt19937_64 rng(seed ^ fnv1a(name + "@" + num(s)));
    const int n = cfg.verify.pairs;
    auto skip = [&](std::string why) {
        r.skipped = true;
        r.note = std::move(why);
        r.worst_margin = 0.0;
        return r;
    };

    if (name == "spectral") {
        if (!op.linear_spectrum) return skip("operator is not linear");
        // the matrix, recovered column by column from the operator
        Matrix A(op.dim, op.dim);
        for (long j = 0; j < op.dim; ++j) A.col(j) = op.direct_eval(HVector::Unit(op.dim, j));
        const double C = verify::dtn_constant_from_bessel(s);
        const Matrix L = C * verify::spectral_frac_power(0.5 * (A + A.transpose()), s);
        for (int i = 0; i < n; ++i) {
            const HVector phi = verify::sample_vector(op.dim, rng, 1.0);
            const HVector ref = L * phi;
            const HVector got = apply_lambda_s(op, p, phi, mesh, sv).lambda_s_phi;
            r.add(1e-3 - (got - ref).norm() / ref.norm());
        }
        r.note = "relative error <= 1e-3";
    } else if (name == "bessel") {
        if (!op.linear_spectrum || op.linear_spectrum->first != op.linear_spectrum->second)
            return skip("operator is not a multiple of the identity");
        const double a = op.linear_spectrum->first;
        const double ref = verify::dtn_constant_from_bessel(s) * std::pow(a, s);
        const double got = apply_lambda_s(op, p, HVector::Ones(op.dim), mesh, sv).lambda_s_phi[0];
        r.add(1e-3 - std::abs(got - ref) / ref);
        r.note = "relative error <= 1e-3";
    } else if (name == "resolvent") {
        for (int i = 0; i < n; ++i) {
            const HVector phi = verify::sample_vector(op.dim, rng, 3.0);
            const HVector u = resolve_lambda_s(op, p, cfg.verify.lambda, phi, mesh, sv);
            const double res = resolvent_identity_residual(op, p, cfg.verify.lambda, phi, u, mesh, sv);
            r.add(5.0 * sv.tol - res);
        }
        r.note = "re-solve identity within 5 tol";
    } else if (name == "monotonicity") {
        const auto pairs = verify::sample_pairs(op.dim, n, rng, 3.0);
        const auto m = monotonicity_probe(op, p, pairs, mesh, sv);
        for (double v : m.values) r.add(v + 1e-8);
        r.note = "(Λφ - Λψ, φ - ψ) >= -1e-8";
    } else if (name == "square") {
        if (std::abs(s - 0.5) > 1e-12) return skip("square property needs s = 1/2");
        for (int i = 0; i < std::min(n, 5); ++i) {
            const HVector phi = verify::sample_vector(op.dim, rng, 1.0);
            HVector a0;
            try {
                a0 = op.direct_eval ? op.direct_eval(phi) : minimal_selection(op, phi);
            } catch (const NotInDomain&) {
                continue;
            }
            const HVector sq = square_power(op, p, phi, mesh, sv);
            r.add(2e-2 - (sq - a0).norm() / (1.0 + a0.norm()));
        }
        r.note = "square power of the DtN operator against A0, relative error <= 2e-2";
    } else if (name == "contraction") {
        const auto pairs = verify::sample_pairs(op.dim, n, rng, 3.0);
        for (const auto& [a, b] : pairs) {
            ExtensionProblem pa{op, p, mesh, Boundary::dirichlet(a), sv, std::nullopt};
            ExtensionProblem pb{op, p, mesh, Boundary::dirichlet(b), sv, std::nullopt};
            const auto c = contraction_check(solve(pa), solve(pb), eps_disc(pa));
            r.add(c.tolerance - c.max_increase);
        }
        r.note = "max increase of |v - v^| <= 1e-8 + eps_disc |phi - phi^|";
    } else if (name == "complete") {
        if (!op.lattice) return skip("operator state space is not a lattice");
        const auto pairs = verify::sample_pairs(op.dim, n, rng, 3.0);
        const double lam = cfg.verify.lambda;
        const auto rep = verify::check_complete_contraction(
            [&](const HVector& w) { return resolve_lambda_s(op, p, lam, w, mesh, sv); }, pairs,
            verify::default_j_set());
        r.instances = rep.instances;
        r.worst_margin = rep.worst_margin + 1e-8;
        r.note = "complete contraction of the resolvent, margin >= -1e-8";
    } else if (name == "semigroup") {
        const auto pairs = verify::sample_pairs(op.dim, std::min(n, 6), rng, 3.0);
        for (const auto& [a, b] : pairs) {
            const auto ta = evolve(op, p, a, cfg.run.t_final, cfg.run.m, mesh, sv);
            const auto tb = evolve(op, p, b, cfg.run.t_final, cfg.run.m, mesh, sv);
            const auto rep = trajectory_audit(ta, tb, op.lattice);
            const double scale = 1.0 + (a - b).norm();
            r.add(1e-8 * scale -
                  std::max({rep.max_distance_increase, rep.order_violation, rep.l1_increase, rep.linf_increase}));
        }
        r.note = "trajectory distance, order and L1/Linf non-expansion";
    } else {
        throw ConfigError("verify.checks", "unknown check '" + name + "'");
    }
    if (r.instances == 0) return skip("no applicable instances");
    return r;
}

}  // namespace detail

inline int cmd_verify(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    if (cfg.verify.checks.empty()) throw ConfigError("verify.checks", "no checks requested");
    const MonotoneOp op = build_operator(cfg.op);
    std::vector<std::pair<std::string, double>> tasks;
    for (double s : cfg.s_list)
        for (const auto& c : cfg.verify.checks) tasks.emplace_back(c, s);
    const auto reports = detail::parallel_map<CheckReport>(tasks.size(), ctx.jobs, [&](std::size_t i) {
        return detail::run_check(tasks[i].first, cfg, op, tasks[i].second, ctx.seed);
    });

    detail::RunDir dir(ctx, "verify");
    Json out = Json::array();
    bool all = true;
    for (const auto& r : reports) {
        Json j;
        j["check"] = r.check;
        j["instances"] = r.instances;
        j["worst_margin"] = r.skipped ? Json() : Json(r.worst_margin);
        j["pass"] = r.pass();
        if (r.skipped) j["skipped"] = true;
        j["note"] = r.note;
        out.push_back(j);
        all = all && r.pass();
    }
    dir.write_json("report.json", out);
    dir.finish(all);
    return all ? 0 : 1;
}

inline int cmd_converge(const Context& ctx) {
    const auto& cfg = ctx.cfg;
    const MonotoneOp op = build_operator(cfg.op);
    const HVector phi = detail::require_phi(cfg, op);
    const bool linear = op.linear_spectrum.has_value();
    Matrix A;
    if (linear) {
        A.resize(op.dim, op.dim);
        for (long j = 0; j < op.dim; ++j) A.col(j) = op.direct_eval(HVector::Unit(op.dim, j));
        A = 0.5 * (A + A.transpose());
    }
    std::vector<int> ns = cfg.converge.n_list, ms = cfg.converge.m_list;
    if (ns.empty() && ms.empty()) throw ConfigError("converge.n_list", "give n_list and/or m_list");
    std::sort(ns.begin(), ns.end());
    std::sort(ms.begin(), ms.end());

    struct Out {
        std::string mesh_csv, time_csv;
    };
    auto results = detail::parallel_map<Out>(cfg.s_list.size(), ctx.jobs, [&](std::size_t k) {
        const FracParams p = FracParams::from_s(cfg.s_list[k]);
        const double C = verify::dtn_constant(p.s);
        Out o;
        auto trace = [&](int N) -> HVector {
            const ZMesh mesh = detail::make_mesh(cfg, op, p, N);
            return cfg.run.robin ? resolve_lambda_s(op, p, cfg.run.lambda, phi, mesh, cfg.solver)
                                 : apply_lambda_s(op, p, phi, mesh, cfg.solver).lambda_s_phi;
        };
        if (!ns.empty()) {
            HVector ref;
            std::string kind;
            if (linear) {
                const Matrix L = C * verify::spectral_frac_power(A, p.s);
                ref = cfg.run.robin
                          ? HVector((Matrix::Identity(op.dim, op.dim) + cfg.run.lambda * L).ldlt().solve(phi))
                          : HVector(L * phi);
                kind = "spectral";
            } else {
                ref = trace(2 * ns.back());
                kind = fmt::format("N={}", 2 * ns.back());
            }
            o.mesh_csv = fmt::format("# s={} reference={} quantity={}\nN,error,rate\n", num(p.s), kind,
                                     cfg.run.robin ? "resolvent" : "dtn");
            double prev = NAN;
            for (int N : ns) {
                const double err = (trace(N) - ref).norm() / std::max(1e-300, ref.norm());
                const double rate = std::isnan(prev) ? NAN : std::log2(prev / err);
                o.mesh_csv += fmt::format("{},{},{}\n", N, num(err), std::isnan(rate) ? "" : num(rate));
                prev = err;
            }
        }
        if (!ms.empty()) {
            const ZMesh mesh = detail::make_mesh(cfg, op, p, cfg.mesh.n_cells);
            HVector ref;
            std::string kind;
            if (linear) {
                ref = verify::spectral_semigroup(A, p.s, C, cfg.run.t_final) * phi;
                kind = "spectral";
            } else {
                ref = evolve(op, p, phi, cfg.run.t_final, 2 * ms.back(), mesh, cfg.solver).states.back();
                kind = fmt::format("m={}", 2 * ms.back());
            }
            o.time_csv = fmt::format("# s={} t_final={} reference={}\nm,error,rate\n", num(p.s),
                                     num(cfg.run.t_final), kind);
            double prev = NAN;
            for (int m : ms) {
                const HVector u = evolve(op, p, phi, cfg.run.t_final, m, mesh, cfg.solver).states.back();
                const double err = (u - ref).norm() / std::max(1e-300, ref.norm());
                const double rate = std::isnan(prev) ? NAN : std::log2(prev / err);
                o.time_csv += fmt::format("{},{},{}\n", m, num(err), std::isnan(rate) ? "" : num(rate));
                prev = err;
            }
        }
        return o;
    });

    detail::RunDir dir(ctx, "converge");
    for (std::size_t k = 0; k < results.size(); ++k) {
        const std::string tag = detail::s_tag(cfg.s_list[k]);
        if (!ns.empty()) dir.write("mesh_" + tag + ".csv", results[k].mesh_csv);
        if (!ms.empty()) dir.write("time_" + tag + ".csv", results[k].time_csv);
    }
    dir.finish(true);
    return 0;
}

}  // namespace fracmono::cli
