#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "fracmono/cli/commands.hpp"

using namespace fracmono;

int main(int argc, char** argv) {
    CLI::App app{"fracmono: fractional powers of maximal monotone operators"};
    app.fallthrough();
    app.require_subcommand(1);

    std::string config, out = "out";
    std::uint64_t seed = 0;
    int jobs = 1;
    app.add_option("--config", config, "INI run configuration")->required();
    app.add_option("--out", out, "output root directory")->capture_default_str();
    app.add_option("--seed", seed, "seed for random samplers")->capture_default_str();
    app.add_option("--jobs", jobs, "worker threads for independent sweep points")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* solve = app.add_subcommand("solve", "extension solve and estimate audit");
    auto* dtn = app.add_subcommand("dtn", "Dirichlet-to-Neumann map");
    dtn->require_subcommand(1);
    auto* apply = dtn->add_subcommand("apply", "Λ_s φ");
    auto* resolve = dtn->add_subcommand("resolve", "(I + λΛ_s)^{-1} φ");
    auto* evolve = app.add_subcommand("evolve", "semigroup trajectory");
    auto* verify = app.add_subcommand("verify", "oracle comparisons and property checks");
    auto* converge = app.add_subcommand("converge", "mesh and substep refinement tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        cli::Context ctx;
        ctx.cfg = cli::load_config(config);
        ctx.out_root = out;
        ctx.seed = seed;
        ctx.jobs = jobs;
        if (solve->parsed()) return cli::cmd_solve(ctx);
        if (apply->parsed()) return cli::cmd_dtn(ctx, "apply");
        if (resolve->parsed()) return cli::cmd_dtn(ctx, "resolve");
        if (evolve->parsed()) return cli::cmd_evolve(ctx);
        if (verify->parsed()) return cli::cmd_verify(ctx);
        if (converge->parsed()) return cli::cmd_converge(ctx);
    } catch (const cli::ConfigError& e) {
        fmt::print(stderr, "{}\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 3;
    }
    return 2;
}
