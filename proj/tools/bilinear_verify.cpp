// Command-line driver: bilinear_verify <command> [--config FILE] [--out DIR] [overrides]

#include <CLI11.hpp>

#include <iostream>
#include <sstream>

#include "bilinear/cli/run.hpp"

namespace {

template <class T>
std::vector<T> comma_list(const std::string& s, const char* what) {
    std::vector<T> out;
    std::istringstream in(s);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::istringstream one(item);
        T v{};
        if (!(one >> v) || !(one >> std::ws).eof()) throw CLI::ValidationError(what, "bad list entry '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw CLI::ValidationError(what, "empty list");
    return out;
}

} // namespace

int main(int argc, char** argv) {
    using namespace bilinear::cli;
    CLI::App app{"Numerical verification suites for the bilinear embedding"};
    app.require_subcommand(1);

    RunOptions opts;
    std::string config, grid, radii;
    std::optional<double> p, dt, T;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;

    for (const auto& [cmd, name] : command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config, "scenario file")->check(CLI::ExistingFile);
        sub->add_option("--out", opts.outdir, "output directory")->capture_default_str();
        sub->add_option("--seed", seed);
        sub->add_option("--p", p, "Bellman exponent p >= 2");
        sub->add_option("--grid", grid, "cells per axis: N or N,N[,N]");
        sub->add_option("--dt", dt);
        sub->add_option("--T", T, "time horizon");
        sub->add_option("--preset", preset);
        sub->add_option("--radii", radii, "cutoff radii R1,R2,...");
        sub->add_flag("--quiet", opts.quiet, "suppress the summary");
        sub->final_callback([&opts, c = cmd] { opts.command = c; });
    }

    try {
        app.parse(argc, argv);
        if (!config.empty()) opts.config_path = config;
        opts.overrides.p = p;
        opts.overrides.dt = dt;
        opts.overrides.T = T;
        opts.overrides.seed = seed;
        opts.overrides.preset = preset;
        if (!grid.empty()) opts.overrides.grid = comma_list<int>(grid, "--grid");
        if (!radii.empty()) opts.overrides.radii = comma_list<double>(radii, "--radii");
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kBadInput;
    }
    return run(opts, std::cout, std::cerr);
}
