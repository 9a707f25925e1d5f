#pragma once

#include <optional>
#include <ostream>
#include <string>

#include "bilinear/cli/config.hpp"
#include "bilinear/cli/report.hpp"
#include "bilinear/cli/suites.hpp"
#include "bilinear/errors.hpp"

namespace bilinear::cli {

enum ExitCode : int { kPassed = 0, kAssertionFailed = 1, kBadInput = 2, kNumericalFailure = 3 };

struct RunOptions {
    Command command = Command::BellmanVerify;
    std::optional<std::string> config_path;
    std::string outdir = "out";
    Overrides overrides;
    bool quiet = false;
};

inline Results execute(Command cmd, const ScenarioConfig& c) {
    switch (cmd) {
    case Command::BellmanVerify: return bellman_verify(c);
    case Command::OperatorVerify: return operator_verify(c);
    case Command::SemigroupVerify: return semigroup_verify(c);
    case Command::Pointwise: return pointwise(c);
    case Command::Embed: return embed(c);
    case Command::Ibp: return ibp(c);
    case Command::Offdiag: return offdiag(c);
    case Command::Sweep: return sweep(c);
    }
    throw ConfigError("unknown command");
}

/// Loads and validates the scenario, runs the command and writes the report. Diagnostics go to `err`.
inline int run(const RunOptions& o, std::ostream& out, std::ostream& err) {
    Results r;
    try {
        ScenarioConfig c = o.config_path ? load_scenario(*o.config_path) : ScenarioConfig{};
        apply(c, o.overrides);
        if (o.command != Command::BellmanVerify) build_scenario(c);
        r = execute(o.command, c);
        emit_report(r, o.outdir);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ConstructionError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ConvergenceError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const AccuracyError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    } catch (const SingularityError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumericalFailure;
    }
    if (!o.quiet) out << summary_text(r);
    return r.passed() ? kPassed : kAssertionFailed;
}

} // namespace bilinear::cli
