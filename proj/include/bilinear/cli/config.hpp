#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "bilinear/harness/offdiag.hpp"
#include "bilinear/harness/scenario.hpp"

namespace bilinear::cli {

/// Invalid configuration: unreadable file, parse error, or a value that breaks an invariant.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

enum class Command { BellmanVerify, OperatorVerify, SemigroupVerify, Pointwise, Embed, Ibp, Offdiag, Sweep };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
    static const std::vector<std::pair<Command, std::string>> names{
        {Command::BellmanVerify, "bellman-verify"}, {Command::OperatorVerify, "operator-verify"},
        {Command::SemigroupVerify, "semigroup-verify"}, {Command::Pointwise, "pointwise"},
        {Command::Embed, "embed"}, {Command::Ibp, "ibp"}, {Command::Offdiag, "offdiag"}, {Command::Sweep, "sweep"}};
    return names;
}

inline std::string to_string(Command c) {
    for (const auto& [k, n] : command_names())
        if (k == c) return n;
    return "?";
}

inline Command parse_command(const std::string& s) {
    for (const auto& [k, n] : command_names())
        if (n == s) return k;
    throw ConfigError("unknown command '" + s + "'");
}

/// Where a value came from, for diagnostics.
struct Origin {
    std::string source;
    int line = 0;
    std::string section, key;

    std::string describe() const {
        std::ostringstream os;
        os << source;
        if (line > 0) os << ':' << line;
        os << ": [" << section << "] " << key;
        return os.str();
    }
};

struct BumpOverride {
    std::optional<std::vector<double>> center, wavevector;
    std::optional<double> radius, amplitude;
};

/// Everything needed to build a scenario and run one command on it.
struct ScenarioConfig {
    /// free-form label for reports; the preset name when empty
    std::string label;
    harness::PresetOptions preset;
    /// "preset", "identity" or "constant"
    std::string A_kind = "preset";
    std::vector<double> A_entries;
    /// "preset", "zero", "constant" or "values"
    std::string V_kind = "preset";
    std::vector<double> V_values;
    BumpOverride f, g;
    std::vector<double> radii;
    SolverMethod method = SolverMethod::BiCGStab;

    // command parameters
    int points = 10000;
    int directions = 256;
    std::vector<int> ladder;
    std::vector<double> sweep_p{2.0, 3.0, 4.0, 8.0};
    std::vector<int> sweep_dims{1, 2};
    std::optional<double> offdiag_center, offdiag_half_width;
    std::vector<double> offdiag_distances, offdiag_times;

    std::map<std::string, Origin> origins;

    Origin origin(const std::string& section, const std::string& key) const {
        const auto it = origins.find(section + "." + key);
        return it != origins.end() ? it->second : Origin{"defaults", 0, section, key};
    }
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

[[noreturn]] inline void fail(const Origin& o, const std::string& msg) { throw ConfigError(o.describe() + ": " + msg); }

inline double to_double(const Origin& o, const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || !std::isfinite(v)) fail(o, "expected a number, got '" + t + "'");
    return v;
}

inline long long to_integer(const Origin& o, const std::string& s) {
    const std::string t = trim(s);
    char* end = nullptr;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size()) fail(o, "expected an integer, got '" + t + "'");
    return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) out.push_back(trim(item));
    return out;
}

inline std::vector<double> to_doubles(const Origin& o, const std::string& s) {
    std::vector<double> v;
    for (const auto& item : split(s, ',')) v.push_back(to_double(o, item));
    if (v.empty()) fail(o, "expected a comma-separated list");
    return v;
}

inline std::vector<int> to_ints(const Origin& o, const std::string& s) {
    std::vector<int> v;
    for (const auto& item : split(s, ',')) v.push_back(static_cast<int>(to_integer(o, item)));
    if (v.empty()) fail(o, "expected a comma-separated list");
    return v;
}

inline bool to_bool(const Origin& o, const std::string& s) {
    const std::string t = lower(trim(s));
    if (t == "true" || t == "yes" || t == "1") return true;
    if (t == "false" || t == "no" || t == "0") return false;
    fail(o, "expected true or false, got '" + t + "'");
}

/// Splits "kind rest" into the leading word and the remainder.
inline std::pair<std::string, std::string> head_word(const std::string& s) {
    const std::string t = trim(s);
    const auto sp = t.find_first_of(" \t");
    if (sp == std::string::npos) return {lower(t), ""};
    return {lower(t.substr(0, sp)), trim(t.substr(sp))};
}

inline void positive(const Origin& o, double v) {
    if (!(v > 0.0)) fail(o, "must be positive, got " + format_real(v));
}

inline void set_bump(BumpOverride& b, const Origin& o, const std::string& field, const std::string& value) {
    if (field == "center") b.center = to_doubles(o, value);
    else if (field == "wavevector") b.wavevector = to_doubles(o, value);
    else if (field == "radius") positive(o, *(b.radius = to_double(o, value)));
    else if (field == "amplitude") b.amplitude = to_double(o, value);
    else fail(o, "unknown key");
}

inline void assign(ScenarioConfig& c, const Origin& o, const std::string& value) {
    const std::string& sec = o.section;
    const std::string& key = o.key;
    auto& P = c.preset;
    if (sec == "scenario") {
        if (key == "name") c.label = trim(value);
        else if (key == "preset") P.name = lower(trim(value));
        else if (key == "dim") P.dim = static_cast<int>(to_integer(o, value));
        else if (key == "cells") {
            P.axis_cells = to_ints(o, value);
            P.cells = P.axis_cells.front();
            if (P.axis_cells.size() == 1) P.axis_cells.clear();
        } else if (key == "half_width") positive(o, P.half_width = to_double(o, value));
        else if (key == "boundary") {
            const std::string b = lower(trim(value));
            if (b == "dirichlet") P.boundary = Boundary::Dirichlet;
            else if (b == "periodic") P.boundary = Boundary::Periodic;
            else fail(o, "expected dirichlet or periodic, got '" + b + "'");
        } else if (key == "seed") {
            const long long s = to_integer(o, value);
            if (s < 0) fail(o, "seed must be nonnegative");
            P.seed = static_cast<std::uint64_t>(s);
        } else fail(o, "unknown key");
    } else if (sec == "operator") {
        if (key == "beta") P.beta = to_double(o, value);
        else if (key == "gamma_min") positive(o, P.gamma_min = to_double(o, value));
        else if (key == "a_scale") positive(o, P.a_scale = to_double(o, value));
        else if (key == "A") {
            auto [kind, rest] = head_word(value);
            if (kind != "preset" && kind != "identity" && kind != "constant")
                fail(o, "expected preset, identity or constant <entries>, got '" + kind + "'");
            c.A_kind = kind;
            c.A_entries.clear();
            if (kind == "constant") c.A_entries = to_doubles(o, rest);
            else if (!rest.empty()) fail(o, "'" + kind + "' takes no entries");
        } else if (key == "V") {
            auto [kind, rest] = head_word(value);
            if (kind != "preset" && kind != "zero" && kind != "constant" && kind != "values")
                fail(o, "expected preset, zero, constant <v> or values <v1, v2, ...>, got '" + kind + "'");
            c.V_kind = kind;
            c.V_values.clear();
            if (kind == "constant" || kind == "values") c.V_values = to_doubles(o, rest);
            else if (!rest.empty()) fail(o, "'" + kind + "' takes no values");
            if (kind == "constant" && c.V_values.size() != 1) fail(o, "constant takes one value");
            for (double v : c.V_values)
                if (v < 0.0) fail(o, "potential must be nonnegative, got " + format_real(v));
        } else fail(o, "unknown key");
    } else if (sec == "data") {
        if (key == "same") P.same_data = to_bool(o, value);
        else if (key == "bump_power") {
            P.bump_power = static_cast<int>(to_integer(o, value));
            if (P.bump_power < 0) fail(o, "must be >= 0 (0 selects the exp profile)");
        } else if (key.rfind("f.", 0) == 0) set_bump(c.f, o, key.substr(2), value);
        else if (key.rfind("g.", 0) == 0) set_bump(c.g, o, key.substr(2), value);
        else fail(o, "unknown key");
    } else if (sec == "bellman") {
        if (key == "p") {
            P.p = to_double(o, value);
            if (!(P.p >= 2.0)) fail(o, "exponent p must be >= 2, got " + format_real(P.p));
        } else fail(o, "unknown key");
    } else if (sec == "time") {
        if (key == "T") positive(o, P.T = to_double(o, value));
        else if (key == "dt") positive(o, *(P.dt = to_double(o, value)));
        else if (key == "scheme") {
            const std::string s = lower(trim(value));
            if (s == "crank-nicolson" || s == "cn") P.scheme = Scheme::CrankNicolson;
            else if (s == "backward-euler" || s == "be") P.scheme = Scheme::BackwardEuler;
            else fail(o, "expected crank-nicolson or backward-euler, got '" + s + "'");
        } else fail(o, "unknown key");
    } else if (sec == "cutoff") {
        if (key == "radii") {
            c.radii = to_doubles(o, value);
            for (double r : c.radii) positive(o, r);
        } else fail(o, "unknown key");
    } else if (sec == "solver") {
        if (key == "tol") positive(o, P.solver_tol = to_double(o, value));
        else if (key == "method") {
            const std::string m = lower(trim(value));
            if (m == "bicgstab") c.method = SolverMethod::BiCGStab;
            else if (m == "gmres") c.method = SolverMethod::GMRes;
            else fail(o, "expected bicgstab or gmres, got '" + m + "'");
        } else fail(o, "unknown key");
    } else if (sec == "bellman-verify") {
        if (key == "points") c.points = static_cast<int>(to_integer(o, value));
        else if (key == "directions") c.directions = static_cast<int>(to_integer(o, value));
        else fail(o, "unknown key");
        if (c.points < 1 || c.directions < 0) fail(o, "must be positive");
    } else if (sec == "pointwise") {
        if (key == "ladder") {
            c.ladder = to_ints(o, value);
            for (int n : c.ladder)
                if (n < 2) fail(o, "ladder cell counts must be >= 2");
        } else fail(o, "unknown key");
    } else if (sec == "sweep") {
        if (key == "p") {
            c.sweep_p = to_doubles(o, value);
            for (double p : c.sweep_p)
                if (!(p >= 2.0)) fail(o, "exponent p must be >= 2, got " + format_real(p));
        } else if (key == "dim") {
            c.sweep_dims = to_ints(o, value);
            for (int d : c.sweep_dims)
                if (d < 1 || d > 3) fail(o, "dimension must be 1, 2 or 3");
        } else fail(o, "unknown key");
    } else if (sec == "offdiag") {
        if (key == "source_center") c.offdiag_center = to_double(o, value);
        else if (key == "source_half_width") positive(o, *(c.offdiag_half_width = to_double(o, value)));
        else if (key == "distances") c.offdiag_distances = to_doubles(o, value);
        else if (key == "times") {
            c.offdiag_times = to_doubles(o, value);
            for (double t : c.offdiag_times) positive(o, t);
        } else fail(o, "unknown key");
    } else {
        fail(o, "unknown section");
    }
    c.origins[sec + "." + key] = o;
}

} // namespace detail

/// Parses the flat `[section]` / `key = value` format; `#` and `;` start comments.
inline ScenarioConfig parse_scenario(std::istream& is, const std::string& source = "<input>",
                                     ScenarioConfig base = {}) {
    std::string raw, section;
    int line = 0;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash = raw.find_first_of("#;");
        const std::string s = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']' || s.size() < 3) {
                std::ostringstream os;
                os << source << ':' << line << ": malformed section header '" << s << "'";
                throw ConfigError(os.str());
            }
            section = detail::lower(detail::trim(s.substr(1, s.size() - 2)));
            continue;
        }
        const auto eq = s.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << source << ':' << line << ": expected 'key = value', got '" << s << "'";
            throw ConfigError(os.str());
        }
        const Origin o{source, line, section.empty() ? "scenario" : section, detail::trim(s.substr(0, eq))};
        if (o.key.empty()) detail::fail(o, "empty key");
        detail::assign(base, o, s.substr(eq + 1));
    }
    return base;
}

inline ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open scenario file");
    return parse_scenario(in, path);
}

/// Command-line overrides, applied after the file.
struct Overrides {
    std::optional<double> p, dt, T;
    std::optional<std::vector<int>> grid;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> preset;
    std::optional<std::vector<double>> radii;
};

inline void apply(ScenarioConfig& c, const Overrides& o) {
    auto note = [&](const std::string& sec, const std::string& key) {
        c.origins[sec + "." + key] = Origin{"command line", 0, sec, key};
        return c.origins[sec + "." + key];
    };
    if (o.preset) c.preset.name = detail::lower(*o.preset), note("scenario", "preset");
    if (o.p) {
        const Origin org = note("bellman", "p");
        if (!(*o.p >= 2.0)) detail::fail(org, "exponent p must be >= 2, got " + format_real(*o.p));
        c.preset.p = *o.p;
    }
    if (o.T) detail::positive(note("time", "T"), *o.T), c.preset.T = *o.T;
    if (o.dt) detail::positive(note("time", "dt"), *o.dt), c.preset.dt = *o.dt;
    if (o.seed) c.preset.seed = *o.seed, note("scenario", "seed");
    if (o.grid) {
        note("scenario", "cells");
        if (o.grid->empty()) detail::fail(c.origin("scenario", "cells"), "empty grid");
        c.preset.cells = o.grid->front();
        c.preset.axis_cells = o.grid->size() == 1 ? std::vector<int>{} : *o.grid;
    }
    if (o.radii) {
        const Origin org = note("cutoff", "radii");
        for (double r : *o.radii) detail::positive(org, r);
        c.radii = *o.radii;
    }
}

namespace detail {

inline void apply_bump(harness::Bump& b, const BumpOverride& o, int dim, const ScenarioConfig& c,
                       const std::string& which) {
    auto vec = [&](const std::vector<double>& v, const std::string& field) {
        if (static_cast<int>(v.size()) != dim)
            fail(c.origin("data", which + "." + field),
                 "expected " + std::to_string(dim) + " components, got " + std::to_string(v.size()));
        Grid::Point p = Grid::Point::Zero();
        for (int a = 0; a < dim; ++a) p[a] = v[a];
        return p;
    };
    if (o.center) b.center = vec(*o.center, "center");
    if (o.wavevector) b.wavevector = vec(*o.wavevector, "wavevector");
    if (o.radius) b.radius = *o.radius;
    if (o.amplitude) b.amplitude = *o.amplitude;
}

} // namespace detail

/// Builds and validates the scenario; every invariant failure becomes a ConfigError naming its field.
inline harness::ScenarioSpec build_scenario(const ScenarioConfig& c) {
    const auto& P = c.preset;
    const auto& names = harness::preset_names();
    if (std::find(names.begin(), names.end(), P.name) == names.end())
        detail::fail(c.origin("scenario", "preset"), "unknown preset '" + P.name + "'");
    if (P.dim < 1 || P.dim > 3) detail::fail(c.origin("scenario", "dim"), "dimension must be 1, 2 or 3");
    if (P.cells < 2) detail::fail(c.origin("scenario", "cells"), "need at least 2 cells per axis");
    for (int n : P.axis_cells)
        if (n < 2) detail::fail(c.origin("scenario", "cells"), "need at least 2 cells per axis");
    if (!P.axis_cells.empty() && static_cast<int>(P.axis_cells.size()) != P.dim)
        detail::fail(c.origin("scenario", "cells"), "give one cell count or one per axis");

    harness::ScenarioSpec s;
    try {
        harness::PresetOptions o = P;
        s = harness::make_preset(o);
    } catch (const ConstructionError& e) {
        throw ConfigError(std::string("scenario '") + P.name + "': " + e.what());
    }
    const Grid& grid = s.grid;

    if (c.A_kind == "identity") {
        s.A = CoefficientField::identity(grid);
    } else if (c.A_kind == "constant") {
        const Origin o = c.origin("operator", "A");
        const std::size_t n = static_cast<std::size_t>(P.dim);
        if (c.A_entries.size() != n * n)
            detail::fail(o, "constant A needs " + std::to_string(n * n) + " row-major entries, got " +
                                std::to_string(c.A_entries.size()));
        Eigen::MatrixXd m(P.dim, P.dim);
        for (int i = 0; i < P.dim; ++i)
            for (int j = 0; j < P.dim; ++j) m(i, j) = c.A_entries[i * P.dim + j];
        s.A = CoefficientField::constant(grid, m);
        if (!(s.A.gamma() > 0.0))
            detail::fail(o, "coefficient matrix is not accretive (gamma = " + format_real(s.A.gamma()) + ")");
    }

    if (c.V_kind != "preset") {
        const Origin o = c.origin("operator", "V");
        Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.unknowns());
        if (c.V_kind == "constant") v.setConstant(c.V_values.front());
        if (c.V_kind == "values") {
            if (static_cast<int>(c.V_values.size()) != grid.unknowns())
                detail::fail(o, "values needs one entry per unknown (" + std::to_string(grid.unknowns()) + "), got " +
                                    std::to_string(c.V_values.size()));
            for (int k = 0; k < grid.unknowns(); ++k) v[k] = c.V_values[k];
        }
        try {
            s.V = PotentialField(grid, v);
        } catch (const ConstructionError& e) {
            detail::fail(o, e.what());
        }
    }

    auto [bf, bg] = harness::preset_bumps(P.dim, P.half_width, P.bump_power);
    detail::apply_bump(bf, c.f, P.dim, c, "f");
    detail::apply_bump(bg, c.g, P.dim, c, "g");
    s.f = GridFunction::sample(grid, bf);
    s.g = P.same_data ? s.f : GridFunction::sample(grid, bg);
    s.solver.method = c.method;
    if (!c.label.empty()) s.name = c.label;
    if (!c.radii.empty()) s.cutoff.radii = c.radii;

    try {
        harness::validate(s);
    } catch (const ConstructionError& e) {
        throw ConfigError(std::string("scenario '") + P.name + "': " + e.what());
    } catch (const DimensionError& e) {
        throw ConfigError(std::string("scenario '") + P.name + "': " + e.what());
    }
    return s;
}

/// Off-diagonal settings scaled to the box unless given explicitly.
inline harness::OffdiagConfig offdiag_config(const ScenarioConfig& c) {
    harness::OffdiagConfig o;
    const double L = c.preset.half_width;
    o.source_center = c.offdiag_center.value_or(o.source_center * L);
    o.source_half_width = c.offdiag_half_width.value_or(o.source_half_width * L);
    if (!c.offdiag_distances.empty()) o.distances = c.offdiag_distances;
    else
        for (double& d : o.distances) d *= L;
    if (!c.offdiag_times.empty()) o.times = c.offdiag_times;
    else
        for (double& t : o.times) t *= L * L;
    return o;
}

} // namespace bilinear::cli
