#pragma once

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bilinear/cli/config.hpp"
#include "bilinear/grid.hpp"

namespace bilinear::cli {

/// One named statement with a signed margin (>= 0 when it holds).
struct Check {
    std::string name;
    double margin = 0.0;
    bool passed = false;
    /// informational rows are reported but never fail the run
    bool asserted = true;
    std::string note;
};

struct Results {
    std::string command;
    /// one-line scenario description for the summary header
    std::string scenario;
    std::vector<Check> checks;
    /// file name -> CSV text, written in insertion order
    std::vector<std::pair<std::string, std::string>> tables;

    void add(std::string name, double margin, bool passed, std::string note = {}) {
        checks.push_back({std::move(name), margin, passed, true, std::move(note)});
    }
    void info(std::string name, double value, std::string note = {}) {
        checks.push_back({std::move(name), value, true, false, std::move(note)});
    }
    void table(std::string file, std::string csv) { tables.emplace_back(std::move(file), std::move(csv)); }

    bool passed() const {
        for (const auto& c : checks)
            if (c.asserted && !c.passed) return false;
        return true;
    }
    std::size_t failures() const {
        std::size_t n = 0;
        for (const auto& c : checks) n += c.asserted && !c.passed;
        return n;
    }
};

inline const char* status(const Check& c) {
    if (!c.asserted) return "INFO";
    return c.passed ? "PASS" : "FAIL";
}

/// Human-readable summary: header, one row per check, totals. Contains no timing data, so reruns are identical.
inline std::string summary_text(const Results& r) {
    std::ostringstream os;
    os << "command: " << r.command << '\n';
    if (!r.scenario.empty()) os << "scenario: " << r.scenario << '\n';
    std::size_t width = 5;
    for (const auto& c : r.checks) width = std::max(width, c.name.size());
    for (const auto& c : r.checks) {
        os << status(c) << "  " << c.name << std::string(width - c.name.size() + 2, ' ')
           << (c.asserted ? "margin " : "value  ") << format_real(c.margin);
        if (!c.note.empty()) os << "  (" << c.note << ')';
        os << '\n';
    }
    os << "checks: " << r.checks.size() << ", failed: " << r.failures() << '\n';
    return os.str();
}

/// Writes every table plus summary.txt and summary.csv into `outdir`, creating it if needed.
inline void emit_report(const Results& r, const std::string& outdir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(outdir, ec);
    if (ec || !fs::is_directory(outdir)) throw ConfigError(outdir + ": cannot create output directory");
    auto write = [&](const std::string& name, const std::string& text) {
        const fs::path path = fs::path(outdir) / name;
        std::ofstream out(path, std::ios::binary);
        out << text;
        out.close();
        if (!out) throw ConfigError(path.string() + ": cannot write");
    };
    for (const auto& [name, csv] : r.tables) write(name, csv);
    std::ostringstream csv;
    csv << "check,status,margin,asserted\n";
    for (const auto& c : r.checks)
        csv << '"' << c.name << "\"," << status(c) << ',' << format_real(c.margin) << ',' << (c.asserted ? 1 : 0)
            << '\n';
    write("summary.csv", csv.str());
    write("summary.txt", summary_text(r));
}

} // namespace bilinear::cli
