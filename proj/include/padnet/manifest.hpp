#pragma once

// Dataset manifest: one text line per sample,
//   clean_path hazy_path beta A seed depth_kind
// Paths are stored relative to the manifest file and resolved on read, so
// identical builds in different directories produce byte-identical manifests.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace padnet {

struct ManifestEntry {
    std::string clean_path;
    std::string hazy_path;
    double beta = 0.0;
    double a = 1.0;
    std::uint64_t seed = 0;
    std::string depth_kind;
};

namespace detail {

inline std::string dirname_of(const std::string& path) {
    std::size_t pos = path.find_last_of('/');
    return pos == std::string::npos ? std::string(".") : path.substr(0, pos);
}

inline std::string resolve_path(const std::string& base_dir, const std::string& path) {
    if (!path.empty() && path.front() == '/') return path;
    return base_dir + "/" + path;
}

// Shortest decimal form that round-trips a double.
inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_manifest: cannot open " + path);
    std::string base = detail::dirname_of(path);
    std::vector<ManifestEntry> entries;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        ManifestEntry e;
        if (!(ls >> e.clean_path >> e.hazy_path >> e.beta >> e.a >> e.seed >> e.depth_kind))
            throw std::runtime_error("read_manifest: malformed line " + std::to_string(lineno) +
                                     " in " + path);
        e.clean_path = detail::resolve_path(base, e.clean_path);
        e.hazy_path = detail::resolve_path(base, e.hazy_path);
        entries.push_back(std::move(e));
    }
    return entries;
}

// Writes entries with paths exactly as given (callers pass relative paths).
inline void write_manifest(const std::vector<ManifestEntry>& entries, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_manifest: cannot open " + path + " for writing");
    for (const ManifestEntry& e : entries) {
        out << e.clean_path << ' ' << e.hazy_path << ' ' << detail::format_double(e.beta) << ' '
            << detail::format_double(e.a) << ' ' << e.seed << ' ' << e.depth_kind << '\n';
    }
    if (!out) throw std::runtime_error("write_manifest: write failed: " + path);
}

}  // namespace padnet
