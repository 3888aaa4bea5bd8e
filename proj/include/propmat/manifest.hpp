#pragma once

// Batch manifest: one entry per line, whitespace-separated
//   <image> <trimap> [truth]
// '#' starts a comment. Relative paths resolve against the manifest's
// directory.

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "propmat/errors.hpp"

namespace propmat {

struct ManifestEntry {
    std::filesystem::path image;
    std::filesystem::path trimap;
    std::optional<std::filesystem::path> truth;
    int line = 0;
};

struct BatchManifest {
    std::vector<ManifestEntry> entries;
};

inline BatchManifest parse_manifest(std::string_view text, const std::filesystem::path& base_dir) {
    BatchManifest manifest;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    auto resolve = [&](const std::string& p) {
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };
    while (std::getline(in, raw)) {
        ++line_no;
        if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream fields(raw);
        std::vector<std::string> tokens;
        for (std::string t; fields >> t;) tokens.push_back(t);
        if (tokens.empty()) continue;
        if (tokens.size() < 2 || tokens.size() > 3) {
            throw ManifestError("manifest line " + std::to_string(line_no) +
                                ": expected '<image> <trimap> [truth]', got " +
                                std::to_string(tokens.size()) + " field(s)");
        }
        ManifestEntry e;
        e.image = resolve(tokens[0]);
        e.trimap = resolve(tokens[1]);
        if (tokens.size() == 3) e.truth = resolve(tokens[2]);
        e.line = line_no;
        manifest.entries.push_back(std::move(e));
    }
    if (manifest.entries.empty()) throw ManifestError("manifest has no entries");
    return manifest;
}

// Parses and checks that every referenced file exists.
inline BatchManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ManifestError("cannot open manifest '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    BatchManifest manifest = parse_manifest(buf.str(), path.parent_path());
    std::string missing;
    auto check = [&](const std::filesystem::path& p, int line) {
        if (!std::filesystem::exists(p)) {
            missing += "\n  line " + std::to_string(line) + ": " + p.string();
        }
    };
    for (const auto& e : manifest.entries) {
        check(e.image, e.line);
        check(e.trimap, e.line);
        if (e.truth) check(*e.truth, e.line);
    }
    if (!missing.empty()) throw ManifestError("manifest references missing files:" + missing);
    return manifest;
}

}  // namespace propmat
