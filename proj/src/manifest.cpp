#include "lsc/manifest.hpp"

#include <cinttypes>
#include <cstdio>
#include <sstream>

#include "lsc/errors.hpp"
#include "lsc/format.hpp"
#include "lsc/io.hpp"

namespace lsc {

void RunManifest::add_input(const std::filesystem::path& path) {
    inputs.emplace_back(path.string(), fnv1a64_file(path));
}

std::string manifest_text(const RunManifest& manifest) {
    std::ostringstream out;
    out << "command=" << manifest.command_line << '\n';
    for (const auto& [key, value] : manifest.config) out << "config." << key << '=' << value << '\n';
    for (const auto& [path, digest] : manifest.inputs) {
        char hex[17];
        std::snprintf(hex, sizeof hex, "%016" PRIx64, digest);
        out << "input=" << hex << ' ' << path << '\n';
    }
    for (const auto& path : manifest.outputs) out << "output=" << path << '\n';
    out << "wall_clock_s=" << fmt_double(manifest.wall_clock_seconds, 6) << '\n';
    return out.str();
}

RunManifest parse_manifest(const std::string& text) {
    RunManifest m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw FormatError("manifest line without '=': " + line);
        const std::string key = line.substr(0, eq), value = line.substr(eq + 1);
        if (key == "command") {
            m.command_line = value;
        } else if (key.rfind("config.", 0) == 0) {
            m.config[key.substr(7)] = value;
        } else if (key == "input") {
            const auto space = value.find(' ');
            if (space != 16) throw FormatError("malformed manifest input line: " + line);
            m.inputs.emplace_back(value.substr(17), std::stoull(value.substr(0, 16), nullptr, 16));
        } else if (key == "output") {
            m.outputs.push_back(value);
        } else if (key == "wall_clock_s") {
            m.wall_clock_seconds = std::stod(value);
        }
    }
    return m;
}

std::vector<std::string> verify_manifest_inputs(const RunManifest& manifest) {
    std::vector<std::string> bad;
    for (const auto& [path, digest] : manifest.inputs) {
        try {
            if (fnv1a64_file(path) != digest) bad.push_back(path);
        } catch (const StorageError&) {
            bad.push_back(path);
        }
    }
    return bad;
}

} // namespace lsc
