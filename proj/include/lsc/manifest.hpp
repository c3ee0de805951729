#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace lsc {

struct RunManifest {
    std::string command_line;
    std::map<std::string, std::string> config;
    std::vector<std::pair<std::string, std::uint64_t>> inputs;  // path, FNV-1a 64
    std::vector<std::string> outputs;
    double wall_clock_seconds = 0.0;

    void add_input(const std::filesystem::path& path);
};

std::string manifest_text(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& text);

/// Paths whose current digest differs from the recorded one (or that are
/// missing). Empty means every input verified.
std::vector<std::string> verify_manifest_inputs(const RunManifest& manifest);

} // namespace lsc
