#pragma once

#include <bispectra/sweep.hpp>

#include <json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>

#define BISPECTRA_VERSION "0.3.1"

namespace bispectra {

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Written next to every output file. The input hash covers the command and the resolved
/// configuration, so two runs with equal hashes were asked the same question.
struct RunManifest {
    std::string command;
    nlohmann::json config;
    std::string version = BISPECTRA_VERSION;
    std::string timestamp = utc_timestamp();

    std::string input_hash() const {
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(command + "\n" + config.dump())));
        return buf;
    }

    nlohmann::json to_json() const {
        return {{"command", command}, {"config", config}, {"version", version}, {"timestamp", timestamp}, {"input_hash", input_hash()}};
    }
};

inline std::string manifest_path_for(const std::string& output_path) { return output_path + ".manifest.json"; }

inline void write_manifest(const RunManifest& manifest, const std::string& output_path) {
    write_text_file(manifest_path_for(output_path), manifest.to_json().dump(2) + "\n");
}

}  // namespace bispectra
