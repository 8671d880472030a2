#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace augbench {

// Every artifact-producing command records what it ran with: resolved config,
// seeds, content hashes of the inputs, provider-cache digests it touched, and
// the artifacts it wrote. Timestamps live here and only here, so the report
// files themselves stay byte-stable across reruns.
struct RunManifest {
    std::string command;
    std::string tool_version;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    std::map<std::string, std::string> input_hashes;
    std::vector<std::string> cache_digests;
    std::vector<std::string> artifacts;
    std::string started_at;
    std::string finished_at;
};

std::string iso8601_utc_now();

void write_manifest(const RunManifest& manifest, const std::string& path);

}  // namespace augbench
