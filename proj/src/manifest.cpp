#include "augbench/manifest.hpp"

#include <cstdio>
#include <ctime>
#include <fstream>

#include "augbench/common.hpp"

namespace augbench {

std::string iso8601_utc_now() {
    const std::time_t now = std::time(nullptr);
    std::tm utc{};
    gmtime_r(&now, &utc);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", utc.tm_year + 1900,
                  utc.tm_mon + 1, utc.tm_mday, utc.tm_hour, utc.tm_min, utc.tm_sec);
    return buf;
}

void write_manifest(const RunManifest& manifest, const std::string& path) {
    nlohmann::json j{{"command", manifest.command},
                     {"tool_version", manifest.tool_version},
                     {"config", manifest.config},
                     {"seeds", manifest.seeds},
                     {"input_hashes", manifest.input_hashes},
                     {"cache_digests", manifest.cache_digests},
                     {"artifacts", manifest.artifacts},
                     {"started_at", manifest.started_at},
                     {"finished_at", manifest.finished_at}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write manifest: " + path);
    out << j.dump(2) << '\n';
    if (!out.good()) throw DataError("write failed for manifest: " + path);
}

}  // namespace augbench
