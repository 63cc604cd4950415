#include "retk/manifest.hpp"

#include <cstdio>
#include <ctime>

#include <json.hpp>

#include "retk/common.hpp"

namespace retk {

std::string iso8601_utc_now() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json_string() const {
  nlohmann::json j{{"subcommand", subcommand},
                   {"version", version},
                   {"seed", seed},
                   {"started_at", started_at},
                   {"finished_at", finished_at},
                   {"config", config}};
  return j.dump(2) + "\n";
}

void write_manifest_for(RunManifest& manifest, const std::string& output_path) {
  if (manifest.version.empty()) manifest.version = kVersion;
  manifest.finished_at = iso8601_utc_now();
  std::string text = manifest.to_json_string();
  if (output_path.empty())
    std::fputs(text.c_str(), stderr);
  else
    write_file_atomic(output_path + ".manifest.json", text);
}

}  // namespace retk
