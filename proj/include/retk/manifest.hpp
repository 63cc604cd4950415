#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace retk {

// Frozen record of one CLI run: the resolved configuration every output
// was produced under. Written as "<output>.manifest.json" next to file
// outputs, or printed to stderr for stdout-only subcommands.
struct RunManifest {
  std::string subcommand;
  std::string version;
  std::uint64_t seed = 0;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;  // ISO-8601 UTC
  std::map<std::string, std::string> config;

  std::string to_json_string() const;
};

std::string iso8601_utc_now();

// Stamps finished_at and emits the manifest: beside `output_path` when
// non-empty, otherwise to stderr.
void write_manifest_for(RunManifest& manifest, const std::string& output_path);

}  // namespace retk
