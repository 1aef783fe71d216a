#ifndef HETDQCD_CONFIG_IO_HPP
#define HETDQCD_CONFIG_IO_HPP

#include <cstdint>
#include <string>

#include "hetdqcd/network.hpp"

namespace hetdqcd {

struct ToolConfig {
  NetworkConfig network;
  double gamma = 0.0;  // 0 when the file does not set one
};

// JSON schema:
//   { "gamma": 1000,                      // optional, > 1 when present
//     "groups": [ {"mean_shift": 0.35, "count": 4}, ... ] }
// Groups are re-sorted by ascending KLD on load.
ToolConfig parse_config_json(const std::string& json_text);
ToolConfig load_config(const std::string& path);  // throws std::ios_base::failure

// Reproducibility header prepended to every CSV the tools emit.
struct RunManifest {
  std::string subcommand;
  std::string config_path;
  std::string output;
  std::uint64_t master_seed = 0;
  std::string extra;  // free-form flag summary
};

std::string manifest_header(const RunManifest& manifest);

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace hetdqcd

#endif
