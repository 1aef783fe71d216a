#include "hetdqcd/config_io.hpp"

#include <chrono>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetdqcd/errors.hpp"

namespace hetdqcd {

ToolConfig parse_config_json(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidParameter(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidParameter("config root must be a JSON object");
  if (!doc.contains("groups") || !doc["groups"].is_array() || doc["groups"].empty())
    throw InvalidParameter("config needs a nonempty \"groups\" array");

  std::vector<GroupSpec> groups;
  for (const auto& g : doc["groups"]) {
    if (!g.is_object()) throw InvalidParameter("each group must be a JSON object");
    if (!g.contains("mean_shift") || !g["mean_shift"].is_number())
      throw InvalidParameter("group needs a numeric \"mean_shift\"");
    if (!g.contains("count") || !g["count"].is_number_integer())
      throw InvalidParameter("group needs an integer \"count\"");
    groups.push_back(gaussian_group(g["mean_shift"].get<double>(), g["count"].get<int>()));
  }

  ToolConfig cfg;
  cfg.network = build_network(std::move(groups));
  if (doc.contains("gamma")) {
    if (!doc["gamma"].is_number() || !(doc["gamma"].get<double>() > 1.0))
      throw InvalidParameter("\"gamma\" must be a number > 1");
    cfg.gamma = doc["gamma"].get<double>();
  }
  return cfg;
}

ToolConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string manifest_header(const RunManifest& manifest) {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
  std::ostringstream out;
  out << "# hetdqcd " << kToolVersion << " subcommand=" << manifest.subcommand
      << " config=" << (manifest.config_path.empty() ? "-" : manifest.config_path)
      << " out=" << (manifest.output.empty() ? "-" : manifest.output)
      << " seed=" << manifest.master_seed << " unix_time=" << secs;
  if (!manifest.extra.empty()) out << ' ' << manifest.extra;
  out << '\n';
  return out.str();
}

}  // namespace hetdqcd
