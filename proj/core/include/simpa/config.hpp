#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "simpa/meta_learning.hpp"

namespace simpa {

// Configuration problems carry the offending field name; the CLI maps these
// to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  TrainConfig train;
  std::string out_dir = "runs/default";
};

// Built-in presets: "regression-appendix-d", "classification-appendix-f",
// "blob-smoke". The returned object is a complete config document.
nlohmann::json preset_json(const std::string& name);

RunConfig config_from_json(nlohmann::json doc);
RunConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

}  // namespace simpa
