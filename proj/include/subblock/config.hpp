#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "subblock/pipeline.hpp"
#include "subblock/synth.hpp"

namespace subblock {

/// Names accepted by apply_param, grouped by config section.
const std::vector<std::string>& loss_param_names();
const std::vector<std::string>& train_param_names();
const std::vector<std::string>& cluster_param_names();

/// Sets one named hyperparameter from a JSON scalar. Integer fields accept
/// integral numbers only. Throws ConfigError on unknown names or bad types.
void apply_param(PipelineConfig& cfg, const std::string& name, const nlohmann::json& value);

/// {"loss": {...}, "train": {...}, "cluster": {...}}
nlohmann::json to_json(const PipelineConfig& cfg);
/// Missing keys keep the value from base.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, const PipelineConfig& base = {});

nlohmann::json to_json(const InjectionSpec& spec);
InjectionSpec injection_spec_from_json(const nlohmann::json& j);

/// {"name": {"fixed": v} | {"uniform": [lo, hi]} | {"log_uniform": [lo, hi]}
///          | {"choice": [v, ...]}}
nlohmann::json to_json(const SearchSpace& space);
SearchSpace search_space_from_json(const nlohmann::json& j);

struct FingerprintConfig {
  std::size_t m = 30;
  std::size_t bins = 20;
  void validate() const;
};

struct RunConfig {
  std::filesystem::path edge_file;
  std::filesystem::path attribute_file;
  std::filesystem::path output_dir;
  PipelineConfig pipeline;
  FingerprintConfig fingerprint;
  std::optional<InjectionSpec> injection;
  std::optional<SearchSpace> search;
  std::size_t trials = 30;

  /// Numeric ranges only; file checks are left to the stages that open them.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace subblock
