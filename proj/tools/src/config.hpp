#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "maskguard/evaluation.hpp"
#include "maskguard/pipeline.hpp"

namespace maskguard::cli {

using json = nlohmann::json;

// Object view that records the keys it hands out; finish() rejects the rest.
class Section {
 public:
  Section(const json& j, std::string path);

  bool has(const char* key) const;  // present and not null
  // Marks `key` as seen; true when it is present with a null value.
  bool is_null(const char* key);
  const json& raw(const char* key);
  Section child(const char* key);

  template <typename T>
  T get(const char* key, T fallback) {
    if (!has(key)) return fallback;
    return as<T>(raw(key), key);
  }
  template <typename T>
  T require(const char* key) {
    if (!has(key)) fail(key, "is required");
    return as<T>(raw(key), key);
  }

  void finish() const;
  [[noreturn]] void fail(const char* key, const std::string& what) const;
  std::string where(const char* key) const { return path_ + "." + key; }

 private:
  template <typename T>
  T as(const json& v, const char* key) const {
    try {
      return v.get<T>();
    } catch (const json::exception&) {
      fail(key, "has the wrong type");
    }
  }

  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

// A JSON config file; a run manifest is accepted too and replays its embedded config.
struct LoadedConfig {
  json config;
  std::filesystem::path path;
  std::filesystem::path base_dir;  // relative paths inside the config resolve here
  std::optional<std::uint64_t> manifest_seed;
  json manifest_inputs = json::object();
  std::string manifest_subcommand;
};

LoadedConfig load_config(const std::filesystem::path& path);

struct SimulateConfig {
  ScenarioCase scenario_case;
  PipelineConfig pipeline;
  std::optional<std::filesystem::path> model_path;
};

struct ExperimentConfig {
  SweepSpec sweep;
  double split_ratio = 0.7;
  TrainConfig train;
  bool kfold = false;
  PipelineConfig pipeline;  // no model
  std::size_t suite_positives = 500;
  std::size_t suite_negatives = 500;
  std::vector<double> roc_f = {0.001, 0.0025, 0.005, 0.01, 0.02, 0.03, 0.05, 0.075, 0.1};
  std::optional<std::filesystem::path> dataset_dir;
  std::optional<std::filesystem::path> model_path;
};

SimulateConfig parse_simulate(const json& j, const std::filesystem::path& base_dir,
                              std::uint64_t root_seed);
ExperimentConfig parse_experiment(const json& j, const std::filesystem::path& base_dir,
                                  std::uint64_t root_seed);

// "seed" from the config, if present.
std::optional<std::uint64_t> config_seed(const json& j);

}  // namespace maskguard::cli
