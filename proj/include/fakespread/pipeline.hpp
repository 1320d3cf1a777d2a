#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fakespread/corpus.hpp"
#include "fakespread/social.hpp"
#include "fakespread/topics.hpp"

namespace fakespread::pipeline {

namespace fs = std::filesystem;

enum class ModelRole { Classifier, Regressor };

struct ModelSpec {
  std::string name;
  std::string kind;  // tree | forest | gbdt | logreg | linear_svm | forest_reg | gbdt_reg
  nlohmann::json params = nlohmann::json::object();
  ModelRole role = ModelRole::Classifier;
};

struct PipelineConfig {
  nlohmann::json raw;  // effective document after overrides
  std::string hash;    // FNV-1a of raw.dump()
  std::uint64_t seed = 0;
  fs::path base_dir;   // relative paths resolve here
  fs::path out_dir;

  fs::path claims_path, propagation_path, users_path;
  std::optional<fs::path> follows_path;
  corpus::ColumnMapping mapping = corpus::ColumnMapping::fibvid_default();

  std::optional<fs::path> lexicon_path;
  textfeat::ComplexityThresholds complexity;
  textfeat::SentimentConfig sentiment;
  textfeat::PronounLists pronouns;

  topics::TldaConfig tlda;
  int min_count = 5;
  std::set<std::string> stopwords;

  social::LabelConfig label;

  double test_fraction = 0.25;
  bool stratified = true;

  std::vector<ModelSpec> models;

  double tff_norm = 10.0;
  std::string spread_mode = "cascade";
  std::string spread_model = "random_forest";
  std::string spread_regressor = "gradient_boosting_regressor";
};

/// Parses and validates a config document. Unknown keys, wrong types,
/// missing inputs and a missing seed raise UsageError naming the key.
PipelineConfig parse_config(nlohmann::json doc, const fs::path& base_dir);

/// Reads `path`, applies `overrides` (a JSON object merged key by key, dotted
/// keys allowed) and parses.
PipelineConfig load_config(const fs::path& path, const nlohmann::json& overrides = nlohmann::json::object());

/// Built-in defaults; a config file only needs to name what differs.
nlohmann::json default_config();

std::uint64_t fnv1a64(std::string_view data);

/// Stage names in execution order for `all`.
const std::vector<std::string>& stage_names();

class Pipeline {
 public:
  explicit Pipeline(PipelineConfig config);

  const PipelineConfig& config() const { return config_; }

  /// Runs one stage ("ingest", "topics", "features", "label", "train",
  /// "evaluate") or "all". Stages read their inputs from the output
  /// directory, so each can run on its own once upstream artifacts exist.
  void run(const std::string& stage);

  void ingest();
  void fit_topics();
  void features();
  void label();
  void train();
  void evaluate();

  /// Request fields: sender, text, recipients (optional; defaults to the
  /// sender's followers), like_count, mode, model. Writes spread.json and
  /// returns its content.
  nlohmann::json predict_spread(const nlohmann::json& request);

 private:
  fs::path stage_dir(const std::string& stage) const;
  void write_manifest(const std::string& stage, const std::vector<std::string>& files) const;
  nlohmann::json stamp() const;
  social::TextFeatureConfig text_config() const;

  PipelineConfig config_;
};

}  // namespace fakespread::pipeline
