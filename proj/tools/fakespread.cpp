// Command-line front end over the fakespread C API.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fakespread/fakespread.h"

using nlohmann::json;

namespace {

int report(fs_status status, const char* what) {
  if (status != FS_OK) std::cerr << "fakespread " << what << ": " << fs_last_error() << '\n';
  return static_cast<int>(status);
}

// "key=value": value is JSON when it parses, a string otherwise.
bool add_override(json& overrides, const std::string& item) {
  const auto eq = item.find('=');
  if (eq == std::string::npos || eq == 0) return false;
  const std::string key = item.substr(0, eq);
  const std::string value = item.substr(eq + 1);
  json parsed = json::parse(value, nullptr, false);
  overrides[key] = parsed.is_discarded() ? json(value) : parsed;
  return true;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fake-news spread analysis pipeline"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", fs_version());

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> sets;
  app.add_option("-c,--config", config_path, "Pipeline config (JSON)")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Override the master seed");
  app.add_option("-o,--out-dir", out_dir, "Override the output directory");
  app.add_option("--set", sets, "Override a config key: key.path=value (repeatable)");

  const std::vector<std::pair<std::string, std::string>> stages{
      {"ingest", "Load and validate the raw corpus"},
      {"topics", "Fit the Twitter-LDA topic model"},
      {"features", "Extract text, social and topic features"},
      {"label", "Assign share labels"},
      {"train", "Train the configured models"},
      {"evaluate", "Score models on the held-out split"},
      {"all", "Run every stage in order"},
  };
  std::vector<CLI::App*> stage_cmds;
  for (const auto& [name, help] : stages) stage_cmds.push_back(app.add_subcommand(name, help));

  CLI::App* spread = app.add_subcommand("predict-spread", "Estimate how far a tweet spreads from a sender");
  std::string sender, text, recipients, mode, model;
  std::int64_t like_count = 0;
  spread->add_option("--sender", sender, "Sender user id")->required();
  spread->add_option("--text", text, "Tweet text")->required();
  spread->add_option("--recipients", recipients, "Comma-separated recipient ids (default: sender's followers)");
  spread->add_option("--mode", mode, "cascade, affinity or regressor");
  spread->add_option("--model", model, "Trained model name");
  spread->add_option("--like-count", like_count, "Likes on the tweet")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  json overrides = json::object();
  for (const auto& item : sets) {
    if (!add_override(overrides, item)) {
      std::cerr << "fakespread: --set expects key=value, got '" << item << "'\n";
      return 1;
    }
  }
  if (seed) overrides["seed"] = *seed;
  if (!out_dir.empty()) overrides["out_dir"] = std::filesystem::absolute(out_dir).string();

  fs_pipeline* pipeline = nullptr;
  if (const int rc = report(fs_pipeline_open(config_path.c_str(), overrides.dump().c_str(), &pipeline), "config")) {
    return rc;
  }
  int rc = 0;
  if (spread->parsed()) {
    json request = {{"sender", sender}, {"text", text}, {"like_count", like_count}};
    if (!recipients.empty()) request["recipients"] = split_list(recipients);
    if (!mode.empty()) request["mode"] = mode;
    if (!model.empty()) request["model"] = model;
    char* result = nullptr;
    rc = report(fs_pipeline_predict_spread(pipeline, request.dump().c_str(), &result), "predict-spread");
    if (rc == 0) {
      std::cout << result << '\n';
      fs_string_free(result);
    }
  } else {
    for (std::size_t i = 0; i < stages.size(); ++i) {
      if (!stage_cmds[i]->parsed()) continue;
      rc = report(fs_pipeline_run(pipeline, stages[i].first.c_str()), stages[i].first.c_str());
      if (rc == 0) {
        char* dir = nullptr;
        if (fs_pipeline_out_dir(pipeline, &dir) == FS_OK) {
          std::cerr << "fakespread " << stages[i].first << ": done, artifacts in " << dir << '\n';
          fs_string_free(dir);
        }
      }
    }
  }
  fs_pipeline_close(pipeline);
  return rc;
}
