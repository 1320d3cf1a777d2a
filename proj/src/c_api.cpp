#include "fakespread/fakespread.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>

#include "fakespread/error.hpp"
#include "fakespread/eval.hpp"
#include "fakespread/ml.hpp"
#include "fakespread/pipeline.hpp"
#include "fakespread/social.hpp"
#include "fakespread/topics.hpp"

#ifndef FAKESPREAD_DATA_DIR
#define FAKESPREAD_DATA_DIR "data"
#endif

using nlohmann::json;
namespace fsp = fakespread;

struct fs_pipeline {
  std::unique_ptr<fsp::pipeline::Pipeline> impl;
};

struct fs_topic_model {
  fsp::topics::TldaModel impl;
};

struct fs_model {
  fsp::ml::ModelPtr impl;
};

namespace {

thread_local std::string g_last_error;

fs_status fail(fs_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Runs `body`, translating exceptions into status codes.
template <typename F>
fs_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return FS_OK;
  } catch (const fsp::UsageError& e) {
    return fail(FS_ERR_USAGE, e.what());
  } catch (const fsp::DataError& e) {
    return fail(FS_ERR_DATA, e.what());
  } catch (const json::exception& e) {
    return fail(FS_ERR_DATA, std::string("invalid JSON: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(FS_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(FS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(FS_ERR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (!p) throw fsp::UsageError(std::string(name) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json parse_json(const char* text, const char* what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw fsp::UsageError(std::string(what) + " is not valid JSON");
  return j;
}

json read_file_json(const char* path) {
  std::ifstream in(path);
  if (!in) throw fsp::DataError(std::string("cannot open ") + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw fsp::DataError(std::string("not valid JSON: ") + path);
  return j;
}

}  // namespace

extern "C" {

const char* fs_last_error(void) { return g_last_error.c_str(); }
const char* fs_version(void) { return "0.1.0"; }
void fs_string_free(char* s) { std::free(s); }

fs_status fs_pipeline_open(const char* config_path, const char* overrides_json, fs_pipeline** out) {
  return guarded([&] {
    require(config_path, "config_path");
    require(out, "out");
    *out = nullptr;
    const json overrides = overrides_json ? parse_json(overrides_json, "overrides") : json::object();
    auto cfg = fsp::pipeline::load_config(config_path, overrides);
    *out = new fs_pipeline{std::make_unique<fsp::pipeline::Pipeline>(std::move(cfg))};
  });
}

fs_status fs_pipeline_run(fs_pipeline* p, const char* stage) {
  return guarded([&] {
    require(p, "pipeline");
    require(stage, "stage");
    p->impl->run(stage);
  });
}

fs_status fs_pipeline_out_dir(const fs_pipeline* p, char** out) {
  return guarded([&] {
    require(p, "pipeline");
    require(out, "out");
    *out = dup_string(p->impl->config().out_dir.string());
  });
}

fs_status fs_pipeline_config_json(const fs_pipeline* p, char** out) {
  return guarded([&] {
    require(p, "pipeline");
    require(out, "out");
    *out = dup_string(p->impl->config().raw.dump(2));
  });
}

fs_status fs_pipeline_predict_spread(fs_pipeline* p, const char* request_json, char** out_json) {
  return guarded([&] {
    require(p, "pipeline");
    require(request_json, "request_json");
    require(out_json, "out_json");
    *out_json = nullptr;
    const json result = p->impl->predict_spread(parse_json(request_json, "spread request"));
    *out_json = dup_string(result.dump(2));
  });
}

void fs_pipeline_close(fs_pipeline* p) { delete p; }

fs_status fs_tff(int64_t followers, int64_t following, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = fsp::social::tff(followers, following);
  });
}

fs_status fs_acceptance_score(const double* theta_recipient, const double* tweet_posterior, size_t num_topics,
                              double tff_sender, double tff_norm, double* out) {
  return guarded([&] {
    require(theta_recipient, "theta_recipient");
    require(tweet_posterior, "tweet_posterior");
    require(out, "out");
    *out = fsp::social::acceptance_score({theta_recipient, num_topics}, {tweet_posterior, num_topics}, tff_sender,
                                         tff_norm);
  });
}

fs_status fs_text_features(const char* text, const char* lexicon_path, char** out_json) {
  return guarded([&] {
    require(text, "text");
    require(out_json, "out_json");
    fsp::social::TextFeatureConfig cfg;
    std::filesystem::path lex = lexicon_path ? std::filesystem::path(lexicon_path)
                                             : std::filesystem::path(FAKESPREAD_DATA_DIR) / "lexicon" / "en_sentiment.tsv";
    if (const char* env = std::getenv("FAKESPREAD_DATA_DIR"); !lexicon_path && env && *env) {
      lex = std::filesystem::path(env) / "lexicon" / "en_sentiment.tsv";
    }
    cfg.lexicon = fsp::textfeat::Lexicon::load(lex);
    const auto f = fsp::social::extract_text_features(text, cfg);
    const json j = {{"smog", f.complexity.smog},
                    {"lexical_diversity", f.complexity.lexical_diversity},
                    {"avg_word_length", f.complexity.avg_word_length},
                    {"complexity", fsp::textfeat::to_string(f.complexity.category)},
                    {"polarity", f.psych.polarity},
                    {"subjectivity", f.psych.subjectivity},
                    {"sentiment", fsp::textfeat::to_string(f.psych.category)},
                    {"personal_pronouns", f.style.personal_pronouns},
                    {"impersonal_pronouns", f.style.impersonal_pronouns},
                    {"style", fsp::textfeat::to_string(f.style.category)}};
    *out_json = dup_string(j.dump());
  });
}

fs_status fs_auroc(const double* y_true, const double* scores, size_t n, double* out) {
  return guarded([&] {
    require(y_true, "y_true");
    require(scores, "scores");
    require(out, "out");
    *out = fsp::eval::roc_auroc({y_true, n}, {scores, n}).auroc;
  });
}

fs_status fs_topic_model_load(const char* path, fs_topic_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new fs_topic_model{fsp::topics::TldaModel::from_json(read_file_json(path))};
  });
}

fs_status fs_topic_model_num_topics(const fs_topic_model* m, int* out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    *out = m->impl.num_topics();
  });
}

namespace {

void copy_out(const std::vector<double>& v, double* out, size_t out_len) {
  if (out_len != v.size()) {
    throw fsp::UsageError("output buffer holds " + std::to_string(out_len) + " values, need " + std::to_string(v.size()));
  }
  std::copy(v.begin(), v.end(), out);
}

}  // namespace

fs_status fs_topic_model_infer(const fs_topic_model* m, const char* text, double* out, size_t out_len) {
  return guarded([&] {
    require(m, "model");
    require(text, "text");
    require(out, "out");
    copy_out(m->impl.infer_tweet_topic(text), out, out_len);
  });
}

fs_status fs_topic_model_user_theta(const fs_topic_model* m, const char* user_id, double* out, size_t out_len) {
  return guarded([&] {
    require(m, "model");
    require(user_id, "user_id");
    require(out, "out");
    copy_out(m->impl.user_topic_distribution(user_id), out, out_len);
  });
}

void fs_topic_model_free(fs_topic_model* m) { delete m; }

fs_status fs_model_load(const char* path, fs_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = nullptr;
    *out = new fs_model{fsp::ml::load_model(read_file_json(path))};
  });
}

fs_status fs_model_num_features(const fs_model* m, size_t* out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    *out = m->impl->num_features();
  });
}

fs_status fs_model_is_classifier(const fs_model* m, int* out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    *out = m->impl->task() == fsp::ml::Task::Classification ? 1 : 0;
  });
}

namespace {

void check_width(const fs_model* m, const double* x, size_t n) {
  require(m, "model");
  require(x, "x");
  if (n != m->impl->num_features()) {
    throw fsp::UsageError("model expects " + std::to_string(m->impl->num_features()) + " features, got " +
                          std::to_string(n));
  }
}

}  // namespace

fs_status fs_model_score(const fs_model* m, const double* x, size_t n_features, double* out) {
  return guarded([&] {
    check_width(m, x, n_features);
    require(out, "out");
    *out = m->impl->score({x, n_features});
  });
}

fs_status fs_model_predict(const fs_model* m, const double* x, size_t n_features, double* out) {
  return guarded([&] {
    check_width(m, x, n_features);
    require(out, "out");
    *out = m->impl->predict_one({x, n_features});
  });
}

void fs_model_free(fs_model* m) { delete m; }

}  // extern "C"
