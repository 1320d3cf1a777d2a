#include "fakespread/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "fakespread/csv.hpp"
#include "fakespread/error.hpp"
#include "fakespread/eval.hpp"
#include "fakespread/ml.hpp"

#ifndef FAKESPREAD_DATA_DIR
#define FAKESPREAD_DATA_DIR "data"
#endif

namespace fakespread::pipeline {

using nlohmann::json;

namespace {

fs::path data_dir() {
  if (const char* env = std::getenv("FAKESPREAD_DATA_DIR"); env && *env) return env;
  return FAKESPREAD_DATA_DIR;
}

json default_roster() {
  return {{"classifiers",
           json::array({
               {{"name", "random_forest"}, {"kind", "forest"}, {"n_trees", 200}},
               {{"name", "gradient_boosting"}, {"kind", "gbdt"}, {"n_estimators", 150}, {"max_depth", 3}},
               {{"name", "logistic_regression"}, {"kind", "logreg"}},
               {{"name", "linear_svm"}, {"kind", "linear_svm"}},
               {{"name", "decision_tree"}, {"kind", "tree"}, {"max_depth", 8}},
           })},
          {"regressors",
           json::array({
               {{"name", "random_forest_regressor"}, {"kind", "forest_reg"}, {"n_trees", 200}},
               {{"name", "gradient_boosting_regressor"}, {"kind", "gbdt_reg"}, {"n_estimators", 200}},
           })}};
}

// Sections whose contents are not checked against the defaults.
bool free_form(const std::string& path) { return path == "mapping" || path == "models"; }

void check_keys(const json& user, const json& defaults, const std::string& prefix) {
  for (const auto& [key, value] : user.items()) {
    const std::string path = prefix.empty() ? key : prefix + "." + key;
    if (!defaults.contains(key)) throw UsageError("unknown config key '" + path + "'");
    if (free_form(path)) continue;
    const json& def = defaults.at(key);
    if (def.is_object()) {
      if (!value.is_object()) throw UsageError("config key '" + path + "' must be an object");
      check_keys(value, def, path);
    }
  }
}

void merge_into(json& dst, const json& src) {
  for (const auto& [key, value] : src.items()) {
    if (value.is_object() && dst.contains(key) && dst[key].is_object() && key != "models") {
      merge_into(dst[key], value);
    } else {
      dst[key] = value;
    }
  }
}

// {"a.b": 1} -> {"a": {"b": 1}}
json expand_dotted(const json& overrides) {
  json out = json::object();
  for (const auto& [key, value] : overrides.items()) {
    json* node = &out;
    std::string_view rest = key;
    for (std::size_t dot; (dot = rest.find('.')) != std::string_view::npos; rest.remove_prefix(dot + 1)) {
      node = &(*node)[std::string(rest.substr(0, dot))];
      if (!node->is_object()) *node = json::object();
    }
    (*node)[std::string(rest)] = value;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  const json& at(const std::string& path) const {
    const json* node = &doc_;
    std::string_view rest = path;
    while (true) {
      const auto dot = rest.find('.');
      const std::string key(rest.substr(0, dot));
      node = &node->at(key);
      if (dot == std::string_view::npos) return *node;
      rest.remove_prefix(dot + 1);
    }
  }
  bool is_null(const std::string& path) const { return at(path).is_null(); }

  double number(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number()) throw UsageError("config key '" + path + "' must be a number");
    return v.get<double>();
  }
  std::int64_t integer(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_number_integer()) throw UsageError("config key '" + path + "' must be an integer");
    return v.get<std::int64_t>();
  }
  bool boolean(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_boolean()) throw UsageError("config key '" + path + "' must be true or false");
    return v.get<bool>();
  }
  std::string string(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_string()) throw UsageError("config key '" + path + "' must be a string");
    return v.get<std::string>();
  }
  std::set<std::string> words(const std::string& path) const {
    const json& v = at(path);
    if (!v.is_array()) throw UsageError("config key '" + path + "' must be a list of strings");
    std::set<std::string> out;
    for (const auto& w : v) {
      if (!w.is_string()) throw UsageError("config key '" + path + "' must be a list of strings");
      out.insert(w.get<std::string>());
    }
    return out;
  }

 private:
  const json& doc_;
};

fs::path resolve(const fs::path& base, const fs::path& p) { return p.is_absolute() ? p : base / p; }

fs::path existing(const Reader& r, const std::string& key, const fs::path& base) {
  const fs::path p = resolve(base, r.string(key));
  if (!fs::exists(p)) throw UsageError("config key '" + key + "': path does not exist: " + p.string());
  return p;
}

std::set<std::string> read_word_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    words.insert(line);
  }
  return words;
}

const std::set<std::string> kClassifierKinds{"tree", "forest", "gbdt", "logreg", "linear_svm"};
const std::set<std::string> kRegressorKinds{"forest_reg", "gbdt_reg", "tree_reg"};

const std::map<std::string, std::set<std::string>> kModelParams{
    {"tree", {"max_depth", "min_samples_split", "min_samples_leaf", "criterion"}},
    {"tree_reg", {"max_depth", "min_samples_split", "min_samples_leaf"}},
    {"forest", {"n_trees", "max_depth", "max_features", "min_samples_split", "bootstrap"}},
    {"forest_reg", {"n_trees", "max_depth", "max_features", "min_samples_split", "bootstrap"}},
    {"gbdt", {"n_estimators", "learning_rate", "max_depth", "n_bins", "min_samples_leaf"}},
    {"gbdt_reg", {"n_estimators", "learning_rate", "max_depth", "n_bins", "min_samples_leaf"}},
    {"logreg", {"l2_lambda", "learning_rate", "n_epochs"}},
    {"linear_svm", {"reg_lambda", "n_epochs"}},
};

std::vector<ModelSpec> parse_models(const json& models) {
  std::vector<ModelSpec> specs;
  std::set<std::string> names;
  for (const auto& [section, role] : {std::pair{"classifiers", ModelRole::Classifier},
                                      std::pair{"regressors", ModelRole::Regressor}}) {
    const std::string base = std::string("models.") + section;
    if (!models.contains(section)) continue;
    const json& list = models.at(section);
    if (!list.is_array()) throw UsageError("config key '" + base + "' must be a list");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string key = base + "[" + std::to_string(i) + "]";
      const json& m = list[i];
      if (!m.is_object() || !m.contains("name") || !m.at("name").is_string() || !m.contains("kind") ||
          !m.at("kind").is_string()) {
        throw UsageError("config key '" + key + "' needs string fields 'name' and 'kind'");
      }
      ModelSpec spec;
      spec.name = m.at("name").get<std::string>();
      spec.kind = m.at("kind").get<std::string>();
      spec.role = role;
      const auto& kinds = role == ModelRole::Classifier ? kClassifierKinds : kRegressorKinds;
      if (!kinds.count(spec.kind)) throw UsageError("config key '" + key + ".kind': unsupported '" + spec.kind + "'");
      if (spec.name.empty() || spec.name.find_first_of("/\\.") != std::string::npos) {
        throw UsageError("config key '" + key + ".name' must be a plain identifier");
      }
      if (!names.insert(spec.name).second) throw UsageError("config key '" + key + ".name': duplicate '" + spec.name + "'");
      const auto& allowed = kModelParams.at(spec.kind);
      for (const auto& [pk, pv] : m.items()) {
        if (pk == "name" || pk == "kind") continue;
        if (!allowed.count(pk)) throw UsageError("unknown config key '" + key + "." + pk + "'");
        spec.params[pk] = pv;
      }
      specs.push_back(std::move(spec));
    }
  }
  return specs;
}

template <typename T>
T param(const ModelSpec& spec, const char* key, T fallback) {
  if (!spec.params.contains(key)) return fallback;
  const json& v = spec.params.at(key);
  try {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw json::type_error::create(302, "expected boolean", &v);
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw json::type_error::create(302, "expected integer", &v);
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw json::type_error::create(302, "expected number", &v);
    }
    return v.get<T>();
  } catch (const json::exception&) {
    throw UsageError("config key 'models." + spec.name + "." + key + "' has the wrong type");
  }
}

ml::ModelPtr train_model(const ModelSpec& spec, const ml::Dataset& data, std::uint64_t seed) {
  if (spec.kind == "tree" || spec.kind == "tree_reg") {
    ml::TreeConfig c;
    c.max_depth = param(spec, "max_depth", c.max_depth);
    c.min_samples_split = param(spec, "min_samples_split", c.min_samples_split);
    c.min_samples_leaf = param(spec, "min_samples_leaf", c.min_samples_leaf);
    c.criterion = ml::criterion_from_string(param<std::string>(spec, "criterion", "gini"));
    return ml::fit_decision_tree(data, spec.kind == "tree" ? ml::Task::Classification : ml::Task::Regression, c);
  }
  if (spec.kind == "forest" || spec.kind == "forest_reg") {
    ml::ForestConfig c;
    c.n_trees = param(spec, "n_trees", c.n_trees);
    c.max_depth = param(spec, "max_depth", c.max_depth);
    c.max_features = param(spec, "max_features", c.max_features);
    c.min_samples_split = param(spec, "min_samples_split", c.min_samples_split);
    c.bootstrap = param(spec, "bootstrap", c.bootstrap);
    c.seed = seed;
    return ml::fit_random_forest(data, spec.kind == "forest" ? ml::Task::Classification : ml::Task::Regression, c);
  }
  if (spec.kind == "gbdt" || spec.kind == "gbdt_reg") {
    ml::GbdtConfig c;
    c.n_estimators = param(spec, "n_estimators", c.n_estimators);
    c.learning_rate = param(spec, "learning_rate", c.learning_rate);
    c.max_depth = param(spec, "max_depth", c.max_depth);
    c.n_bins = param(spec, "n_bins", c.n_bins);
    c.min_samples_leaf = param(spec, "min_samples_leaf", c.min_samples_leaf);
    c.seed = seed;
    return ml::fit_gbdt(data, spec.kind == "gbdt" ? ml::Loss::Logistic : ml::Loss::Squared, c);
  }
  if (spec.kind == "logreg") {
    ml::LogRegConfig c;
    c.l2_lambda = param(spec, "l2_lambda", c.l2_lambda);
    c.learning_rate = param(spec, "learning_rate", c.learning_rate);
    c.n_epochs = param(spec, "n_epochs", c.n_epochs);
    c.seed = seed;
    return ml::fit_logistic_regression(data, c);
  }
  if (spec.kind == "linear_svm") {
    ml::SvmConfig c;
    c.reg_lambda = param(spec, "reg_lambda", c.reg_lambda);
    c.n_epochs = param(spec, "n_epochs", c.n_epochs);
    c.seed = seed;
    return ml::fit_linear_svm(data, c);
  }
  throw UsageError("unsupported model kind '" + spec.kind + "'");
}

// ---------------------------------------------------------------------------
// artifact IO

json read_json(const fs::path& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw DataError("missing upstream artifact " + path.string() + " (" + what + ")");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("corrupt artifact " + path.string());
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

double parse_double(const std::string& s, const fs::path& file) {
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("non-numeric cell '" + s + "' in " + file.string());
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const fs::path& path, const std::string& what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("missing upstream artifact " + path.string() + " (" + what + ")");
  csv::Reader reader(in);
  CsvTable t;
  auto header = reader.next();
  if (!header) throw DataError("empty artifact " + path.string());
  t.header = std::move(*header);
  while (auto row = reader.next()) {
    if (row->size() != t.header.size()) throw DataError("ragged row in " + path.string());
    t.rows.push_back(std::move(*row));
  }
  return t;
}

struct IngestedCorpus {
  std::vector<corpus::NewsClaim> claims;
  std::vector<corpus::TweetRecord> tweets;
  std::vector<corpus::UserProfile> users;
};

IngestedCorpus load_ingested(const fs::path& dir) {
  const auto need = [&](const char* f) {
    const fs::path p = dir / f;
    if (!fs::exists(p)) throw DataError("missing upstream artifact " + p.string() + " (run `ingest` first)");
    return p;
  };
  const auto canonical = corpus::ColumnMapping::canonical();
  IngestedCorpus c;
  c.claims = corpus::load_claims(need("claims.jsonl"), canonical.claims).records;
  std::set<std::string> ids;
  for (const auto& cl : c.claims) ids.insert(cl.claim_id);
  c.tweets = corpus::load_propagation(need("tweets.jsonl"), canonical.propagation, ids).records;
  c.users = corpus::load_users(need("users.jsonl"), canonical.users).records;
  return c;
}

std::vector<corpus::TweetRecord> unique_tweets(const std::vector<corpus::TweetRecord>& tweets, std::size_t* duplicates) {
  std::set<std::string> seen;
  std::vector<corpus::TweetRecord> out;
  for (const auto& t : tweets) {
    if (seen.insert(t.tweet_id).second) {
      out.push_back(t);
    } else if (duplicates) {
      ++*duplicates;
    }
  }
  return out;
}

struct LabeledData {
  ml::Dataset features;  // y unset
  std::vector<double> label;
  std::vector<double> target;
};

LabeledData read_labeled(const fs::path& path) {
  const CsvTable t = read_csv(path, "run `label` first");
  if (t.header.size() < 3 || t.header[t.header.size() - 2] != "label" || t.header.back() != "target") {
    throw DataError("labeled dataset header must end with label,target: " + path.string());
  }
  const std::size_t d = t.header.size() - 2;
  LabeledData out;
  out.features.feature_names.assign(t.header.begin(), t.header.begin() + static_cast<std::ptrdiff_t>(d));
  std::vector<double> data;
  data.reserve(t.rows.size() * d);
  for (const auto& row : t.rows) {
    for (std::size_t c = 0; c < d; ++c) data.push_back(parse_double(row[c], path));
    out.label.push_back(parse_double(row[d], path));
    out.target.push_back(parse_double(row[d + 1], path));
  }
  out.features.X = ml::Matrix(t.rows.size(), d, std::move(data));
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

json default_config() {
  return {{"seed", nullptr},
          {"out_dir", "out"},
          {"inputs", {{"claims", nullptr}, {"propagation", nullptr}, {"users", nullptr}, {"follows", nullptr}}},
          {"mapping", json::object()},
          {"mapping_file", nullptr},
          {"textfeat",
           {{"lexicon", nullptr},
            {"smog_medium_from", 9.0},
            {"smog_complex_above", 12.0},
            {"positive_above", 0.05},
            {"negative_below", -0.05},
            {"negators", {"not", "no", "never"}},
            {"personal_pronouns", nullptr},
            {"impersonal_pronouns", nullptr},
            {"stylic_min_personal", 1}}},
          {"topics",
           {{"num_topics", 10},
            {"alpha", nullptr},
            {"beta", 0.01},
            {"gamma", 20.0},
            {"sweeps", 500},
            {"min_count", 5},
            {"use_default_stopwords", true},
            {"stopwords", json::array()}}},
          {"label",
           {{"mode", "retweet_threshold"},
            {"tau", 1},
            {"auto_calibrate", true},
            {"min_positive_rate", 0.40},
            {"max_positive_rate", 0.50}}},
          {"split", {{"test_fraction", 0.25}, {"stratified", true}}},
          {"models", default_roster()},
          {"spread",
           {{"tff_norm", 10.0},
            {"mode", "cascade"},
            {"model", "random_forest"},
            {"regressor", "gradient_boosting_regressor"}}}};
}

PipelineConfig parse_config(json doc, const fs::path& base_dir) {
  if (!doc.is_object()) throw UsageError("config must be a JSON object");
  json effective = default_config();
  check_keys(doc, effective, "");
  merge_into(effective, doc);

  PipelineConfig cfg;
  cfg.raw = effective;
  cfg.hash = [&] {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(effective.dump())));
    return std::string(buf);
  }();
  cfg.base_dir = base_dir;
  const Reader r(effective);

  if (r.is_null("seed")) throw UsageError("config key 'seed' is mandatory");
  const json& seed = r.at("seed");
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<std::int64_t>() >= 0)) {
    throw UsageError("config key 'seed' must be a non-negative integer");
  }
  cfg.seed = seed.get<std::uint64_t>();
  cfg.out_dir = resolve(base_dir, r.string("out_dir"));

  for (const char* key : {"inputs.claims", "inputs.propagation", "inputs.users"}) {
    if (r.is_null(key)) throw UsageError(std::string("config key '") + key + "' is mandatory");
  }
  cfg.claims_path = existing(r, "inputs.claims", base_dir);
  cfg.propagation_path = existing(r, "inputs.propagation", base_dir);
  cfg.users_path = existing(r, "inputs.users", base_dir);
  if (!r.is_null("inputs.follows")) cfg.follows_path = existing(r, "inputs.follows", base_dir);

  json mapping = json::object();
  if (!r.is_null("mapping_file")) mapping = read_json(existing(r, "mapping_file", base_dir), "mapping_file");
  merge_into(mapping, r.at("mapping"));
  try {
    cfg.mapping = corpus::ColumnMapping::from_json(mapping);
  } catch (const json::exception& e) {
    throw UsageError(std::string("config key 'mapping': ") + e.what());
  }

  cfg.lexicon_path = r.is_null("textfeat.lexicon") ? data_dir() / "lexicon" / "en_sentiment.tsv"
                                                   : existing(r, "textfeat.lexicon", base_dir);
  if (!fs::exists(*cfg.lexicon_path)) throw UsageError("config key 'textfeat.lexicon': bundled lexicon not found");
  cfg.complexity.medium_from = r.number("textfeat.smog_medium_from");
  cfg.complexity.complex_above = r.number("textfeat.smog_complex_above");
  if (cfg.complexity.medium_from > cfg.complexity.complex_above) {
    throw UsageError("config key 'textfeat.smog_medium_from' must not exceed 'textfeat.smog_complex_above'");
  }
  cfg.sentiment.positive_above = r.number("textfeat.positive_above");
  cfg.sentiment.negative_below = r.number("textfeat.negative_below");
  cfg.sentiment.negators = r.words("textfeat.negators");
  if (!r.is_null("textfeat.personal_pronouns")) cfg.pronouns.personal = r.words("textfeat.personal_pronouns");
  if (!r.is_null("textfeat.impersonal_pronouns")) cfg.pronouns.impersonal = r.words("textfeat.impersonal_pronouns");
  cfg.pronouns.stylic_min_personal = static_cast<int>(r.integer("textfeat.stylic_min_personal"));

  cfg.tlda.num_topics = static_cast<int>(r.integer("topics.num_topics"));
  if (cfg.tlda.num_topics < 1) throw UsageError("config key 'topics.num_topics' must be >= 1");
  cfg.tlda.alpha = r.is_null("topics.alpha") ? -1.0 : r.number("topics.alpha");
  if (!r.is_null("topics.alpha") && !(cfg.tlda.alpha > 0)) throw UsageError("config key 'topics.alpha' must be positive");
  cfg.tlda.beta = r.number("topics.beta");
  cfg.tlda.gamma = r.number("topics.gamma");
  if (!(cfg.tlda.beta > 0)) throw UsageError("config key 'topics.beta' must be positive");
  if (!(cfg.tlda.gamma > 0)) throw UsageError("config key 'topics.gamma' must be positive");
  cfg.tlda.sweeps = static_cast<int>(r.integer("topics.sweeps"));
  if (cfg.tlda.sweeps < 0) throw UsageError("config key 'topics.sweeps' must be >= 0");
  cfg.tlda.seed = cfg.seed;
  cfg.min_count = static_cast<int>(r.integer("topics.min_count"));
  if (cfg.min_count < 1) throw UsageError("config key 'topics.min_count' must be >= 1");
  if (r.boolean("topics.use_default_stopwords")) cfg.stopwords = read_word_file(data_dir() / "stopwords" / "en.txt");
  for (const auto& w : r.words("topics.stopwords")) cfg.stopwords.insert(w);

  try {
    cfg.label.mode = social::label_mode_from_string(r.string("label.mode"));
  } catch (const UsageError&) {
    throw UsageError("config key 'label.mode' must be retweet_threshold or follower_evidence");
  }
  cfg.label.tau = r.integer("label.tau");
  if (cfg.label.tau < 1) throw UsageError("config key 'label.tau' must be >= 1");
  cfg.label.auto_calibrate = r.boolean("label.auto_calibrate");
  cfg.label.min_positive_rate = r.number("label.min_positive_rate");
  cfg.label.max_positive_rate = r.number("label.max_positive_rate");
  if (cfg.label.mode == social::LabelMode::FollowerEvidence && !cfg.follows_path) {
    throw UsageError("config key 'inputs.follows' is required when label.mode is follower_evidence");
  }

  cfg.test_fraction = r.number("split.test_fraction");
  if (!(cfg.test_fraction > 0 && cfg.test_fraction < 1)) throw UsageError("config key 'split.test_fraction' must be in (0,1)");
  cfg.stratified = r.boolean("split.stratified");

  const json& models = r.at("models");
  if (!models.is_object()) throw UsageError("config key 'models' must be an object");
  for (const auto& [k, _] : models.items()) {
    if (k != "classifiers" && k != "regressors") throw UsageError("unknown config key 'models." + k + "'");
  }
  cfg.models = parse_models(models);

  cfg.tff_norm = r.number("spread.tff_norm");
  if (!(cfg.tff_norm > 0)) throw UsageError("config key 'spread.tff_norm' must be positive");
  cfg.spread_mode = r.string("spread.mode");
  try {
    social::spread_mode_from_string(cfg.spread_mode);
  } catch (const UsageError&) {
    throw UsageError("config key 'spread.mode' must be cascade, affinity or regressor");
  }
  cfg.spread_model = r.string("spread.model");
  cfg.spread_regressor = r.string("spread.regressor");
  return cfg;
}

PipelineConfig load_config(const fs::path& path, const json& overrides) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path.string());
  json doc = json::parse(in, nullptr, false, true);
  if (doc.is_discarded()) throw UsageError("config file is not valid JSON: " + path.string());
  if (!overrides.is_object()) throw UsageError("overrides must be a JSON object");
  merge_into(doc, expand_dotted(overrides));
  return parse_config(std::move(doc), fs::absolute(path).parent_path());
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> kStages{"ingest", "topics", "features", "label", "train", "evaluate"};
  return kStages;
}

// ---------------------------------------------------------------------------

Pipeline::Pipeline(PipelineConfig config) : config_(std::move(config)) {}

fs::path Pipeline::stage_dir(const std::string& stage) const {
  const fs::path dir = config_.out_dir / stage;
  fs::create_directories(dir);
  return dir;
}

json Pipeline::stamp() const { return {{"config_hash", config_.hash}, {"seed", config_.seed}}; }

void Pipeline::write_manifest(const std::string& stage, const std::vector<std::string>& files) const {
  json m = stamp();
  m["stage"] = stage;
  m["files"] = files;
  write_json(stage_dir(stage) / "manifest.json", m);
}

social::TextFeatureConfig Pipeline::text_config() const {
  social::TextFeatureConfig c;
  c.complexity = config_.complexity;
  c.sentiment = config_.sentiment;
  c.pronouns = config_.pronouns;
  c.lexicon = textfeat::Lexicon::load(*config_.lexicon_path);
  return c;
}

void Pipeline::run(const std::string& stage) {
  if (stage == "all") {
    for (const auto& s : stage_names()) run(s);
    return;
  }
  if (stage == "ingest") return ingest();
  if (stage == "topics") return fit_topics();
  if (stage == "features") return features();
  if (stage == "label") return label();
  if (stage == "train") return train();
  if (stage == "evaluate") return evaluate();
  throw UsageError("unknown stage '" + stage + "'");
}

void Pipeline::ingest() {
  const auto claims = corpus::load_claims(config_.claims_path, config_.mapping.claims);
  std::set<std::string> ids;
  for (const auto& c : claims.records) ids.insert(c.claim_id);
  const auto tweets = corpus::load_propagation(config_.propagation_path, config_.mapping.propagation, ids);
  const auto users = corpus::load_users(config_.users_path, config_.mapping.users);

  const fs::path dir = stage_dir("ingest");
  corpus::write_jsonl(dir / "claims.jsonl", claims.records);
  corpus::write_jsonl(dir / "tweets.jsonl", tweets.records);
  corpus::write_jsonl(dir / "users.jsonl", users.records);
  json report = stamp();
  report["files"] = {{"claims", claims.report.to_json()},
                     {"propagation", tweets.report.to_json()},
                     {"users", users.report.to_json()}};
  report["summary"] = corpus::dataset_summary(claims.records, tweets.records, users.records).to_json();
  write_json(dir / "ingest_report.json", report);
  write_manifest("ingest", {"claims.jsonl", "tweets.jsonl", "users.jsonl", "ingest_report.json"});
}

void Pipeline::fit_topics() {
  const IngestedCorpus c = load_ingested(config_.out_dir / "ingest");
  // unique tweet texts per author, authors in id order
  std::map<std::string, std::vector<std::string>> by_user;
  std::map<std::string, std::set<std::string>> seen;
  for (const auto& t : c.tweets) {
    if (seen[t.user_id].insert(t.text).second) by_user[t.user_id].push_back(t.text);
  }
  std::vector<topics::UserTweets> grouped;
  std::vector<std::string> all_texts;
  for (auto& [user, texts] : by_user) {
    all_texts.insert(all_texts.end(), texts.begin(), texts.end());
    grouped.push_back({user, std::move(texts)});
  }
  const auto vocab = topics::build_vocabulary(all_texts, config_.min_count, config_.stopwords);
  const auto fit = topics::fit_tlda(grouped, vocab, config_.tlda);
  json doc = fit.model.to_json();
  doc.update(stamp());
  const fs::path dir = stage_dir("topics");
  write_json(dir / "tlda.json", doc);
  write_manifest("topics", {"tlda.json"});
}

void Pipeline::features() {
  const IngestedCorpus c = load_ingested(config_.out_dir / "ingest");
  const auto model = topics::TldaModel::from_json(read_json(config_.out_dir / "topics" / "tlda.json", "run `topics` first"));
  std::size_t duplicates = 0;
  const auto tweets = unique_tweets(c.tweets, &duplicates);
  const auto table = social::build_feature_table(tweets, c.users, model, text_config());

  const fs::path dir = stage_dir("features");
  std::ofstream out(dir / "features.csv", std::ios::binary);
  if (!out) throw DataError("cannot write features.csv");
  std::vector<std::string> header{"tweet_id"};
  header.insert(header.end(), table.names.begin(), table.names.end());
  header.push_back("retweet_count");
  csv::write_row(out, header);
  std::vector<std::string> fields;
  for (const auto& row : table.rows) {
    fields.assign({row.tweet_id});
    for (double v : row.features) fields.push_back(social::format_double(v));
    fields.push_back(std::to_string(row.retweet_count));
    csv::write_row(out, fields);
  }
  out.close();
  json report = stamp();
  report["rows"] = table.rows.size();
  report["dropped_missing_author"] = table.dropped;
  report["dropped_duplicate_tweet_id"] = duplicates;
  report["feature_names"] = table.names;
  write_json(dir / "features_report.json", report);
  write_manifest("features", {"features.csv", "features_report.json"});
}

void Pipeline::label() {
  const fs::path features_csv = config_.out_dir / "features" / "features.csv";
  const CsvTable t = read_csv(features_csv, "run `features` first");
  if (t.header.size() < 3 || t.header.front() != "tweet_id" || t.header.back() != "retweet_count") {
    throw DataError("unexpected header in " + features_csv.string());
  }
  const IngestedCorpus c = load_ingested(config_.out_dir / "ingest");
  std::unordered_map<std::string, const corpus::TweetRecord*> by_id;
  for (const auto& tw : c.tweets) by_id.emplace(tw.tweet_id, &tw);

  std::vector<corpus::TweetRecord> tweets;
  for (const auto& row : t.rows) {
    const auto it = by_id.find(row.front());
    if (it == by_id.end()) throw DataError("feature row for unknown tweet '" + row.front() + "'");
    tweets.push_back(*it->second);
  }
  std::vector<social::FollowEdge> edges;
  if (config_.follows_path) edges = social::load_follow_edges(*config_.follows_path);
  const auto labels = social::label_shared(tweets, config_.label, config_.follows_path ? &edges : nullptr);

  const fs::path dir = stage_dir("label");
  {
    std::ofstream out(dir / "labeled.csv", std::ios::binary);
    if (!out) throw DataError("cannot write labeled.csv");
    std::vector<std::string> header(t.header.begin() + 1, t.header.end() - 1);
    header.push_back("label");
    header.push_back("target");
    csv::write_row(out, header);
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
      std::vector<std::string> fields(t.rows[i].begin() + 1, t.rows[i].end() - 1);
      fields.push_back(labels.labels[i] == social::ShareLabel::Shared ? "1" : "0");
      fields.push_back(t.rows[i].back());
      csv::write_row(out, fields);
    }
  }
  std::size_t shared = 0;
  for (auto l : labels.labels) shared += l == social::ShareLabel::Shared;
  json balance = stamp();
  balance["mode"] = social::to_string(config_.label.mode);
  balance["tau"] = labels.tau;
  balance["auto_calibrated"] = labels.calibrated;
  balance["positive_rate"] = labels.positive_rate;
  balance["shared"] = shared;
  balance["not_shared"] = labels.labels.size() - shared;
  write_json(dir / "class_balance.json", balance);
  write_text(dir / "class_balance.csv", "label,count\nshared," + std::to_string(shared) + "\nnot_shared," +
                                            std::to_string(labels.labels.size() - shared) + "\n");

  // average retweets per claim category
  std::unordered_map<std::string, const corpus::NewsClaim*> claims;
  for (const auto& cl : c.claims) claims.emplace(cl.claim_id, &cl);
  std::map<std::pair<std::string, std::string>, std::pair<double, std::size_t>> cells;
  for (const auto& tw : tweets) {
    const auto it = claims.find(tw.claim_id);
    if (it == claims.end()) continue;
    auto& cell = cells[{std::string(corpus::to_string(it->second->category)),
                        std::string(corpus::to_string(it->second->truth_label))}];
    cell.first += static_cast<double>(tw.retweet_count);
    ++cell.second;
  }
  std::ostringstream avg;
  avg << "category,truth_label,tweets,avg_retweet_count\n";
  for (const auto& [key, cell] : cells) {
    avg << key.first << ',' << key.second << ',' << cell.second << ','
        << social::format_double(cell.first / static_cast<double>(cell.second)) << '\n';
  }
  write_text(dir / "avg_retweet_by_category.csv", avg.str());
  write_manifest("label", {"labeled.csv", "class_balance.json", "class_balance.csv", "avg_retweet_by_category.csv"});
}

void Pipeline::train() {
  LabeledData data = read_labeled(config_.out_dir / "label" / "labeled.csv");
  if (config_.models.empty()) throw UsageError("config key 'models' lists no models");
  ml::Dataset for_split = data.features;
  for_split.y = data.label;
  const auto split = ml::train_test_split(for_split, config_.test_fraction, config_.stratified, config_.seed);

  const fs::path dir = stage_dir("models");
  std::vector<std::string> files;
  for (const auto& spec : config_.models) {
    ml::Dataset train_set = data.features.subset(split.train);
    const auto& y = spec.role == ModelRole::Classifier ? data.label : data.target;
    train_set.y.clear();
    for (auto i : split.train) train_set.y.push_back(y[i]);
    const auto model = train_model(spec, train_set, config_.seed);
    json doc = model->to_json();
    doc["name"] = spec.name;
    doc["role"] = spec.role == ModelRole::Classifier ? "classifier" : "regressor";
    doc["feature_names"] = data.features.feature_names;
    doc.update(stamp());
    write_json(dir / (spec.name + ".json"), doc);
    files.push_back(spec.name + ".json");
  }
  json s = stamp();
  s["train"] = split.train;
  s["test"] = split.test;
  write_json(dir / "split.json", s);
  files.push_back("split.json");
  write_manifest("models", files);
}

void Pipeline::evaluate() {
  const fs::path model_dir = config_.out_dir / "models";
  std::vector<std::pair<const ModelSpec*, ml::ModelPtr>> models;
  for (const auto& spec : config_.models) {
    const fs::path p = model_dir / (spec.name + ".json");
    if (!fs::exists(p)) continue;
    models.emplace_back(&spec, ml::load_model(read_json(p, "model")));
  }
  if (models.empty()) throw DataError("no trained models found in " + model_dir.string() + " (run `train` first)");
  if (models.size() != config_.models.size()) throw DataError("some roster models are not trained; rerun `train`");

  const LabeledData data = read_labeled(config_.out_dir / "label" / "labeled.csv");
  const json split = read_json(model_dir / "split.json", "run `train` first");
  const auto test = split.at("test").get<std::vector<std::size_t>>();
  for (auto i : test) {
    if (i >= data.features.size()) throw DataError("split.json does not match labeled.csv; rerun `train`");
  }
  const ml::Matrix X = data.features.X.select_rows(test);
  std::vector<double> y_label, y_target;
  for (auto i : test) {
    y_label.push_back(data.label[i]);
    y_target.push_back(data.target[i]);
  }

  const fs::path dir = stage_dir("evaluate");
  std::vector<std::string> files{"metrics.json", "classifier_comparison.csv"};
  json metrics = stamp();
  metrics["positive_class"] = "1 = shared";
  metrics["f1"] = "positive-class F1";
  metrics["n_test"] = test.size();
  metrics["classifiers"] = json::object();
  metrics["regressors"] = json::object();
  std::ostringstream comparison;
  comparison << "model,accuracy,precision,recall,auroc,f1\n";
  for (const auto& [spec, model] : models) {
    if (model->num_features() != X.cols()) throw DataError("model '" + spec->name + "' width does not match features");
    if (spec->role == ModelRole::Classifier) {
      const auto proba = model->predict_proba(X);
      const auto pred = model->predict(X);
      const auto cm = eval::confusion(y_label, pred);
      const auto m = eval::classification_metrics(cm);
      json entry = {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
                    {"f1", m.f1},             {"confusion", cm.to_json()}};
      double auroc = 0.0;
      try {
        const auto roc = eval::roc_auroc(y_label, proba);
        auroc = roc.auroc;
        entry["auroc"] = auroc;
        std::ostringstream csv_out;
        roc.write_csv(csv_out);
        write_text(dir / ("roc_" + spec->name + ".csv"), csv_out.str());
        files.push_back("roc_" + spec->name + ".csv");
      } catch (const UsageError&) {
        entry["auroc"] = nullptr;  // single-class test split
      }
      metrics["classifiers"][spec->name] = entry;
      comparison << spec->name << ',' << social::format_double(m.accuracy) << ',' << social::format_double(m.precision)
                 << ',' << social::format_double(m.recall) << ',' << social::format_double(auroc) << ','
                 << social::format_double(m.f1) << '\n';
    } else {
      const auto pred = model->predict(X);
      const auto m = eval::regression_metrics(y_target, pred);
      metrics["regressors"][spec->name] = {{"rmse", m.rmse}, {"r2", m.r2}};
      std::ostringstream pts;
      pts << "actual,predicted\n";
      for (std::size_t i = 0; i < pred.size(); ++i) {
        pts << social::format_double(y_target[i]) << ',' << social::format_double(pred[i]) << '\n';
      }
      write_text(dir / ("regression_" + spec->name + ".csv"), pts.str());
      files.push_back("regression_" + spec->name + ".csv");
    }
  }
  write_json(dir / "metrics.json", metrics);
  write_text(dir / "classifier_comparison.csv", comparison.str());
  write_manifest("evaluate", files);
}

json Pipeline::predict_spread(const json& request) {
  if (!request.is_object()) throw UsageError("spread request must be a JSON object");
  for (const auto& [k, _] : request.items()) {
    static const std::set<std::string> kKeys{"sender", "text", "recipients", "like_count", "mode", "model"};
    if (!kKeys.count(k)) throw UsageError("unknown spread request key '" + k + "'");
  }
  if (!request.contains("sender") || !request.at("sender").is_string()) throw UsageError("spread request needs 'sender'");
  if (!request.contains("text") || !request.at("text").is_string()) throw UsageError("spread request needs 'text'");
  const std::string sender_id = request.at("sender").get<std::string>();
  const std::string mode_name = request.value("mode", config_.spread_mode);
  const social::SpreadMode mode = social::spread_mode_from_string(mode_name);

  const IngestedCorpus c = load_ingested(config_.out_dir / "ingest");
  const auto topics_model =
      topics::TldaModel::from_json(read_json(config_.out_dir / "topics" / "tlda.json", "run `topics` first"));
  std::unordered_map<std::string, const corpus::UserProfile*> users;
  for (const auto& u : c.users) users.emplace(u.user_id, &u);
  const int T = topics_model.num_topics();
  const std::vector<double> uniform(static_cast<std::size_t>(T), 1.0 / T);
  const auto theta_of = [&](const std::string& id) {
    return topics_model.has_user(id) ? topics_model.user_topic_distribution(id) : uniform;
  };

  const auto sender = users.find(sender_id);
  if (sender == users.end()) throw DataError("unknown sender '" + sender_id + "'");
  social::SpreadRequest req;
  req.sender = *sender->second;
  req.sender_theta = theta_of(sender_id);
  req.tweet_text = request.at("text").get<std::string>();
  req.like_count = request.value("like_count", std::int64_t{0});
  if (req.like_count < 0) throw UsageError("spread request 'like_count' must be >= 0");

  std::vector<std::string> recipient_ids;
  if (request.contains("recipients")) {
    recipient_ids = request.at("recipients").get<std::vector<std::string>>();
  } else {
    if (!config_.follows_path) throw UsageError("spread request without 'recipients' needs inputs.follows");
    std::set<std::string> followers;
    for (const auto& e : social::load_follow_edges(*config_.follows_path)) {
      if (e.followee_id == sender_id) followers.insert(e.follower_id);
    }
    recipient_ids.assign(followers.begin(), followers.end());
  }
  for (const auto& id : recipient_ids) {
    const auto it = users.find(id);
    if (it == users.end()) throw DataError("unknown recipient '" + id + "'");
    req.recipients.push_back({*it->second, theta_of(id)});
  }

  ml::ModelPtr model;
  std::string model_name;
  if (mode != social::SpreadMode::Affinity) {
    model_name = request.value("model", mode == social::SpreadMode::Regressor ? config_.spread_regressor
                                                                              : config_.spread_model);
    const fs::path p = config_.out_dir / "models" / (model_name + ".json");
    if (!fs::exists(p)) throw DataError("no trained model '" + model_name + "' (run `train` first)");
    model = ml::load_model(read_json(p, "model"));
  }
  const auto est = social::predict_spread(model.get(), mode, req, topics_model, text_config(), config_.tff_norm);
  json out = est.to_json();
  out["sender"] = sender_id;
  out["model"] = model_name.empty() ? json(nullptr) : json(model_name);
  out["tweet_topic_posterior"] = topics_model.infer_tweet_topic(req.tweet_text);
  out.update(stamp());
  fs::create_directories(config_.out_dir);
  write_json(config_.out_dir / "spread.json", out);
  return out;
}

}  // namespace fakespread::pipeline
