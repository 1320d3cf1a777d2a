#include "fakespread/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <unordered_map>

#include "fakespread/csv.hpp"
#include "fakespread/error.hpp"

namespace fakespread::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(TruthLabel label) { return label == TruthLabel::True ? "True" : "Fake"; }
std::string_view to_string(Category category) { return category == Category::Covid ? "Covid" : "NonCovid"; }

// ---------------------------------------------------------------------------
// Timestamps

namespace {

// Days since 1970-01-01 for a proleptic Gregorian date (H. Hinnant's algorithm).
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y += m <= 2;
}

bool is_leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(std::int64_t y, unsigned m) {
  static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  return m == 2 && is_leap(y) ? 29 : kDays[m - 1];
}

class Scanner {
 public:
  explicit Scanner(std::string_view s) : s_(s) {}
  bool done() const { return pos_ >= s_.size(); }
  char peek() const { return done() ? '\0' : s_[pos_]; }
  bool accept(char c) {
    if (peek() != c) return false;
    ++pos_;
    return true;
  }
  bool digits(std::size_t n, int& out) {
    if (pos_ + n > s_.size()) return false;
    out = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const char c = s_[pos_ + i];
      if (c < '0' || c > '9') return false;
      out = out * 10 + (c - '0');
    }
    pos_ += n;
    return true;
  }
  std::string_view word() {
    const std::size_t start = pos_;
    while (!done() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }
  void skip_spaces() {
    while (!done() && s_[pos_] == ' ') ++pos_;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Parses "Z", "+hh:mm", "+hhmm", "-hh" at the scanner; returns offset seconds.
bool parse_zone(Scanner& sc, std::int64_t& offset) {
  offset = 0;
  if (sc.done()) return true;
  if (sc.accept('Z') || sc.accept('z')) return sc.done();
  const char sign = sc.peek();
  if (sign != '+' && sign != '-') return false;
  sc.accept(sign);
  int hh = 0, mm = 0;
  if (!sc.digits(2, hh)) return false;
  sc.accept(':');
  if (!sc.done() && !sc.digits(2, mm)) return false;
  if (!sc.done() || hh > 23 || mm > 59) return false;
  offset = (sign == '+' ? 1 : -1) * (hh * 3600 + mm * 60);
  return true;
}

std::optional<Timestamp> make_timestamp(int year, int month, int day, int hh, int mi, int ss, std::int64_t offset) {
  if (month < 1 || month > 12 || day < 1) return std::nullopt;
  if (static_cast<unsigned>(day) > days_in_month(year, static_cast<unsigned>(month))) return std::nullopt;
  if (hh > 23 || mi > 59 || ss > 60) return std::nullopt;
  const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
  return Timestamp{days * 86400 + hh * 3600 + mi * 60 + ss - offset};
}

std::optional<Timestamp> parse_iso(std::string_view text) {
  Scanner sc(text);
  int year = 0, month = 0, day = 0, hh = 0, mi = 0, ss = 0;
  if (!sc.digits(4, year) || !sc.accept('-') || !sc.digits(2, month) || !sc.accept('-') || !sc.digits(2, day)) {
    return std::nullopt;
  }
  std::int64_t offset = 0;
  if (!sc.done()) {
    if (!sc.accept('T') && !sc.accept('t') && !sc.accept(' ')) return std::nullopt;
    if (!sc.digits(2, hh) || !sc.accept(':') || !sc.digits(2, mi)) return std::nullopt;
    if (sc.accept(':') && !sc.digits(2, ss)) return std::nullopt;
    if (sc.accept('.')) {
      int digit = 0;
      if (!sc.digits(1, digit)) return std::nullopt;
      while (sc.digits(1, digit)) {
      }
    }
    sc.skip_spaces();
    if (!parse_zone(sc, offset)) return std::nullopt;
  }
  return make_timestamp(year, month, day, hh, mi, ss, offset);
}

// "Wed Oct 10 20:19:24 +0000 2018"
std::optional<Timestamp> parse_twitter(std::string_view text) {
  static constexpr std::string_view kMonths[] = {"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                 "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};
  Scanner sc(text);
  if (sc.word().size() != 3 || !sc.accept(' ')) return std::nullopt;
  const std::string_view mon = sc.word();
  const auto it = std::find(std::begin(kMonths), std::end(kMonths), mon);
  if (it == std::end(kMonths) || !sc.accept(' ')) return std::nullopt;
  int day = 0, hh = 0, mi = 0, ss = 0, year = 0, tz_h = 0, tz_m = 0;
  if (!sc.digits(2, day) || !sc.accept(' ') || !sc.digits(2, hh) || !sc.accept(':') || !sc.digits(2, mi) ||
      !sc.accept(':') || !sc.digits(2, ss) || !sc.accept(' ')) {
    return std::nullopt;
  }
  const char sign = sc.peek();
  if ((sign != '+' && sign != '-') || !sc.accept(sign) || !sc.digits(2, tz_h) || !sc.digits(2, tz_m) ||
      !sc.accept(' ') || !sc.digits(4, year) || !sc.done()) {
    return std::nullopt;
  }
  const std::int64_t offset = (sign == '+' ? 1 : -1) * (tz_h * 3600 + tz_m * 60);
  return make_timestamp(year, static_cast<int>(it - std::begin(kMonths)) + 1, day, hh, mi, ss, offset);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

std::optional<Timestamp> parse_timestamp(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::nullopt;
  if (std::all_of(text.begin(), text.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size()) return std::nullopt;
    // a 4-2-2 date without separators is not accepted; bare digits are epoch seconds
    return Timestamp{v};
  }
  if (auto ts = parse_iso(text)) return ts;
  return parse_twitter(text);
}

std::string format_timestamp(Timestamp ts) {
  std::int64_t days = ts.seconds / 86400;
  std::int64_t rem = ts.seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y = 0;
  unsigned m = 0, d = 0;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ", static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// ---------------------------------------------------------------------------
// Mappings

std::string SegmentMapping::column_for(const std::string& field) const {
  const auto it = columns.find(field);
  return it == columns.end() ? field : it->second;
}

ColumnMapping ColumnMapping::canonical() { return ColumnMapping{}; }

ColumnMapping ColumnMapping::fibvid_default() {
  ColumnMapping m;
  m.claims.columns = {{"claim_id", "news_id"}, {"text", "claim"}, {"truth_label", "label"}, {"category", "topic"}};
  m.claims.values["truth_label"] = {{"0", "True"}, {"1", "Fake"}};
  m.claims.values["category"] = {{"covid", "Covid"}, {"non_covid", "NonCovid"}, {"noncovid", "NonCovid"}};
  m.propagation.columns = {{"tweet_id", "tweet_id"},         {"claim_id", "news_id"},
                           {"user_id", "user_id"},           {"text", "text"},
                           {"retweet_count", "retweet_count"}, {"like_count", "like_count"},
                           {"hashtags", "hashtags"},         {"created_at", "created_at"}};
  m.users.columns = {{"user_id", "user_id"},
                     {"description", "description"},
                     {"follower_count", "followers_count"},
                     {"following_count", "friends_count"},
                     {"created_at", "created_at"}};
  return m;
}

ColumnMapping ColumnMapping::from_json(const json& doc, ColumnMapping base) {
  if (!doc.is_object()) throw UsageError("column mapping must be a JSON object");
  const auto overlay = [&](const char* key, SegmentMapping& seg) {
    if (!doc.contains(key)) return;
    const json& s = doc.at(key);
    if (!s.is_object()) throw UsageError(std::string("mapping.") + key + " must be an object");
    if (s.contains("columns")) {
      for (const auto& [field, col] : s.at("columns").items()) {
        if (!col.is_string()) throw UsageError(std::string("mapping.") + key + ".columns." + field + " must be a string");
        seg.columns[field] = col.get<std::string>();
      }
    }
    if (s.contains("values")) {
      for (const auto& [field, table] : s.at("values").items()) {
        auto& dst = seg.values[field];
        dst.clear();
        for (const auto& [raw, canon] : table.items()) dst[raw] = canon.get<std::string>();
      }
    }
    if (s.contains("hashtag_separator")) seg.hashtag_separator = s.at("hashtag_separator").get<std::string>();
  };
  overlay("claims", base.claims);
  overlay("propagation", base.propagation);
  overlay("users", base.users);
  return base;
}

// ---------------------------------------------------------------------------
// Row sources

namespace {

struct Row {
  std::size_t index = 0;
  std::optional<json> fields;  // nullopt: structurally unparsable
};

bool is_jsonl(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".jsonl" || ext == ".ndjson" || ext == ".json";
}

struct Table {
  std::vector<std::string> header;  // known column names
  std::vector<Row> rows;
};

Table read_table(const fs::path& path) {
  if (!fs::exists(path)) throw FileNotFound("file not found: " + path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("cannot open: " + path.string());
  Table table;
  if (is_jsonl(path)) {
    std::string line;
    std::size_t index = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      Row row{++index, std::nullopt};
      json j = json::parse(line, nullptr, false);
      if (!j.is_discarded() && j.is_object()) {
        if (!have_header) {
          for (const auto& [k, _] : j.items()) table.header.push_back(k);
          have_header = true;
        }
        row.fields = std::move(j);
      }
      table.rows.push_back(std::move(row));
    }
    return table;
  }

  csv::Reader reader(in);
  auto header = reader.next();
  if (!header) throw UnparsableHeader("empty file, no header row: " + path.string());
  if (!header->empty() && header->front().rfind("\xEF\xBB\xBF", 0) == 0) header->front().erase(0, 3);
  table.header = *header;
  std::size_t index = 0;
  while (auto rec = reader.next()) {
    if (rec->size() == 1 && trim(rec->front()).empty()) continue;  // blank line
    Row row{++index, std::nullopt};
    if (rec->size() == table.header.size() && !reader.unterminated()) {
      json obj = json::object();
      for (std::size_t i = 0; i < rec->size(); ++i) obj[table.header[i]] = (*rec)[i];
      row.fields = std::move(obj);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct FieldSpec {
  const char* name;
  bool required;
};

// Resolves field -> column and fails on required columns missing from the header.
std::map<std::string, std::string> resolve_columns(const Table& table, const SegmentMapping& mapping,
                                                   std::initializer_list<FieldSpec> fields, const fs::path& path) {
  std::map<std::string, std::string> resolved;
  for (const auto& f : fields) {
    const std::string col = mapping.column_for(f.name);
    const bool present = std::find(table.header.begin(), table.header.end(), col) != table.header.end();
    if (present) {
      resolved[f.name] = col;
    } else if (f.required && !table.rows.empty()) {
      throw UnparsableHeader("column '" + col + "' for field '" + f.name + "' not found in " + path.string());
    }
  }
  return resolved;
}

class RowReader {
 public:
  RowReader(const json& obj, const std::map<std::string, std::string>& columns) : obj_(obj), columns_(columns) {}

  bool has(const std::string& field) const { return columns_.count(field) && obj_.contains(columns_.at(field)); }

  const json* raw(const std::string& field) const {
    if (!has(field)) return nullptr;
    return &obj_.at(columns_.at(field));
  }

  std::string str(const std::string& field) const {
    const json* v = raw(field);
    if (!v || v->is_null()) return {};
    if (v->is_string()) return v->get<std::string>();
    return v->dump();
  }

 private:
  const json& obj_;
  const std::map<std::string, std::string>& columns_;
};

struct RowError {
  std::string reason;
};

std::int64_t parse_count(const RowReader& r, const std::string& field) {
  const json* v = r.raw(field);
  if (!v || v->is_null()) throw RowError{field + " missing"};
  if (v->is_number_integer()) {
    const auto n = v->get<std::int64_t>();
    if (n < 0) throw RowError{field + " negative"};
    return n;
  }
  std::string text = v->is_string() ? v->get<std::string>() : v->dump();
  const std::string_view t = trim(text);
  if (t.empty()) throw RowError{field + " missing"};
  std::int64_t n = 0;
  const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
  if (ec == std::errc() && p == t.data() + t.size()) {
    if (n < 0) throw RowError{field + " negative"};
    return n;
  }
  // integral floats such as "12.0" from dataframe exports
  double d = 0;
  const auto [pd, ecd] = std::from_chars(t.data(), t.data() + t.size(), d);
  if (ecd == std::errc() && pd == t.data() + t.size() && std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) {
    if (d < 0) throw RowError{field + " negative"};
    return static_cast<std::int64_t>(d);
  }
  throw RowError{field + " not an integer: '" + std::string(t) + "'"};
}

std::string required_text(const RowReader& r, const std::string& field) {
  std::string s = r.str(field);
  if (trim(s).empty()) throw RowError{field + " empty"};
  return s;
}

std::string canonical_value(const SegmentMapping& mapping, const std::string& field, const std::string& raw) {
  const auto table = mapping.values.find(field);
  if (table != mapping.values.end()) {
    const auto hit = table->second.find(std::string(trim(raw)));
    if (hit != table->second.end()) return hit->second;
  }
  std::string s(trim(raw));
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

TruthLabel parse_truth(const SegmentMapping& mapping, const RowReader& r) {
  const std::string v = canonical_value(mapping, "truth_label", r.str("truth_label"));
  if (iequals(v, "true")) return TruthLabel::True;
  if (iequals(v, "fake")) return TruthLabel::Fake;
  throw RowError{"truth_label unrecognised: '" + r.str("truth_label") + "'"};
}

Category parse_category(const SegmentMapping& mapping, const RowReader& r) {
  const std::string v = canonical_value(mapping, "category", r.str("category"));
  if (iequals(v, "covid")) return Category::Covid;
  if (iequals(v, "noncovid")) return Category::NonCovid;
  throw RowError{"category unrecognised: '" + r.str("category") + "'"};
}

Timestamp parse_created(const RowReader& r) {
  if (!r.has("created_at")) return {};
  const json* v = r.raw("created_at");
  if (v->is_number_integer()) return Timestamp{v->get<std::int64_t>()};
  const std::string s = r.str("created_at");
  if (trim(s).empty()) return {};
  const auto ts = parse_timestamp(s);
  if (!ts) throw RowError{"created_at unparsable: '" + s + "'"};
  return *ts;
}

std::vector<std::string> parse_hashtags(const SegmentMapping& mapping, const RowReader& r) {
  std::vector<std::string> tags;
  const json* v = r.raw("hashtags");
  if (!v || v->is_null()) return tags;
  if (v->is_array()) {
    for (const auto& t : *v) tags.push_back(t.is_string() ? t.get<std::string>() : t.dump());
    return tags;
  }
  const std::string s = r.str("hashtags");
  std::string_view rest = s;
  const std::string& sep = mapping.hashtag_separator;
  while (!rest.empty()) {
    const std::size_t pos = sep.empty() ? std::string_view::npos : rest.find(sep);
    const std::string_view piece = trim(rest.substr(0, pos));
    if (!piece.empty()) tags.emplace_back(piece);
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + sep.size());
  }
  return tags;
}

template <typename Record>
LoadResult<Record> load_segment(const fs::path& path, const SegmentMapping& mapping,
                                std::initializer_list<FieldSpec> fields,
                                const std::function<Record(const RowReader&)>& parse,
                                const std::function<std::optional<std::string>(const Record&)>& admit) {
  const Table table = read_table(path);
  const auto columns = resolve_columns(table, mapping, fields, path);
  LoadResult<Record> result;
  result.report.file = path.string();
  result.report.rows = table.rows.size();
  for (const Row& row : table.rows) {
    if (!row.fields) {
      ++result.report.errored;
      continue;
    }
    try {
      Record rec = parse(RowReader(*row.fields, columns));
      if (auto reason = admit(rec)) {
        ++result.report.quarantined;
        result.report.quarantine.push_back({row.index, *reason});
        continue;
      }
      result.records.push_back(std::move(rec));
      ++result.report.accepted;
    } catch (const RowError& e) {
      ++result.report.quarantined;
      ++result.report.malformed;
      result.report.quarantine.push_back({row.index, e.reason});
    }
  }
  return result;
}

}  // namespace

json IngestReport::to_json() const {
  json q = json::array();
  for (const auto& row : quarantine) q.push_back({{"row", row.row}, {"reason", row.reason}});
  return {{"file", file},
          {"rows", rows},
          {"accepted", accepted},
          {"quarantined", quarantined},
          {"errored", errored},
          {"malformed", malformed},
          {"quarantine", q}};
}

LoadResult<NewsClaim> load_claims(const fs::path& path, const SegmentMapping& mapping) {
  auto result = load_segment<NewsClaim>(
      path, mapping, {{"claim_id", true}, {"text", true}, {"truth_label", true}, {"category", true}},
      [&](const RowReader& r) {
        NewsClaim c;
        c.claim_id = required_text(r, "claim_id");
        c.text = required_text(r, "text");
        c.truth_label = parse_truth(mapping, r);
        c.category = parse_category(mapping, r);
        return c;
      },
      [](const NewsClaim&) { return std::optional<std::string>{}; });
  std::set<std::string> seen;
  for (const auto& c : result.records) {
    if (!seen.insert(c.claim_id).second) throw DuplicateId("duplicate claim_id '" + c.claim_id + "' in " + path.string());
  }
  return result;
}

LoadResult<TweetRecord> load_propagation(const fs::path& path, const SegmentMapping& mapping,
                                         const std::set<std::string>& known_claims) {
  return load_segment<TweetRecord>(
      path, mapping,
      {{"tweet_id", true},
       {"claim_id", true},
       {"user_id", true},
       {"text", true},
       {"retweet_count", true},
       {"like_count", true},
       {"hashtags", false},
       {"created_at", false}},
      [&](const RowReader& r) {
        TweetRecord t;
        t.tweet_id = required_text(r, "tweet_id");
        t.claim_id = required_text(r, "claim_id");
        t.user_id = required_text(r, "user_id");
        t.text = required_text(r, "text");
        t.retweet_count = parse_count(r, "retweet_count");
        t.like_count = parse_count(r, "like_count");
        t.hashtags = parse_hashtags(mapping, r);
        t.created_at = parse_created(r);
        return t;
      },
      [&](const TweetRecord& t) -> std::optional<std::string> {
        if (!known_claims.count(t.claim_id)) return "unknown claim_id '" + t.claim_id + "'";
        return std::nullopt;
      });
}

LoadResult<UserProfile> load_users(const fs::path& path, const SegmentMapping& mapping) {
  auto result = load_segment<UserProfile>(
      path, mapping,
      {{"user_id", true}, {"description", false}, {"follower_count", true}, {"following_count", true},
       {"created_at", false}},
      [&](const RowReader& r) {
        UserProfile u;
        u.user_id = required_text(r, "user_id");
        u.description = r.str("description");
        u.follower_count = parse_count(r, "follower_count");
        u.following_count = parse_count(r, "following_count");
        u.created_at = parse_created(r);
        return u;
      },
      [](const UserProfile&) { return std::optional<std::string>{}; });
  std::set<std::string> seen;
  for (const auto& u : result.records) {
    if (!seen.insert(u.user_id).second) throw DuplicateId("duplicate user_id '" + u.user_id + "' in " + path.string());
  }
  return result;
}

// ---------------------------------------------------------------------------
// Summary

CorpusSummary dataset_summary(const std::vector<NewsClaim>& claims, const std::vector<TweetRecord>& tweets,
                              const std::vector<UserProfile>& users) {
  CorpusSummary s;
  std::unordered_map<std::string, const NewsClaim*> by_id;
  for (const auto& c : claims) {
    by_id[c.claim_id] = &c;
    ++s.n_claims_by[static_cast<int>(c.category)][static_cast<int>(c.truth_label)];
  }
  std::set<std::string> authors;
  for (const auto& t : tweets) {
    authors.insert(t.user_id);
    const auto it = by_id.find(t.claim_id);
    if (it == by_id.end()) continue;
    ++s.n_tweets_by[static_cast<int>(it->second->category)][static_cast<int>(it->second->truth_label)];
  }
  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l < 2; ++l) {
      s.avg_tweets_per_claim_by[c][l] =
          s.n_claims_by[c][l] ? static_cast<double>(s.n_tweets_by[c][l]) / static_cast<double>(s.n_claims_by[c][l]) : 0.0;
    }
  }
  s.n_claims = claims.size();
  s.n_tweets = tweets.size();
  s.n_users = users.size();
  s.n_tweet_authors = authors.size();
  return s;
}

json CorpusSummary::to_json() const {
  json cells = json::object();
  for (int c = 0; c < 2; ++c) {
    for (int l = 0; l < 2; ++l) {
      const std::string key =
          std::string(to_string(static_cast<Category>(c))) + "_" + std::string(to_string(static_cast<TruthLabel>(l)));
      cells[key] = {{"claims", n_claims_by[c][l]},
                    {"tweets", n_tweets_by[c][l]},
                    {"avg_tweets_per_claim", avg_tweets_per_claim_by[c][l]}};
    }
  }
  return {{"n_claims", n_claims},
          {"n_claims_covid", n_claims_by[0][0] + n_claims_by[0][1]},
          {"n_claims_noncovid", n_claims_by[1][0] + n_claims_by[1][1]},
          {"n_tweets", n_tweets},
          {"n_users", n_users},
          {"n_tweet_authors", n_tweet_authors},
          {"cells", cells}};
}

// ---------------------------------------------------------------------------
// Canonical dump

json to_json(const NewsClaim& c) {
  return {{"claim_id", c.claim_id},
          {"text", c.text},
          {"truth_label", to_string(c.truth_label)},
          {"category", to_string(c.category)}};
}

json to_json(const TweetRecord& t) {
  return {{"tweet_id", t.tweet_id},
          {"claim_id", t.claim_id},
          {"user_id", t.user_id},
          {"text", t.text},
          {"retweet_count", t.retweet_count},
          {"like_count", t.like_count},
          {"hashtags", t.hashtags},
          {"created_at", format_timestamp(t.created_at)}};
}

json to_json(const UserProfile& u) {
  return {{"user_id", u.user_id},
          {"description", u.description},
          {"follower_count", u.follower_count},
          {"following_count", u.following_count},
          {"created_at", format_timestamp(u.created_at)}};
}

template <typename Record>
void write_jsonl(const fs::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

template void write_jsonl(const fs::path&, const std::vector<NewsClaim>&);
template void write_jsonl(const fs::path&, const std::vector<TweetRecord>&);
template void write_jsonl(const fs::path&, const std::vector<UserProfile>&);

}  // namespace fakespread::corpus
