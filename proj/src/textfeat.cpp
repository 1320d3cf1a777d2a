#include "fakespread/textfeat.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_set>

#include "fakespread/error.hpp"

namespace fakespread::textfeat {

std::string_view to_string(ComplexityCategory c) {
  switch (c) {
    case ComplexityCategory::Simple: return "simple";
    case ComplexityCategory::Medium: return "medium";
    case ComplexityCategory::Complex: return "complex";
  }
  return "";
}

std::string_view to_string(SentimentCategory c) {
  switch (c) {
    case SentimentCategory::Positive: return "positive";
    case SentimentCategory::Negative: return "negative";
    case SentimentCategory::Neutral: return "neutral";
  }
  return "";
}

std::string_view to_string(StyleCategory c) { return c == StyleCategory::Stylic ? "stylic" : "non_stylic"; }

namespace {

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }

// Length of the UTF-8 sequence starting at s[i] and its code point.
std::size_t decode_utf8(std::string_view s, std::size_t i, char32_t& cp) {
  const auto b = static_cast<unsigned char>(s[i]);
  std::size_t len = b < 0x80 ? 1 : (b >> 5) == 0x6 ? 2 : (b >> 4) == 0xE ? 3 : (b >> 3) == 0x1E ? 4 : 1;
  if (i + len > s.size()) len = 1;
  if (len == 1) {
    cp = b;
    return 1;
  }
  cp = b & (0xFF >> (len + 1));
  for (std::size_t k = 1; k < len; ++k) {
    const auto c = static_cast<unsigned char>(s[i + k]);
    if ((c & 0xC0) != 0x80) {
      cp = b;
      return 1;
    }
    cp = (cp << 6) | (c & 0x3F);
  }
  return len;
}

bool is_apostrophe(char32_t cp) { return cp == '\'' || cp == 0x2019; }

// Non-ASCII code points count as word characters unless they are in a
// punctuation, symbol or emoji block.
bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_alnum(static_cast<unsigned char>(cp));
  if (cp >= 0x80 && cp <= 0xBF) return false;
  if (cp == 0xD7 || cp == 0xF7) return false;
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;
  if (cp >= 0x3000 && cp <= 0x303F) return false;
  if (cp >= 0xFE00 && cp <= 0xFE0F) return false;
  if (cp >= 0x1F000) return false;
  return true;
}

bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
  if (i + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    char c = s[i + k];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != prefix[k]) return false;
  }
  return true;
}

// Replaces URLs and @mentions with spaces and drops '#' markers. Trailing
// punctuation after a URL is kept so sentence boundaries survive.
std::string strip_markup(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const bool at_boundary = i == 0 || is_space(static_cast<unsigned char>(text[i - 1])) || text[i - 1] == '(';
    if (at_boundary && (starts_with_ci(text, i, "http://") || starts_with_ci(text, i, "https://") ||
                        starts_with_ci(text, i, "www."))) {
      std::size_t end = i;
      while (end < text.size() && !is_space(static_cast<unsigned char>(text[end]))) ++end;
      std::size_t keep = end;
      while (keep > i && std::string_view(".,!?;:)\"'").find(text[keep - 1]) != std::string_view::npos) --keep;
      out.push_back(' ');
      out.append(text.substr(keep, end - keep));
      i = end;
      continue;
    }
    if (text[i] == '@' && i + 1 < text.size() &&
        (is_ascii_alnum(static_cast<unsigned char>(text[i + 1])) || text[i + 1] == '_')) {
      std::size_t end = i + 1;
      while (end < text.size() && (is_ascii_alnum(static_cast<unsigned char>(text[end])) || text[end] == '_')) ++end;
      out.push_back(' ');
      i = end;
      continue;
    }
    if (text[i] == '#') {
      out.push_back(' ');
      ++i;
      continue;
    }
    out.push_back(text[i]);
    ++i;
  }
  return out;
}

void append_lower(std::string& dst, std::string_view src) {
  for (char c : src) dst.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
}

std::vector<std::string> extract_words(std::string_view s) {
  std::vector<std::string> words;
  std::string current;
  const auto flush = [&] {
    // apostrophes only count inside a word
    std::size_t b = 0, e = current.size();
    while (b < e && current[b] == '\'') ++b;
    while (e > b && current[e - 1] == '\'') --e;
    if (b < e) words.push_back(current.substr(b, e - b));
    current.clear();
  };
  for (std::size_t i = 0; i < s.size();) {
    char32_t cp = 0;
    const std::size_t len = decode_utf8(s, i, cp);
    if (is_apostrophe(cp)) {
      current.push_back('\'');
    } else if (is_word_cp(cp)) {
      append_lower(current, s.substr(i, len));
    } else {
      flush();
    }
    i += len;
  }
  flush();
  return words;
}

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_space(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && is_space(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Tokens tokenize(std::string_view text) {
  Tokens tokens;
  const std::string clean = strip_markup(text);
  tokens.words = extract_words(clean);

  std::size_t start = 0;
  const auto emit = [&](std::size_t end) {
    std::string piece = trim_copy(std::string_view(clean).substr(start, end - start));
    if (!extract_words(piece).empty()) tokens.sentences.push_back(std::move(piece));
    start = end;
  };
  for (std::size_t i = 0; i < clean.size(); ++i) {
    if (!is_terminal(clean[i])) continue;
    std::size_t j = i;
    while (j + 1 < clean.size() && is_terminal(clean[j + 1])) ++j;
    if (j + 1 == clean.size() || is_space(static_cast<unsigned char>(clean[j + 1]))) emit(j + 1);
    i = j;
  }
  if (start < clean.size()) emit(clean.size());
  return tokens;
}

int count_syllables(std::string_view word) {
  if (word.empty()) throw UsageError("count_syllables: empty word");
  const auto vowel = [&](std::size_t i) { return std::string_view("aeiouy").find(word[i]) != std::string_view::npos; };
  int groups = 0;
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (vowel(i) && (i == 0 || !vowel(i - 1))) ++groups;
  }
  const std::size_t n = word.size();
  // silent trailing 'e' ("make"), but consonant + "le" keeps its syllable ("table")
  if (groups > 1 && word[n - 1] == 'e' && n >= 2 && !vowel(n - 2)) {
    const bool consonant_le = n >= 3 && word[n - 2] == 'l' && !vowel(n - 3);
    if (!consonant_le) --groups;
  }
  return std::max(groups, 1);
}

double smog_index(const Tokens& tokens) {
  if (tokens.sentences.empty()) return 0.0;
  std::size_t poly = 0;
  for (const auto& w : tokens.words) {
    if (count_syllables(w) >= 3) ++poly;
  }
  return 1.0430 * std::sqrt(static_cast<double>(poly) * 30.0 / static_cast<double>(tokens.sentences.size())) + 3.1291;
}

double smog_index(std::string_view text) { return smog_index(tokenize(text)); }

double lexical_diversity(const std::vector<std::string>& words) {
  if (words.empty()) return 0.0;
  const std::unordered_set<std::string> unique(words.begin(), words.end());
  return static_cast<double>(unique.size()) / static_cast<double>(words.size());
}

double avg_word_length(const std::vector<std::string>& words) {
  if (words.empty()) return 0.0;
  std::size_t chars = 0;
  for (const auto& w : words) {
    // code points, not bytes
    for (unsigned char c : w) chars += (c & 0xC0) != 0x80;
  }
  return static_cast<double>(chars) / static_cast<double>(words.size());
}

ComplexityCategory complexity_category(double smog, const ComplexityThresholds& t) {
  if (smog < t.medium_from) return ComplexityCategory::Simple;
  if (smog <= t.complex_above) return ComplexityCategory::Medium;
  return ComplexityCategory::Complex;
}

ComplexityFeatures complexity(std::string_view text, const ComplexityThresholds& thresholds) {
  const Tokens tokens = tokenize(text);
  ComplexityFeatures f;
  f.smog = smog_index(tokens);
  f.lexical_diversity = lexical_diversity(tokens.words);
  f.avg_word_length = avg_word_length(tokens.words);
  f.category = complexity_category(f.smog, thresholds);
  return f;
}

void Lexicon::add(std::string word, LexiconEntry entry) {
  if (!(entry.polarity >= -1.0 && entry.polarity <= 1.0)) throw UsageError("lexicon polarity out of [-1,1] for '" + word + "'");
  if (!(entry.subjectivity >= 0.0 && entry.subjectivity <= 1.0)) {
    throw UsageError("lexicon subjectivity out of [0,1] for '" + word + "'");
  }
  entries_[std::move(word)] = entry;
}

const LexiconEntry* Lexicon::find(const std::string& word) const {
  const auto it = entries_.find(word);
  return it == entries_.end() ? nullptr : &it->second;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon " + path.string());
  Lexicon lex;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto t1 = line.find('\t');
    const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (t2 == std::string::npos) throw DataError("lexicon line needs 3 tab-separated fields at " + where);
    LexiconEntry e;
    const std::string pol = line.substr(t1 + 1, t2 - t1 - 1);
    const std::string sub = line.substr(t2 + 1);
    try {
      std::size_t used = 0;
      e.polarity = std::stod(pol, &used);
      if (used != pol.size()) throw std::invalid_argument(pol);
      e.subjectivity = std::stod(sub, &used);
      if (used != sub.size()) throw std::invalid_argument(sub);
    } catch (const std::logic_error&) {
      throw DataError("lexicon score not a number at " + where);
    }
    std::string word;
    append_lower(word, line.substr(0, t1));
    try {
      lex.add(std::move(word), e);
    } catch (const UsageError& err) {
      throw DataError(std::string(err.what()) + " at " + where);
    }
  }
  return lex;
}

PsychFeatures sentiment(std::string_view text, const Lexicon& lexicon, const SentimentConfig& config) {
  const Tokens tokens = tokenize(text);
  double pol = 0.0, subj = 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tokens.words.size(); ++i) {
    const std::string& w = tokens.words[i];
    if (config.negators.count(w)) continue;
    const LexiconEntry* e = lexicon.find(w);
    if (!e) continue;
    const bool negated = i > 0 && config.negators.count(tokens.words[i - 1]);
    pol += negated ? -e->polarity : e->polarity;
    subj += e->subjectivity;
    ++hits;
  }
  PsychFeatures f;
  if (hits) {
    f.polarity = std::clamp(pol / static_cast<double>(hits), -1.0, 1.0);
    f.subjectivity = std::clamp(subj / static_cast<double>(hits), 0.0, 1.0);
  }
  if (f.polarity > config.positive_above) {
    f.category = SentimentCategory::Positive;
  } else if (f.polarity < config.negative_below) {
    f.category = SentimentCategory::Negative;
  }
  return f;
}

StyleFeatures style(std::string_view text, const PronounLists& pronouns) {
  StyleFeatures f;
  for (const auto& w : tokenize(text).words) {
    if (pronouns.personal.count(w)) ++f.personal_pronouns;
    if (pronouns.impersonal.count(w)) ++f.impersonal_pronouns;
  }
  f.category = f.personal_pronouns >= pronouns.stylic_min_personal && f.personal_pronouns > 0
                   ? StyleCategory::Stylic
                   : StyleCategory::NonStylic;
  return f;
}

}  // namespace fakespread::textfeat
