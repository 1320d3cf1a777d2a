#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fakespread::textfeat {

struct Tokens {
  std::vector<std::string> sentences;
  std::vector<std::string> words;  // lowercase
};

/// Strips URLs, @mentions and '#' markers (hashtag bodies stay), splits
/// sentences on . ! ? followed by whitespace or end of text, and extracts
/// maximal runs of letters, digits and apostrophes as lowercase words.
Tokens tokenize(std::string_view text);

/// Vowel-group heuristic. Throws UsageError on an empty word.
int count_syllables(std::string_view word);

double smog_index(const Tokens& tokens);
double smog_index(std::string_view text);
double lexical_diversity(const std::vector<std::string>& words);
double avg_word_length(const std::vector<std::string>& words);

enum class ComplexityCategory { Simple, Medium, Complex };
enum class SentimentCategory { Positive, Negative, Neutral };
enum class StyleCategory { Stylic, NonStylic };

std::string_view to_string(ComplexityCategory c);
std::string_view to_string(SentimentCategory c);
std::string_view to_string(StyleCategory c);

/// SMOG cutpoints: Simple below `medium_from`, Complex above `complex_above`.
struct ComplexityThresholds {
  double medium_from = 9.0;
  double complex_above = 12.0;
};

struct ComplexityFeatures {
  double smog = 0.0;
  double lexical_diversity = 0.0;
  double avg_word_length = 0.0;
  ComplexityCategory category = ComplexityCategory::Simple;
};

ComplexityCategory complexity_category(double smog, const ComplexityThresholds& thresholds = {});
ComplexityFeatures complexity(std::string_view text, const ComplexityThresholds& thresholds = {});

struct LexiconEntry {
  double polarity = 0.0;
  double subjectivity = 0.0;
};

class Lexicon {
 public:
  Lexicon() = default;

  /// TSV "word<TAB>polarity<TAB>subjectivity"; '#' lines are comments.
  /// Throws DataError on malformed lines or out-of-range values.
  static Lexicon load(const std::filesystem::path& path);

  /// Throws UsageError when a score is out of range.
  void add(std::string word, LexiconEntry entry);
  const LexiconEntry* find(const std::string& word) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::unordered_map<std::string, LexiconEntry> entries_;
};

struct SentimentConfig {
  double positive_above = 0.05;
  double negative_below = -0.05;
  std::set<std::string> negators{"not", "no", "never"};
};

struct PsychFeatures {
  double polarity = 0.0;
  double subjectivity = 0.0;
  SentimentCategory category = SentimentCategory::Neutral;
};

PsychFeatures sentiment(std::string_view text, const Lexicon& lexicon, const SentimentConfig& config = {});

struct PronounLists {
  std::set<std::string> personal{"i",    "me",   "my",      "mine", "myself", "we",        "us",
                                 "our",  "ours", "ourselves", "you", "your",  "yours",     "yourself",
                                 "yourselves", "he", "him", "his", "himself", "she", "her", "hers",
                                 "herself", "they", "them", "their", "theirs", "themselves"};
  std::set<std::string> impersonal{"it", "its", "itself", "one", "oneself", "this", "that", "these", "those"};
  /// Minimum personal-pronoun count for the Stylic category.
  int stylic_min_personal = 1;
};

struct StyleFeatures {
  int personal_pronouns = 0;
  int impersonal_pronouns = 0;
  StyleCategory category = StyleCategory::NonStylic;
};

StyleFeatures style(std::string_view text, const PronounLists& pronouns = {});

}  // namespace fakespread::textfeat
