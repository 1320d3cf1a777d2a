#pragma once

#include <cstddef>
#include <istream>
#include <ostream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fakespread::csv {

/// RFC-4180 reader: quoted fields, doubled quotes, CRLF or LF, embedded
/// newlines inside quotes.
class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  /// Next record, or nullopt at end of input. Sets `unterminated` when the
  /// input ended inside a quoted field.
  std::optional<std::vector<std::string>> next();
  bool unterminated() const { return unterminated_; }

 private:
  std::istream& in_;
  bool unterminated_ = false;
};

/// Quotes a field when it contains a delimiter, quote, or line break.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace fakespread::csv
