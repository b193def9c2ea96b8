#pragma once

#include "nrcid/matrix.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace nrcid {

/// Numeric CSV: comma separated, optional leading '#' header lines, LF or CRLF
/// line endings, trailing newline optional. Errors name the offending line.
Matrix parse_csv(std::string_view text, const std::string& source = "<csv>");
Matrix load_csv(const std::filesystem::path& path);

/// Shortest decimal form that parses back to the same double (at most 17 significant digits).
std::string format_double(double v);

/// Parses a whole cell as a double. Accepts "nan", "inf" and "-inf".
bool parse_double(std::string_view cell, double& out);

void save_csv(const std::filesystem::path& path, const Matrix& m, const std::string& header = "");
std::string to_csv(const Matrix& m, const std::string& header = "");

/// "key: value" lines; blank lines and '#' comments are ignored.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::string_view text, const std::string& source = "<text>");
KeyValues load_key_values(const std::filesystem::path& path);

/// Typed lookups; a missing key yields `fallback`, a malformed value throws DataError.
std::size_t get_count(const KeyValues& kv, const std::string& key, std::size_t fallback);
double get_real(const KeyValues& kv, const std::string& key, double fallback);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Splits on commas and trims surrounding whitespace from each piece.
std::vector<std::string> split_list(std::string_view text);

} // namespace nrcid
