#include "nrcid/io.hpp"
#include "nrcid/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>

namespace nrcid {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

/// Splits into lines, dropping a single trailing empty line and any '\r'.
std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        lines.push_back(line);
        if (nl == std::string_view::npos) {
            break;
        }
        pos = nl + 1;
    }
    if (!lines.empty() && lines.back().empty()) {
        lines.pop_back();
    }
    return lines;
}

} // namespace

bool parse_double(std::string_view cell, double& out) {
    cell = trim(cell);
    if (cell.empty()) {
        return false;
    }
    if (cell == "nan" || cell == "NaN") {
        out = std::numeric_limits<double>::quiet_NaN();
        return true;
    }
    if (cell == "inf") {
        out = std::numeric_limits<double>::infinity();
        return true;
    }
    if (cell == "-inf") {
        out = -std::numeric_limits<double>::infinity();
        return true;
    }
    if (cell.front() == '+') {
        cell.remove_prefix(1);
    }
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
    return res.ec == std::errc() && res.ptr == cell.data() + cell.size();
}

Matrix parse_csv(std::string_view text, const std::string& source) {
    const auto lines = split_lines(text);
    std::size_t first = 0;
    while (first < lines.size() && !lines[first].empty() && lines[first].front() == '#') {
        ++first;
    }
    std::vector<double> values;
    std::size_t cols = 0;
    std::size_t rows = 0;
    for (std::size_t li = first; li < lines.size(); ++li) {
        const std::string_view line = lines[li];
        const std::size_t line_no = li + 1;
        if (trim(line).empty()) {
            throw DataError(source + ":" + std::to_string(line_no) + ": empty line");
        }
        std::size_t count = 0;
        std::size_t pos = 0;
        while (true) {
            const auto comma = line.find(',', pos);
            const std::string_view cell =
                line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos);
            double v = 0.0;
            if (!parse_double(cell, v)) {
                throw DataError(source + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                                std::string(trim(cell)) + "' in column " + std::to_string(count + 1));
            }
            values.push_back(v);
            ++count;
            if (comma == std::string_view::npos) {
                break;
            }
            pos = comma + 1;
        }
        if (rows == 0) {
            cols = count;
        } else if (count != cols) {
            throw DataError(source + ":" + std::to_string(line_no) + ": ragged row with " + std::to_string(count) +
                            " cells, expected " + std::to_string(cols));
        }
        ++rows;
    }
    if (rows == 0) {
        throw DataError(source + ": no data rows");
    }
    return Matrix(rows, cols, std::move(values));
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + path.string());
    }
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    out << text;
    if (!out) {
        throw DataError("failed writing " + path.string());
    }
}

Matrix load_csv(const std::filesystem::path& path) {
    return parse_csv(read_text_file(path), path.string());
}

std::string format_double(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

std::string to_csv(const Matrix& m, const std::string& header) {
    std::string out;
    if (!header.empty()) {
        out += "# " + header + "\n";
    }
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (c > 0) {
                out += ',';
            }
            out += format_double(m(r, c));
        }
        out += '\n';
    }
    return out;
}

void save_csv(const std::filesystem::path& path, const Matrix& m, const std::string& header) {
    write_text_file(path, to_csv(m, header));
}

KeyValues parse_key_values(std::string_view text, const std::string& source) {
    KeyValues kv;
    const auto lines = split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string_view line = trim(lines[li]);
        if (line.empty() || line.front() == '#') {
            continue;
        }
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) {
            throw DataError(source + ":" + std::to_string(li + 1) + ": expected 'key: value'");
        }
        const std::string key(trim(line.substr(0, colon)));
        if (key.empty()) {
            throw DataError(source + ":" + std::to_string(li + 1) + ": empty key");
        }
        if (!kv.emplace(key, std::string(trim(line.substr(colon + 1)))).second) {
            throw DataError(source + ":" + std::to_string(li + 1) + ": duplicate key '" + key + "'");
        }
    }
    return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
    return parse_key_values(read_text_file(path), path.string());
}

std::size_t get_count(const KeyValues& kv, const std::string& key, std::size_t fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    std::size_t v = 0;
    const auto& s = it->second;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw DataError("key '" + key + "' expects a non-negative integer, got '" + s + "'");
    }
    return v;
}

double get_real(const KeyValues& kv, const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) {
        return fallback;
    }
    double v = 0.0;
    if (!parse_double(it->second, v)) {
        throw DataError("key '" + key + "' expects a number, got '" + it->second + "'");
    }
    return v;
}

std::vector<std::string> split_list(std::string_view text) {
    std::vector<std::string> out;
    if (trim(text).empty()) {
        return out;
    }
    std::size_t pos = 0;
    while (true) {
        const auto comma = text.find(',', pos);
        out.emplace_back(trim(text.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
        if (comma == std::string_view::npos) {
            break;
        }
        pos = comma + 1;
    }
    return out;
}

} // namespace nrcid
