#include "text_format.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mtr/error.hpp"

namespace mtr::detail {

std::string_view trim(std::string_view s) noexcept {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::vector<std::string> split_record(std::string_view line, bool arff_quoting) {
    std::vector<std::string> fields;
    std::string current;
    bool quoted_field = false;
    std::size_t i = 0;
    while (true) {
        // skip leading whitespace of a field
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t') && current.empty() &&
               !quoted_field)
            ++i;
        if (i < line.size() && (line[i] == '"' || (arff_quoting && line[i] == '\'')) &&
            current.empty()) {
            const char q = line[i++];
            quoted_field = true;
            bool closed = false;
            while (i < line.size()) {
                char c = line[i];
                if (arff_quoting && c == '\\' && i + 1 < line.size()) {
                    current.push_back(line[i + 1]);
                    i += 2;
                    continue;
                }
                if (c == q) {
                    if (!arff_quoting && i + 1 < line.size() && line[i + 1] == q) {
                        current.push_back(q);
                        i += 2;
                        continue;
                    }
                    ++i;
                    closed = true;
                    break;
                }
                current.push_back(c);
                ++i;
            }
            if (!closed) throw DataError("unterminated quoted field");
        }
        while (i < line.size() && line[i] != ',') {
            if (!quoted_field) {
                current.push_back(line[i]);
            } else if (!std::isspace(static_cast<unsigned char>(line[i]))) {
                throw DataError("unexpected text after quoted field");
            }
            ++i;
        }
        fields.push_back(quoted_field ? current : std::string(trim(current)));
        current.clear();
        quoted_field = false;
        if (i >= line.size()) break;
        ++i;  // consume comma
    }
    return fields;
}

std::optional<double> parse_number(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    (void)ec;
    return std::string(buf, ptr);
}

namespace {
bool needs_quote(const std::string& s, std::string_view specials) {
    if (s.empty()) return true;
    for (char c : s)
        if (specials.find(c) != std::string_view::npos || std::isspace(static_cast<unsigned char>(c)))
            return true;
    return false;
}
}  // namespace

std::string arff_quote(const std::string& s) {
    if (!needs_quote(s, ",'\"{}%?")) return s;
    std::string out = "'";
    for (char c : s) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

std::string csv_quote(const std::string& s) {
    if (!needs_quote(s, ",\"\n\r?")) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace mtr::detail
