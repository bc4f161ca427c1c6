#include <regex>
#include <set>
#include <sstream>

#include "mtr/data.hpp"
#include "text_format.hpp"

namespace mtr {

using detail::split_record;
using detail::to_lower;
using detail::trim;

namespace {

std::optional<std::string> cell_value(const std::string& field) {
    if (field.empty() || field == "?") return std::nullopt;
    return field;
}

// Splits "name rest" where name may be quoted.
std::pair<std::string, std::string_view> take_name(std::string_view s, std::size_t line_no) {
    s = trim(s);
    if (s.empty()) throw DataError("line " + std::to_string(line_no) + ": missing attribute name");
    if (s.front() == '\'' || s.front() == '"') {
        const char q = s.front();
        std::string name;
        std::size_t i = 1;
        for (; i < s.size() && s[i] != q; ++i) {
            if (s[i] == '\\' && i + 1 < s.size()) ++i;
            name.push_back(s[i]);
        }
        if (i >= s.size())
            throw DataError("line " + std::to_string(line_no) + ": unterminated attribute name");
        return {name, s.substr(i + 1)};
    }
    std::size_t i = 0;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i])) && s[i] != '{') ++i;
    return {std::string(s.substr(0, i)), s.substr(i)};
}

// Cuts a trailing '%' comment that lies outside quotes.
std::string_view strip_comment(std::string_view line) {
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '\'' || c == '"') {
            quote = c;
        } else if (c == '%') {
            return trim(line.substr(0, i));
        }
    }
    return line;
}

}  // namespace

RawTable parse_arff_text(const std::string& text) {
    RawTable table;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    bool saw_relation = false;
    bool in_data = false;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '%') continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (!in_data) {
            if (line.front() != '@') throw DataError(where + "expected a header declaration");
            auto space = line.find_first_of(" \t");
            std::string keyword = to_lower(line.substr(0, space));
            std::string_view rest = space == std::string_view::npos ? "" : line.substr(space);
            if (keyword == "@relation") {
                table.relation = std::string(trim(rest));
                if (!table.relation.empty() &&
                    (table.relation.front() == '\'' || table.relation.front() == '"'))
                    table.relation = table.relation.substr(1, table.relation.size() - 2);
                saw_relation = true;
            } else if (keyword == "@attribute") {
                if (!saw_relation) throw DataError(where + "@attribute before @relation");
                auto [name, type_part] = take_name(rest, line_no);
                std::string_view type = trim(type_part);
                RawTable::Column col{name, std::nullopt, false};
                if (!type.empty() && type.front() == '{') {
                    auto close = type.rfind('}');
                    if (close == std::string_view::npos)
                        throw DataError(where + "unterminated nominal value list");
                    auto values = split_record(type.substr(1, close - 1), true);
                    std::set<std::string> seen;
                    for (const auto& v : values) {
                        if (v.empty()) throw DataError(where + "empty nominal value");
                        if (!seen.insert(v).second)
                            throw DataError(where + "duplicate nominal value '" + v + "'");
                    }
                    col.declared_values = std::move(values);
                } else {
                    std::string t = to_lower(type);
                    if (t == "numeric" || t == "real" || t == "integer") {
                        col.declared_numeric = true;
                    } else {
                        throw DataError(where + "unsupported attribute type '" + std::string(type) +
                                        "'");
                    }
                }
                table.columns.push_back(std::move(col));
            } else if (keyword == "@data") {
                if (!saw_relation || table.columns.empty())
                    throw DataError(where + "@data before any @attribute");
                in_data = true;
            } else {
                throw DataError(where + "unknown declaration '" + keyword + "'");
            }
            continue;
        }
        line = strip_comment(line);
        if (line.front() == '{') throw DataError(where + "sparse ARFF rows are not supported");
        auto fields = split_record(line, true);
        if (fields.size() != table.columns.size())
            throw DataError(where + "expected " + std::to_string(table.columns.size()) +
                            " values, found " + std::to_string(fields.size()));
        std::vector<std::optional<std::string>> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(cell_value(f));
        table.rows.push_back(std::move(row));
    }
    if (!in_data) throw DataError("malformed ARFF header: no @data section");
    if (table.rows.empty()) throw DataError("empty @data section");
    return table;
}

RawTable parse_arff(const std::filesystem::path& path) {
    try {
        return parse_arff_text(detail::read_file(path.string()));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

RawTable parse_csv_text(const std::string& text) {
    // Split into records honoring quoted newlines.
    std::vector<std::string> records;
    std::string current;
    bool in_quotes = false;
    for (char c : text) {
        if (c == '"') in_quotes = !in_quotes;
        if ((c == '\n') && !in_quotes) {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            records.push_back(std::move(current));
            current.clear();
            continue;
        }
        current.push_back(c);
    }
    if (in_quotes) throw DataError("unterminated quoted field");
    if (!current.empty()) {
        if (current.back() == '\r') current.pop_back();
        records.push_back(std::move(current));
    }

    RawTable table;
    std::size_t line_no = 0;
    bool have_header = false;
    for (const auto& rec : records) {
        ++line_no;
        if (trim(rec).empty()) continue;
        auto fields = split_record(rec, false);
        if (!have_header) {
            for (auto& f : fields) table.columns.push_back({f, std::nullopt, false});
            have_header = true;
            continue;
        }
        if (fields.size() != table.columns.size())
            throw DataError("line " + std::to_string(line_no) + ": ragged row (" +
                            std::to_string(fields.size()) + " fields, header has " +
                            std::to_string(table.columns.size()) + ")");
        std::vector<std::optional<std::string>> row;
        row.reserve(fields.size());
        for (const auto& f : fields) row.push_back(cell_value(f));
        table.rows.push_back(std::move(row));
    }
    if (!have_header) throw DataError("missing CSV header");
    if (table.rows.empty()) throw DataError("empty CSV body");
    return table;
}

RawTable parse_csv(const std::filesystem::path& path) {
    try {
        return parse_csv_text(detail::read_file(path.string()));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::vector<std::string> read_target_sidecar(const std::filesystem::path& path) {
    const std::string text = detail::read_file(path.string());
    std::vector<std::string> names;
    if (text.find("<label") != std::string::npos) {
        static const std::regex label_re(R"re(<label\s+name\s*=\s*"([^"]*)")re");
        for (auto it = std::sregex_iterator(text.begin(), text.end(), label_re);
             it != std::sregex_iterator(); ++it)
            names.push_back((*it)[1].str());
    } else {
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (!t.empty() && t.front() != '#') names.emplace_back(t);
        }
    }
    if (names.empty()) throw DataError(path.string() + ": no target names in sidecar");
    return names;
}

}  // namespace mtr
