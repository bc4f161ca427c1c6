#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "../data/text_format.hpp"
#include "mtr/stats.hpp"

namespace mtr::stats {

void ScoreMatrix::validate() const {
    if (values.rows() != row_labels.size())
        throw DimensionError("score matrix: row label count does not match rows");
    if (values.cols() != col_labels.size())
        throw DimensionError("score matrix: method label count does not match columns");
}

ScoreMatrix ScoreMatrix::complete_rows(std::vector<std::string>* dropped) const {
    validate();
    ScoreMatrix out;
    out.col_labels = col_labels;
    out.values = Matrix(0, methods());
    for (std::size_t r = 0; r < cases(); ++r) {
        auto row = values.row(r);
        bool finite = true;
        for (double v : row) finite &= std::isfinite(v);
        if (finite) {
            out.values.append_row(row);
            out.row_labels.push_back(row_labels[r]);
        } else if (dropped) {
            dropped->push_back(row_labels[r]);
        }
    }
    return out;
}

ScoreMatrix ScoreMatrix::parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    ScoreMatrix out;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (detail::trim(line).empty()) continue;
        auto fields = detail::split_record(line, false);
        if (header) {
            if (fields.size() < 3) throw DataError("score matrix needs a label column and >= 2 methods");
            out.col_labels.assign(fields.begin() + 1, fields.end());
            out.values = Matrix(0, out.col_labels.size());
            header = false;
            continue;
        }
        if (fields.size() != out.col_labels.size() + 1)
            throw DataError("score matrix line " + std::to_string(line_no) + ": ragged row");
        std::vector<double> row;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            const auto& f = fields[i];
            if (f.empty() || f == "NA" || f == "?") {
                row.push_back(std::numeric_limits<double>::quiet_NaN());
                continue;
            }
            auto v = detail::parse_number(f);
            if (!v)
                throw DataError("score matrix line " + std::to_string(line_no) + ": '" + f +
                                "' is not a number");
            row.push_back(*v);
        }
        out.row_labels.push_back(fields[0]);
        out.values.append_row(row);
    }
    if (header) throw DataError("score matrix: empty input");
    if (out.row_labels.empty()) throw DataError("score matrix: no rows");
    return out;
}

ScoreMatrix ScoreMatrix::read_csv(const std::filesystem::path& path) {
    try {
        return parse_csv(detail::read_file(path.string()));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::string ScoreMatrix::to_csv() const {
    validate();
    std::ostringstream out;
    out << "case";
    for (const auto& c : col_labels) out << ',' << detail::csv_quote(c);
    out << '\n';
    for (std::size_t r = 0; r < cases(); ++r) {
        out << detail::csv_quote(row_labels[r]);
        for (std::size_t c = 0; c < methods(); ++c) {
            const double v = values(r, c);
            out << ',' << (std::isfinite(v) ? detail::format_double(v) : std::string("NA"));
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace mtr::stats
