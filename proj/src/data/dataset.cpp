#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mtr/data.hpp"
#include "text_format.hpp"

namespace mtr {

using detail::parse_number;

FeatureDescriptor FeatureDescriptor::categorical(std::string name, std::vector<std::string> values) {
    if (values.empty()) throw DataError("nominal feature '" + name + "' has no values");
    std::set<std::string> seen(values.begin(), values.end());
    if (seen.size() != values.size())
        throw DataError("nominal feature '" + name + "' has duplicate values");
    return {std::move(name), std::move(values)};
}

MultiTargetDataset::MultiTargetDataset(Matrix features, Matrix targets,
                                       std::vector<FeatureDescriptor> descriptors,
                                       std::vector<std::string> target_names)
    : features_(std::move(features)),
      targets_(std::move(targets)),
      descriptors_(std::move(descriptors)),
      target_names_(std::move(target_names)) {
    if (features_.rows() == 0) throw DataError("dataset has no examples");
    if (features_.cols() == 0) throw DataError("dataset has no features");
    if (descriptors_.size() != features_.cols())
        throw DimensionError("descriptor count does not match feature columns");
    // An empty target matrix is allowed for prediction-only inputs.
    if (targets_.cols() != 0 && targets_.rows() != features_.rows())
        throw DimensionError("feature and target row counts differ");
    if (target_names_.size() != targets_.cols())
        throw DimensionError("target name count does not match target columns");
    for (std::size_t c = 0; c < descriptors_.size(); ++c) {
        const auto& desc = descriptors_[c];
        if (!desc.nominal()) continue;
        for (std::size_t r = 0; r < features_.rows(); ++r) {
            const double v = features_(r, c);
            if (v < 0 || v != std::floor(v) || v > static_cast<double>(desc.values.size()))
                throw DataError("invalid nominal code in feature '" + desc.name + "'");
        }
    }
}

MultiTargetDataset MultiTargetDataset::subset(std::span<const std::size_t> rows) const {
    Matrix t = targets_.cols() ? targets_.select_rows(rows) : Matrix(rows.size(), 0);
    return {features_.select_rows(rows), std::move(t), descriptors_, target_names_};
}

bool MultiTargetDataset::same_schema(const MultiTargetDataset& other) const {
    return descriptors_ == other.descriptors_ && target_names_ == other.target_names_;
}

std::vector<double> column_means(const Matrix& m) {
    std::vector<double> sums(m.cols(), 0.0);
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) sums[c] += m(r, c);
    for (auto& s : sums) s /= static_cast<double>(m.rows());
    return sums;
}

namespace {

struct TypedColumn {
    FeatureDescriptor descriptor;
    std::vector<std::optional<double>> cells;
};

// Numeric column: parse every present cell, fail on text.
std::vector<std::optional<double>> numeric_cells(const RawTable& table, std::size_t col,
                                                 bool strict) {
    std::vector<std::optional<double>> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cell = table.rows[r][col];
        if (!cell) {
            out.push_back(std::nullopt);
            continue;
        }
        auto v = parse_number(*cell);
        if (!v) {
            if (!strict) return {};
            throw DataError("attribute '" + table.columns[col].name + "', row " +
                            std::to_string(r + 1) + ": '" + *cell + "' is not numeric");
        }
        out.push_back(v);
    }
    return out;
}

std::vector<std::optional<double>> nominal_cells(const RawTable& table, std::size_t col,
                                                 const std::vector<std::string>& values,
                                                 bool unknown_is_error) {
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < values.size(); ++i) index.emplace(values[i], i);
    std::vector<std::optional<double>> out;
    out.reserve(table.rows.size());
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& cell = table.rows[r][col];
        if (!cell) {
            out.push_back(std::nullopt);
            continue;
        }
        auto it = index.find(*cell);
        if (it == index.end()) {
            if (unknown_is_error)
                throw DataError("attribute '" + table.columns[col].name + "', row " +
                                std::to_string(r + 1) + ": value '" + *cell +
                                "' not in declared value list");
            out.push_back(static_cast<double>(values.size()));
        } else {
            out.push_back(static_cast<double>(it->second));
        }
    }
    return out;
}

TypedColumn type_feature(const RawTable& table, std::size_t col) {
    const auto& column = table.columns[col];
    if (column.declared_values)
        return {FeatureDescriptor::categorical(column.name, *column.declared_values),
                nominal_cells(table, col, *column.declared_values, true)};
    if (column.declared_numeric)
        return {FeatureDescriptor::numeric(column.name), numeric_cells(table, col, true)};
    // CSV: numeric when every present cell parses, otherwise nominal with
    // categories in first-appearance order.
    bool any_present = false;
    for (const auto& row : table.rows) any_present |= row[col].has_value();
    auto numeric = numeric_cells(table, col, false);
    if (!any_present || !numeric.empty())
        return {FeatureDescriptor::numeric(column.name),
                numeric.empty() ? std::vector<std::optional<double>>(table.rows.size()) : numeric};
    std::vector<std::string> categories;
    std::set<std::string> seen;
    for (const auto& row : table.rows)
        if (row[col] && seen.insert(*row[col]).second) categories.push_back(*row[col]);
    return {FeatureDescriptor::categorical(column.name, categories),
            nominal_cells(table, col, categories, true)};
}

// Mean for numeric, mode (lowest code on ties) for nominal. A column with
// no observed values imputes 0.
std::vector<double> impute(const TypedColumn& col) {
    std::vector<double> out(col.cells.size());
    double fill = 0.0;
    bool has_missing = false;
    for (const auto& c : col.cells) has_missing |= !c.has_value();
    if (has_missing) {
        if (col.descriptor.nominal()) {
            std::vector<std::size_t> counts(col.descriptor.values.size() + 1, 0);
            for (const auto& c : col.cells)
                if (c) ++counts[static_cast<std::size_t>(*c)];
            // Unknown-label codes never win the mode.
            counts.back() = 0;
            fill = static_cast<double>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
        } else {
            double sum = 0.0;
            std::size_t count = 0;
            for (const auto& c : col.cells)
                if (c) {
                    sum += *c;
                    ++count;
                }
            if (count > 0) fill = sum / static_cast<double>(count);
        }
    }
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = col.cells[i].value_or(fill);
    return out;
}

std::vector<std::size_t> resolve_targets(const RawTable& table, const TargetSelection& sel) {
    const std::size_t width = table.columns.size();
    std::vector<std::size_t> idx;
    if (const auto* count = std::get_if<std::size_t>(&sel.spec)) {
        if (*count == 0) throw DataError("at least one target is required");
        if (*count >= width)
            throw DataError("target count " + std::to_string(*count) +
                            " leaves no feature columns (file has " + std::to_string(width) +
                            " attributes)");
        for (std::size_t c = width - *count; c < width; ++c) idx.push_back(c);
        return idx;
    }
    const auto& names = std::get<std::vector<std::string>>(sel.spec);
    if (names.empty()) throw DataError("at least one target is required");
    for (const auto& name : names) {
        auto it = std::find_if(table.columns.begin(), table.columns.end(),
                               [&](const auto& c) { return c.name == name; });
        if (it == table.columns.end()) throw DataError("target '" + name + "' not found");
        auto c = static_cast<std::size_t>(it - table.columns.begin());
        if (std::find(idx.begin(), idx.end(), c) != idx.end())
            throw DataError("target '" + name + "' listed twice");
        idx.push_back(c);
    }
    if (idx.size() >= width) throw DataError("target list leaves no feature columns");
    return idx;
}

std::vector<double> target_column(const RawTable& table, std::size_t col) {
    if (table.columns[col].declared_values)
        throw DataError("target '" + table.columns[col].name + "' is not numeric");
    TypedColumn typed{FeatureDescriptor::numeric(table.columns[col].name), {}};
    try {
        typed.cells = numeric_cells(table, col, true);
    } catch (const DataError&) {
        throw DataError("target '" + table.columns[col].name + "' is not numeric");
    }
    return impute(typed);
}

}  // namespace

MultiTargetDataset build_dataset(const RawTable& table, const TargetSelection& targets) {
    if (table.rows.empty()) throw DataError("no data rows");
    const auto target_idx = resolve_targets(table, targets);
    const std::size_t n = table.rows.size();
    const std::size_t m = target_idx.size();
    const std::size_t d = table.columns.size() - m;

    Matrix x(n, d);
    Matrix y(n, m);
    std::vector<FeatureDescriptor> descriptors;
    std::vector<std::string> target_names;
    for (std::size_t j = 0; j < m; ++j) {
        auto values = target_column(table, target_idx[j]);
        for (std::size_t r = 0; r < n; ++r) y(r, j) = values[r];
        target_names.push_back(table.columns[target_idx[j]].name);
    }
    std::size_t f = 0;
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (std::find(target_idx.begin(), target_idx.end(), c) != target_idx.end()) continue;
        auto typed = type_feature(table, c);
        auto values = impute(typed);
        for (std::size_t r = 0; r < n; ++r) x(r, f) = values[r];
        descriptors.push_back(std::move(typed.descriptor));
        ++f;
    }
    return {std::move(x), std::move(y), std::move(descriptors), std::move(target_names)};
}

MultiTargetDataset encode_with_schema(const RawTable& table,
                                      const std::vector<FeatureDescriptor>& descriptors,
                                      const std::vector<std::string>& target_names,
                                      bool require_targets) {
    if (table.rows.empty()) throw DataError("no data rows");
    const std::size_t n = table.rows.size();
    auto find_column = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            if (table.columns[c].name == name) return c;
        return std::nullopt;
    };

    Matrix x(n, descriptors.size());
    for (std::size_t f = 0; f < descriptors.size(); ++f) {
        const auto& desc = descriptors[f];
        auto col = find_column(desc.name);
        if (!col) throw DataError("schema mismatch: feature '" + desc.name + "' not found in input");
        const auto& column = table.columns[*col];
        TypedColumn typed{desc, {}};
        if (desc.nominal()) {
            if (column.declared_numeric ||
                (column.declared_values && *column.declared_values != desc.values))
                throw DataError("schema mismatch: nominal feature '" + desc.name +
                                "' has a different declaration");
            typed.cells = nominal_cells(table, *col, desc.values, false);
        } else {
            if (column.declared_values)
                throw DataError("schema mismatch: feature '" + desc.name + "' should be numeric");
            typed.cells = numeric_cells(table, *col, true);
        }
        auto values = impute(typed);
        for (std::size_t r = 0; r < n; ++r) x(r, f) = values[r];
    }

    std::vector<std::optional<std::size_t>> target_cols;
    bool all_present = true;
    for (const auto& name : target_names) {
        target_cols.push_back(find_column(name));
        all_present &= target_cols.back().has_value();
    }
    if (require_targets && !all_present) {
        for (std::size_t j = 0; j < target_names.size(); ++j)
            if (!target_cols[j])
                throw DataError("schema mismatch: target '" + target_names[j] + "' not found");
    }
    if (!all_present || target_names.empty()) {
        return {std::move(x), Matrix(n, 0), descriptors, {}};
    }
    Matrix y(n, target_names.size());
    for (std::size_t j = 0; j < target_names.size(); ++j) {
        auto values = target_column(table, *target_cols[j]);
        for (std::size_t r = 0; r < n; ++r) y(r, j) = values[r];
    }
    return {std::move(x), std::move(y), descriptors, target_names};
}

MultiTargetDataset load_arff(const std::filesystem::path& path, const TargetSelection& targets) {
    auto table = parse_arff(path);
    try {
        return build_dataset(table, targets);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

MultiTargetDataset load_csv(const std::filesystem::path& path, std::size_t target_count) {
    auto table = parse_csv(path);
    try {
        return build_dataset(table, TargetSelection::last(target_count));
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

namespace {
bool is_arff(const std::filesystem::path& path) {
    return detail::to_lower(path.extension().string()) == ".arff";
}
}  // namespace

MultiTargetDataset load_dataset(const std::filesystem::path& path, const TargetSelection& targets) {
    if (is_arff(path)) return load_arff(path, targets);
    auto table = parse_csv(path);
    try {
        return build_dataset(table, targets);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

std::pair<MultiTargetDataset, MultiTargetDataset> load_holdout_files(
    const HoldoutFiles& files, const TargetSelection& targets) {
    auto train = load_dataset(files.train, targets);
    auto test_table = is_arff(files.test) ? parse_arff(files.test) : parse_csv(files.test);
    // The test file must carry exactly the train attributes.
    if (test_table.columns.size() != train.num_features() + train.num_targets())
        throw DataError("schema mismatch: '" + files.test.string() + "' has " +
                        std::to_string(test_table.columns.size()) + " attributes, expected " +
                        std::to_string(train.num_features() + train.num_targets()));
    auto test = encode_with_schema(test_table, train.descriptors(), train.target_names(), true);
    for (std::size_t c = 0; c < test.num_features(); ++c) {
        const auto& desc = test.descriptors()[c];
        if (!desc.nominal()) continue;
        for (std::size_t r = 0; r < test.size(); ++r)
            if (test.features()(r, c) >= static_cast<double>(desc.values.size()))
                throw DataError("schema mismatch: unknown value of '" + desc.name + "' in '" +
                                files.test.string() + "'");
    }
    return {std::move(train), std::move(test)};
}

std::pair<MultiTargetDataset, MultiTargetDataset> split_holdout(const MultiTargetDataset& data,
                                                                double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ConfigError("train fraction must lie in (0, 1)");
    const std::size_t n = data.size();
    const auto n_train =
        static_cast<std::size_t>(std::ceil(train_fraction * static_cast<double>(n) - 1e-9));
    if (n_train == 0 || n_train >= n) throw DataError("hold-out split leaves an empty side");
    std::vector<std::size_t> train(n_train), test(n - n_train);
    for (std::size_t i = 0; i < n_train; ++i) train[i] = i;
    for (std::size_t i = n_train; i < n; ++i) test[i - n_train] = i;
    return {data.subset(train), data.subset(test)};
}

std::string to_arff(const MultiTargetDataset& data, const std::string& relation) {
    using detail::arff_quote;
    using detail::format_double;
    std::ostringstream out;
    out << "@relation " << arff_quote(relation) << "\n\n";
    for (const auto& desc : data.descriptors()) {
        out << "@attribute " << arff_quote(desc.name) << ' ';
        if (desc.nominal()) {
            out << '{';
            for (std::size_t i = 0; i < desc.values.size(); ++i)
                out << (i ? "," : "") << arff_quote(desc.values[i]);
            out << "}\n";
        } else {
            out << "numeric\n";
        }
    }
    for (const auto& name : data.target_names()) out << "@attribute " << arff_quote(name) << " numeric\n";
    out << "\n@data\n";
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.num_features(); ++c) {
            const auto& desc = data.descriptors()[c];
            const double v = data.features()(r, c);
            if (c) out << ',';
            if (desc.nominal()) {
                auto code = static_cast<std::size_t>(v);
                out << (code < desc.values.size() ? arff_quote(desc.values[code]) : "?");
            } else {
                out << format_double(v);
            }
        }
        for (std::size_t j = 0; j < data.num_targets(); ++j)
            out << ',' << format_double(data.targets()(r, j));
        out << '\n';
    }
    return out.str();
}

std::string to_csv(const MultiTargetDataset& data) {
    using detail::csv_quote;
    using detail::format_double;
    std::ostringstream out;
    bool first = true;
    for (const auto& desc : data.descriptors()) {
        out << (first ? "" : ",") << csv_quote(desc.name);
        first = false;
    }
    for (const auto& name : data.target_names()) out << ',' << csv_quote(name);
    out << '\n';
    for (std::size_t r = 0; r < data.size(); ++r) {
        for (std::size_t c = 0; c < data.num_features(); ++c) {
            const auto& desc = data.descriptors()[c];
            const double v = data.features()(r, c);
            if (c) out << ',';
            if (desc.nominal()) {
                auto code = static_cast<std::size_t>(v);
                out << (code < desc.values.size() ? csv_quote(desc.values[code]) : "");
            } else {
                out << format_double(v);
            }
        }
        for (std::size_t j = 0; j < data.num_targets(); ++j)
            out << ',' << format_double(data.targets()(r, j));
        out << '\n';
    }
    return out.str();
}

namespace {
void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << text;
}
}  // namespace

void write_arff(const MultiTargetDataset& data, const std::filesystem::path& path,
                const std::string& relation) {
    write_text(path, to_arff(data, relation));
}

void write_csv(const MultiTargetDataset& data, const std::filesystem::path& path) {
    write_text(path, to_csv(data));
}

}  // namespace mtr
