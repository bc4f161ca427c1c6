#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mtr/matrix.hpp"

namespace mtr {

/// Metadata for one input column. Nominal columns are stored in the
/// feature matrix as integer codes indexing `values`.
struct FeatureDescriptor {
    std::string name;
    std::vector<std::string> values;  // empty for numeric features

    bool nominal() const noexcept { return !values.empty(); }

    static FeatureDescriptor numeric(std::string name) { return {std::move(name), {}}; }
    static FeatureDescriptor categorical(std::string name, std::vector<std::string> values);

    friend bool operator==(const FeatureDescriptor&, const FeatureDescriptor&) = default;
};

/// n examples with d features and m real-valued targets. Complete after
/// loading: missing cells are imputed at ingestion.
class MultiTargetDataset {
public:
    MultiTargetDataset() = default;
    MultiTargetDataset(Matrix features, Matrix targets, std::vector<FeatureDescriptor> descriptors,
                       std::vector<std::string> target_names);

    std::size_t size() const noexcept { return features_.rows(); }
    std::size_t num_features() const noexcept { return features_.cols(); }
    std::size_t num_targets() const noexcept { return targets_.cols(); }

    const Matrix& features() const noexcept { return features_; }
    const Matrix& targets() const noexcept { return targets_; }
    const std::vector<FeatureDescriptor>& descriptors() const noexcept { return descriptors_; }
    const std::vector<std::string>& target_names() const noexcept { return target_names_; }

    /// Subset of rows, in the given order.
    MultiTargetDataset subset(std::span<const std::size_t> rows) const;

    /// Same features, descriptors and target names.
    bool same_schema(const MultiTargetDataset& other) const;

    friend bool operator==(const MultiTargetDataset&, const MultiTargetDataset&) = default;

private:
    Matrix features_;
    Matrix targets_;
    std::vector<FeatureDescriptor> descriptors_;
    std::vector<std::string> target_names_;
};

/// Which attributes of a file are targets: the trailing `count`, or an
/// explicit list of names.
struct TargetSelection {
    std::variant<std::size_t, std::vector<std::string>> spec;

    static TargetSelection last(std::size_t count) { return {count}; }
    static TargetSelection named(std::vector<std::string> names) { return {std::move(names)}; }
};

/// Raw tabular content of an ARFF or CSV file before typing and
/// imputation. Cells are kept as text; nullopt marks a missing value.
struct RawTable {
    struct Column {
        std::string name;
        std::optional<std::vector<std::string>> declared_values;  // ARFF nominal
        bool declared_numeric = false;                            // ARFF numeric
    };
    std::string relation;
    std::vector<Column> columns;
    std::vector<std::vector<std::optional<std::string>>> rows;
};

RawTable parse_arff(const std::filesystem::path& path);
RawTable parse_arff_text(const std::string& text);
RawTable parse_csv(const std::filesystem::path& path);
RawTable parse_csv_text(const std::string& text);

/// Types columns, splits features/targets and imputes missing cells
/// (numeric: column mean, nominal: mode, lowest code on ties).
MultiTargetDataset build_dataset(const RawTable& table, const TargetSelection& targets);

/// Encodes `table` against an existing schema: features are looked up by
/// name, nominal labels re-coded by the schema's value lists. Target
/// columns are read when present (otherwise the target matrix is empty).
/// Unknown nominal labels are coded as the descriptor's cardinality.
MultiTargetDataset encode_with_schema(const RawTable& table,
                                      const std::vector<FeatureDescriptor>& descriptors,
                                      const std::vector<std::string>& target_names,
                                      bool require_targets);

MultiTargetDataset load_arff(const std::filesystem::path& path, const TargetSelection& targets);
MultiTargetDataset load_csv(const std::filesystem::path& path, std::size_t target_count);

/// Dispatches on the file extension (.arff, otherwise CSV). CSV requires a
/// trailing-count selection or names present in the header.
MultiTargetDataset load_dataset(const std::filesystem::path& path, const TargetSelection& targets);

/// Reads a target list sidecar: Mulan-style XML (`<label name="..."/>`)
/// or plain text with one name per line.
std::vector<std::string> read_target_sidecar(const std::filesystem::path& path);

void write_arff(const MultiTargetDataset& data, const std::filesystem::path& path,
                const std::string& relation = "mtr");
std::string to_arff(const MultiTargetDataset& data, const std::string& relation = "mtr");
void write_csv(const MultiTargetDataset& data, const std::filesystem::path& path);
std::string to_csv(const MultiTargetDataset& data);

/// Partition of {0..n-1} into f folds.
struct FoldAssignment {
    std::vector<std::size_t> fold_of;
    std::size_t folds = 0;

    std::vector<std::size_t> test_rows(std::size_t fold) const;
    std::vector<std::size_t> train_rows(std::size_t fold) const;
    std::vector<std::size_t> sizes() const;
};

/// Seeded uniform shuffle followed by round-robin slicing. Fold sizes
/// differ by at most one.
FoldAssignment make_kfold(std::size_t n, std::size_t folds, std::uint64_t seed);

struct HoldoutFraction {
    double train_fraction;
};
struct HoldoutFiles {
    std::filesystem::path train;
    std::filesystem::path test;
};
struct KFold {
    std::size_t folds = 10;
    std::uint64_t seed = 1;
};

struct SplitSpec {
    std::variant<HoldoutFraction, HoldoutFiles, KFold> kind;

    bool is_kfold() const noexcept { return std::holds_alternative<KFold>(kind); }
};

/// Temporal prefix split: train is the first ceil(fraction * n) rows.
std::pair<MultiTargetDataset, MultiTargetDataset> split_holdout(const MultiTargetDataset& data,
                                                                double train_fraction);

/// Loads an explicit train/test pair. The test file is encoded with the
/// train file's schema; a mismatch is a DataError.
std::pair<MultiTargetDataset, MultiTargetDataset> load_holdout_files(
    const HoldoutFiles& files, const TargetSelection& targets);

/// Column means of `m`, summed in row order.
std::vector<double> column_means(const Matrix& m);

}  // namespace mtr
