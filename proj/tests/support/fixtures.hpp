#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <unistd.h>

#include "mtr/data.hpp"
#include "mtr/rng.hpp"

namespace fixtures {

inline double unit(mtr::Rng& rng) {
    return static_cast<double>(rng.next() >> 11) * 0x1.0p-53;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("mtr_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline mtr::MultiTargetDataset numeric_dataset(const mtr::Matrix& x, const mtr::Matrix& y) {
    std::vector<mtr::FeatureDescriptor> desc;
    for (std::size_t c = 0; c < x.cols(); ++c)
        desc.push_back(mtr::FeatureDescriptor::numeric("x" + std::to_string(c + 1)));
    std::vector<std::string> names;
    for (std::size_t j = 0; j < y.cols(); ++j) names.push_back("y" + std::to_string(j + 1));
    return {x, y, desc, names};
}

/// Smooth nonlinear targets of d uniform features, plus noise.
/// Target j mixes the features with its own weights; targets are correlated.
inline mtr::MultiTargetDataset smooth_dataset(std::size_t n, std::size_t d, std::size_t m,
                                              std::uint64_t seed, double noise = 0.1) {
    mtr::Rng rng(seed);
    mtr::Matrix x(n, d), y(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < d; ++c) x(r, c) = unit(rng);
        const double base = std::sin(3.0 * x(r, 0)) + x(r, d > 1 ? 1 : 0) * x(r, d > 2 ? 2 : 0);
        for (std::size_t j = 0; j < m; ++j) {
            const double own = x(r, j % d) * static_cast<double>(j + 1);
            y(r, j) = base + 0.5 * own + noise * (unit(rng) - 0.5);
        }
    }
    return numeric_dataset(x, y);
}

/// Column 0 holds the row id, so an instrumented learner can identify rows.
/// y1 is a smooth function of the other columns, y2 = y1, y3 is pure noise.
inline mtr::MultiTargetDataset audit_dataset(std::size_t n, std::size_t m, std::uint64_t seed) {
    mtr::Rng rng(seed);
    mtr::Matrix x(n, 3), y(n, m);
    for (std::size_t r = 0; r < n; ++r) {
        x(r, 0) = static_cast<double>(r);
        x(r, 1) = unit(rng);
        x(r, 2) = unit(rng);
        const double y1 = 2.0 * x(r, 1) + std::cos(4.0 * x(r, 2));
        for (std::size_t j = 0; j < m; ++j) y(r, j) = j == 2 ? unit(rng) : y1;
    }
    return numeric_dataset(x, y);
}

/// ARFF text with `d` numeric features, `m` numeric targets and `n` rows.
/// When `nominal` is set the first feature is nominal {a,b,c}.
inline std::string synthetic_arff(std::size_t n, std::size_t d, std::size_t m, std::uint64_t seed,
                                  bool nominal = false) {
    mtr::Rng rng(seed);
    std::string s = "@relation synthetic\n";
    for (std::size_t c = 0; c < d; ++c) {
        if (c == 0 && nominal)
            s += "@attribute f1 {a,b,c}\n";
        else
            s += "@attribute f" + std::to_string(c + 1) + " numeric\n";
    }
    for (std::size_t j = 0; j < m; ++j) s += "@attribute t" + std::to_string(j + 1) + " numeric\n";
    s += "@data\n";
    const char* labels[] = {"a", "b", "c"};
    for (std::size_t r = 0; r < n; ++r) {
        std::vector<double> xs(d);
        for (std::size_t c = 0; c < d; ++c) {
            xs[c] = unit(rng);
            if (c == 0 && nominal)
                s += labels[rng.uniform(3)];
            else
                s += std::to_string(xs[c]);
            s += ',';
        }
        for (std::size_t j = 0; j < m; ++j) {
            const double v = std::sin(3.0 * xs[d > 1 ? 1 : 0]) + xs[(j + 1) % d] * 2.0 +
                             0.2 * unit(rng) + static_cast<double>(j);
            s += std::to_string(v);
            s += j + 1 < m ? ',' : '\n';
        }
    }
    return s;
}

}  // namespace fixtures
