#pragma once

#include <vector>

#include "mtr/methods.hpp"

namespace mtr::detail {

/// Schema of [features | one numeric column per meta name].
std::vector<FeatureDescriptor> augmented_schema(const std::vector<FeatureDescriptor>& base,
                                                const std::vector<std::string>& meta_names);

/// Explicit chain from the config, else a seeded random one.
std::vector<std::size_t> resolve_chain(const MethodConfig& config, std::size_t m);

void check_width(std::span<const double> x, std::size_t expected, const char* who);

}  // namespace mtr::detail
