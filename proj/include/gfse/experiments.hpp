#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gfse/harness.hpp"

namespace gfse {

/// Desk-scale versions of the published comparisons. Each figure is a list
/// of experiments, one per curve, sharing seeds so curves can be paired.
std::vector<std::string> figure_names();

/// Throws InvalidInput listing the known names for an unknown figure.
std::vector<ExperimentConfig> figure_configs(const std::string& figure,
                                             const std::vector<std::uint64_t>& seeds);

/// Seeds 1..n.
std::vector<std::uint64_t> seed_range(std::size_t n);

/// Rows of one curve out of a combined result set.
std::vector<ResultRow> curve(const std::vector<ResultRow>& rows, const std::string& label);

}  // namespace gfse
