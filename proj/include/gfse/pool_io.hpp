#pragma once

#include <filesystem>
#include <iosfwd>

#include "gfse/core.hpp"
#include "gfse/evaluation.hpp"

namespace gfse {

/// A pool as stored on disk, with the parameters of the domain that
/// generated it (enough to rebuild its reward model).
struct StoredPool {
  TrajectoryPool pool;
  NamedValues domain_params;
};

/// Observation rows: `trajectory,step,<feature>...`, one line per step,
/// values in shortest round-trip form.
void write_pool_csv(std::ostream& out, const TrajectoryPool& pool);

/// Everything the rows cannot carry: schema, domain, seeds, horizons and
/// lengths (so empty trajectories survive).
std::string pool_sidecar_json(const TrajectoryPool& pool, const NamedValues& domain_params);

/// Sidecar path for a pool CSV: same stem, ".json" extension.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Writes `csv` and its sidecar.
void save_pool(const std::filesystem::path& csv, const TrajectoryPool& pool,
               const NamedValues& domain_params);

/// Inverse of save_pool; bit-exact. Throws ParseError (with line) on
/// malformed rows and ValidationError when rows and sidecar disagree.
StoredPool load_pool(const std::filesystem::path& csv);
StoredPool read_pool(std::istream& csv, std::istream& sidecar);

}  // namespace gfse
