#include "gfse/pool_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "gfse/errors.hpp"
#include "gfse/text.hpp"

namespace gfse {

// Ordered so domain parameters keep their describe() order on reload.
using json = nlohmann::ordered_json;

void write_pool_csv(std::ostream& out, const TrajectoryPool& pool) {
  out << "trajectory,step";
  for (const auto& name : pool.schema()->names()) out << ',' << name;
  out << '\n';
  const std::size_t width = pool.schema()->size();
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& rows = pool[i].rows();
    for (std::size_t t = 0; t < pool[i].length(); ++t) {
      out << i << ',' << t + 1;
      for (std::size_t f = 0; f < width; ++f) out << ',' << format_double(rows[t * width + f]);
      out << '\n';
    }
  }
}

std::string pool_sidecar_json(const TrajectoryPool& pool, const NamedValues& domain_params) {
  json j;
  j["format"] = "gfse-pool";
  j["version"] = 1;
  j["domain_id"] = pool.domain_id();
  j["created_seed"] = pool.created_seed();
  j["features"] = pool.schema()->names();
  // Parameters go through text so the JSON number formatter cannot round them.
  json params = json::object();
  for (const auto& [k, v] : domain_params) params[k] = format_double(v);
  j["domain_params"] = params;
  json trajectories = json::array();
  for (const auto& t : pool) {
    trajectories.push_back({{"seed", t.seed()}, {"horizon", t.horizon()}, {"length", t.length()}});
  }
  j["trajectories"] = trajectories;
  return j.dump(2) + "\n";
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".json");
  return p;
}

void save_pool(const std::filesystem::path& csv, const TrajectoryPool& pool,
               const NamedValues& domain_params) {
  if (csv.has_parent_path()) std::filesystem::create_directories(csv.parent_path());
  std::ofstream rows(csv, std::ios::binary);
  if (!rows) throw std::runtime_error("cannot write " + csv.string());
  write_pool_csv(rows, pool);
  std::ofstream side(sidecar_path(csv), std::ios::binary);
  if (!side) throw std::runtime_error("cannot write " + sidecar_path(csv).string());
  side << pool_sidecar_json(pool, domain_params);
}

StoredPool read_pool(std::istream& csv, std::istream& sidecar) {
  json j;
  try {
    j = json::parse(sidecar);
  } catch (const json::exception& e) {
    throw ParseError(std::string("pool sidecar: ") + e.what(), 0);
  }
  if (j.value("format", "") != "gfse-pool") throw ValidationError("pool sidecar: not a gfse-pool file");

  std::vector<std::string> features;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> horizons, lengths;
  NamedValues params;
  std::string domain_id;
  std::uint64_t created_seed = 0;
  try {
    domain_id = j.at("domain_id").get<std::string>();
    created_seed = j.at("created_seed").get<std::uint64_t>();
    features = j.at("features").get<std::vector<std::string>>();
    for (const auto& [k, v] : j.at("domain_params").items()) {
      params.emplace_back(k, parse_double(v.get<std::string>()));
    }
    for (const auto& t : j.at("trajectories")) {
      seeds.push_back(t.at("seed").get<std::uint64_t>());
      horizons.push_back(t.at("horizon").get<std::size_t>());
      lengths.push_back(t.at("length").get<std::size_t>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("pool sidecar: ") + e.what());
  }
  auto schema = std::make_shared<const FeatureSchema>(features);
  const std::size_t width = features.size();

  std::vector<std::vector<double>> rows(seeds.size());
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(csv, line)) throw ParseError("pool CSV: missing header", 1);
  std::string expected = "trajectory,step";
  for (const auto& f : features) expected += "," + f;
  if (trim(line) != expected) throw ValidationError("pool CSV header does not match the sidecar features");
  while (std::getline(csv, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != width + 2) throw ParseError("pool CSV: wrong number of fields", line_no);
    const auto idx = parse_u64(cells[0], line_no);
    const auto step = parse_u64(cells[1], line_no);
    if (idx >= rows.size()) throw ParseError("pool CSV: trajectory index outside the sidecar", line_no);
    if (step != rows[idx].size() / std::max<std::size_t>(width, 1) + 1) {
      throw ParseError("pool CSV: steps must be consecutive from 1", line_no);
    }
    for (std::size_t f = 0; f < width; ++f) rows[idx].push_back(parse_double(cells[f + 2], line_no));
  }

  StoredPool out{TrajectoryPool(schema, domain_id, created_seed), std::move(params)};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != lengths[i] * width) {
      throw ValidationError("pool CSV: trajectory " + std::to_string(i) + " has " +
                            std::to_string(rows[i].size() / std::max<std::size_t>(width, 1)) +
                            " rows, sidecar says " + std::to_string(lengths[i]));
    }
    out.pool.append(Trajectory(schema, std::move(rows[i]), horizons[i], seeds[i], domain_id));
  }
  return out;
}

StoredPool load_pool(const std::filesystem::path& csv) {
  std::ifstream rows(csv, std::ios::binary);
  if (!rows) throw InvalidInput("cannot open pool " + csv.string());
  std::ifstream side(sidecar_path(csv), std::ios::binary);
  if (!side) throw InvalidInput("cannot open pool sidecar " + sidecar_path(csv).string());
  return read_pool(rows, side);
}

}  // namespace gfse
