#pragma once

// Run configuration for the command-line front end, stored as JSON.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bowen/family.hpp"
#include "bowen/geometry.hpp"
#include "bowen/thermo.hpp"

namespace bowen {

// Coefficient lists in ascending powers of z, kept verbatim for round trips.
struct MapSpec {
  std::vector<Cx> num;
  std::vector<Cx> den{Cx(1.0, 0.0)};
};

struct FamilyConfig {
  // num[k] / den[k]: coefficients (ascending in lambda) of z^k.
  struct Generator {
    std::vector<std::vector<Cx>> num;
    std::vector<std::vector<Cx>> den{{Cx(1.0, 0.0)}};
  };
  std::vector<Generator> generators;
  ParameterDomain domain = Rect{-1.0, 1.0, -1.0, 1.0};
  std::vector<Cx> excluded;
};

struct CloudSpec {
  int depth = kDefaultCloudDepth;
  std::size_t cap = kDefaultCap;
};

struct RenderSpec {
  std::optional<Rect> viewport;  // default: cloud bounding box plus a 5% margin
  int width = 512;
  int height = 512;
  bool depth_coloring = false;
  std::string output = "julia.ppm";
};

struct BoxdimSpec {
  int scales = 6;
  std::optional<Rect> viewport;
};

struct SweepSpec {
  int submean_radius = 1;
  std::optional<double> tol_sub;
  std::vector<SweepLine> lines;  // default: middle row and middle column
  int fit_degree = 4;
  std::string output = "sweep.csv";
};

struct RunConfig {
  std::uint64_t rng_seed = 0;
  std::vector<MapSpec> generators;
  std::optional<FamilyConfig> family;
  std::optional<Cx> lambda;  // family instance used by the non-sweep commands
  std::optional<Cx> basepoint;  // pressure basepoint; default: the repelling seed
  std::optional<Region::Shape> region;
  BowenConfig thermo;  // thermo.pressure.rng_seed mirrors rng_seed
  std::vector<double> t_values{0.0, 1.0, 2.0};
  double lyap_h = 1e-3;
  CloudSpec cloud;
  RenderSpec render;
  OscOptions osc;
  BoxdimSpec boxdim;
  std::optional<GridSpec> grid;
  SweepSpec sweep;
};

// Throws ConfigError on malformed JSON, unknown keys or invalid values.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
// Normalized JSON with every default written out.
std::string emit_config(const RunConfig& cfg);

bool operator==(const RunConfig& a, const RunConfig& b);

FamilySpec make_family(const FamilyConfig& fc);
// The explicit generators, or the family instance at lambda. Throws
// ConfigError when neither is usable.
MultiMap make_multimap(const RunConfig& cfg);
BowenConfig make_bowen_config(const RunConfig& cfg);

}  // namespace bowen
