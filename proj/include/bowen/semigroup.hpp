#pragma once

// Finitely generated rational semigroups and their skew product: words,
// word derivatives, fiber preimages, Julia and postcritical point clouds,
// and sampled verification of hyperbolicity and expansion.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bowen/sphere.hpp"

namespace bowen {

// Generator tuple (f_1, ..., f_s). Symbols are 0-based in this library.
class MultiMap {
 public:
  explicit MultiMap(std::vector<RationalMap> generators);

  std::size_t size() const { return generators_.size(); }
  const RationalMap& operator[](std::size_t j) const { return generators_[j]; }
  const std::vector<RationalMap>& generators() const { return generators_; }
  // Sum of generator degrees; the number of skew-product preimages of a point.
  int total_degree() const { return total_degree_; }

 private:
  std::vector<RationalMap> generators_;
  int total_degree_ = 0;
};

// A finite word over generator indices. symbols[0] is applied first, so
// word_eval((a, b), z) = f_b(f_a(z)).
struct Word {
  std::vector<std::uint16_t> symbols;

  std::size_t size() const { return symbols.size(); }
  bool empty() const { return symbols.empty(); }
  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;
  Word concat(const Word& then) const;
};

SpherePoint word_eval(const MultiMap& mm, const Word& w, const SpherePoint& z);
double word_derivative_norm(const MultiMap& mm, const Word& w, const SpherePoint& z);

struct SkewPreimage {
  std::size_t symbol;
  SpherePoint point;
};

// Every (j, y) with f_j(y) = z, multiplicity included; total_degree entries.
std::vector<SkewPreimage> skew_preimages(const MultiMap& mm, const SpherePoint& z);

struct SeedInfo {
  SpherePoint point;
  std::size_t generator = 0;
  double multiplier_norm = 0.0;
};

// Largest-multiplier repelling fixed point of the lowest-index generator that
// has one. Throws NoRepellingSeed.
SeedInfo select_seed(const MultiMap& mm);

struct CloudEntry {
  SpherePoint point;
  Word word;
  int depth = 0;
};

struct CloudMeta {
  SpherePoint seed;
  std::uint64_t rng_seed = 0;
  int depth = 0;
  std::size_t cap = 0;
};

struct PointCloud {
  std::vector<CloudEntry> points;
  CloudMeta meta;
};

inline constexpr int kDefaultCloudDepth = 12;
inline constexpr std::size_t kDefaultCap = 200000;

// Backward orbit of the seed under the skew product, breadth first. Levels
// larger than cap are subsampled (stratified by newest symbol) and the union
// of all levels is thinned to at most cap entries.
PointCloud julia_backward_cloud(const MultiMap& mm, int depth = kDefaultCloudDepth,
                                std::size_t cap = kDefaultCap, std::uint64_t rng_seed = 0);

// Critical values of all generators and their forward images under all
// words of length <= depth. Exact duplicates within a level are merged.
PointCloud postcritical_cloud(const MultiMap& mm, int depth = kDefaultCloudDepth,
                              std::size_t cap = kDefaultCap, std::uint64_t rng_seed = 0);

enum class Verdict { Pass, Fail, Inconclusive };
const char* to_string(Verdict v);

struct Witness {
  SpherePoint point;
  std::string detail;
};

struct VerificationReport {
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Witness> witnesses;
  double margin = 0.0;
  std::vector<std::pair<std::string, std::string>> parameters;
};

// Sampled test of P(G) being inside F(G): the chordal gap between the
// postcritical and Julia clouds must reach `margin`. A pass only means no
// violation was seen at this resolution.
VerificationReport check_hyperbolic(const MultiMap& mm, int depth = kDefaultCloudDepth,
                                    double margin = 0.1, std::size_t cap = kDefaultCap,
                                    std::uint64_t rng_seed = 0);

// Growth of the minimum word derivative per depth along a backward cloud.
VerificationReport check_expanding_growth(const MultiMap& mm, const PointCloud& cloud,
                                          double threshold = 3.0);

}  // namespace bowen
