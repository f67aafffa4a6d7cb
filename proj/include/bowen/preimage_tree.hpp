#pragma once

// Breadth-first backward tree of the skew product, shared by the Julia cloud
// and the transfer-operator level sums.

#include <cstdint>
#include <span>
#include <vector>

#include "bowen/semigroup.hpp"

namespace bowen {

// splitmix64 finalizer; also used to derive independent sampling streams.
std::uint64_t splitmix64(std::uint64_t x);

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(state_);
  }
  // Uniform in [0, bound); bound > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
};

struct Subsample {
  std::vector<std::size_t> kept;  // ascending
  std::vector<double> inflation;  // stratum size / stratum quota, per kept index
};

// Stratified simple random sample of at most `cap` indices. Quotas are
// proportional to stratum sizes (largest remainder, at least one per
// non-empty stratum), so weighting kept items by `inflation` gives an
// unbiased estimate of any sum over all items.
Subsample stratified_subsample(std::span<const std::uint16_t> stratum_of, std::size_t strata,
                               std::size_t cap, std::uint64_t stream_seed);

// Below this spherical derivative norm a preimage step counts as critical.
inline constexpr double kCriticalNorm = 1e-12;

struct TreeNode {
  SpherePoint point;
  double log_deriv = 0.0;   // log ||(f_w)'(y)||, w the node's word
  double log_weight = 0.0;  // log importance weight from subsampling
  std::uint32_t parent = 0;
  std::uint16_t symbol = 0;  // generator of the newest backward step
};

struct TreeLevel {
  std::vector<TreeNode> nodes;
  std::size_t generated = 0;  // size before subsampling
  bool subsampled = false;
  bool critical = false;      // some path to this level passes a critical step
};

class PreimageTree {
 public:
  PreimageTree(MultiMap mm, SpherePoint root, std::size_t cap, std::uint64_t rng_seed);

  void extend_to(int depth);
  int depth() const { return static_cast<int>(levels_.size()) - 1; }
  const TreeLevel& level(int k) const { return levels_.at(static_cast<std::size_t>(k)); }
  const MultiMap& multimap() const { return mm_; }
  const SpherePoint& root() const { return levels_.front().nodes.front().point; }

  // Word w with word_eval(w, node) == root; the newest symbol comes first.
  Word word_of(int level, std::size_t index) const;

 private:
  void grow();

  MultiMap mm_;
  std::size_t cap_;
  std::uint64_t rng_seed_;
  std::vector<TreeLevel> levels_;
};

}  // namespace bowen
