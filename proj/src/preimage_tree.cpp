#include "bowen/preimage_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bowen/parallel.hpp"

namespace bowen {

std::uint64_t splitmix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t SplitMix64::below(std::uint64_t bound) {
  // Rejection keeps the draw exactly uniform.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  for (;;) {
    const std::uint64_t r = next();
    if (r < limit) return r % bound;
  }
}

Subsample stratified_subsample(std::span<const std::uint16_t> stratum_of, std::size_t strata,
                               std::size_t cap, std::uint64_t stream_seed) {
  const std::size_t n = stratum_of.size();
  Subsample out;
  if (n <= cap) {
    out.kept.resize(n);
    std::iota(out.kept.begin(), out.kept.end(), std::size_t{0});
    out.inflation.assign(n, 1.0);
    return out;
  }

  std::vector<std::vector<std::size_t>> members(strata);
  for (std::size_t i = 0; i < n; ++i) members[stratum_of[i]].push_back(i);

  std::size_t nonempty = 0;
  for (const auto& m : members) nonempty += m.empty() ? 0 : 1;
  const std::size_t floor_quota = cap >= nonempty ? 1 : 0;

  std::vector<std::size_t> quota(strata, 0);
  std::vector<double> ideal(strata, 0.0);
  std::size_t total = 0;
  for (std::size_t j = 0; j < strata; ++j) {
    if (members[j].empty()) continue;
    ideal[j] = static_cast<double>(cap) * static_cast<double>(members[j].size()) /
               static_cast<double>(n);
    quota[j] = std::clamp<std::size_t>(static_cast<std::size_t>(ideal[j]), floor_quota,
                                       members[j].size());
    total += quota[j];
  }
  // Largest-remainder correction; ties resolve to the lowest stratum.
  while (total < cap) {
    std::size_t best = strata;
    for (std::size_t j = 0; j < strata; ++j) {
      if (quota[j] >= members[j].size()) continue;
      if (best == strata || ideal[j] - quota[j] > ideal[best] - quota[best]) best = j;
    }
    if (best == strata) break;
    ++quota[best];
    ++total;
  }
  while (total > cap) {
    std::size_t best = strata;
    for (std::size_t j = 0; j < strata; ++j) {
      if (quota[j] <= floor_quota) continue;
      if (best == strata || quota[j] - ideal[j] > quota[best] - ideal[best]) best = j;
    }
    if (best == strata) break;
    --quota[best];
    --total;
  }

  std::vector<std::pair<std::size_t, double>> picked;
  picked.reserve(total);
  for (std::size_t j = 0; j < strata; ++j) {
    auto& m = members[j];
    const std::size_t q = quota[j];
    if (q == 0) continue;
    SplitMix64 rng(splitmix64(stream_seed ^ splitmix64(j + 1)));
    // Partial Fisher-Yates: the first q slots become the sample.
    for (std::size_t k = 0; k < q; ++k) {
      const std::size_t r = k + static_cast<std::size_t>(rng.below(m.size() - k));
      std::swap(m[k], m[r]);
    }
    const double inflation = static_cast<double>(m.size()) / static_cast<double>(q);
    for (std::size_t k = 0; k < q; ++k) picked.emplace_back(m[k], inflation);
  }
  std::sort(picked.begin(), picked.end());
  out.kept.reserve(picked.size());
  out.inflation.reserve(picked.size());
  for (const auto& [i, w] : picked) {
    out.kept.push_back(i);
    out.inflation.push_back(w);
  }
  return out;
}

PreimageTree::PreimageTree(MultiMap mm, SpherePoint root, std::size_t cap,
                           std::uint64_t rng_seed)
    : mm_(std::move(mm)), cap_(cap), rng_seed_(rng_seed) {
  TreeLevel base;
  base.nodes.push_back(TreeNode{root, 0.0, 0.0, 0, 0});
  base.generated = 1;
  levels_.push_back(std::move(base));
}

void PreimageTree::extend_to(int depth) {
  while (this->depth() < depth) grow();
}

void PreimageTree::grow() {
  const TreeLevel& prev = levels_.back();
  const std::size_t fan = static_cast<std::size_t>(mm_.total_degree());
  std::vector<TreeNode> children(prev.nodes.size() * fan);
  std::vector<char> critical(children.size(), 0);

  parallel_for(prev.nodes.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const TreeNode& node = prev.nodes[i];
      std::size_t slot = i * fan;
      for (std::size_t j = 0; j < mm_.size(); ++j) {
        for (const SpherePoint& y : preimages(mm_[j], node.point)) {
          const double norm = spherical_derivative_norm(mm_[j], y);
          children[slot] = TreeNode{y, node.log_deriv + std::log(norm), node.log_weight,
                                    static_cast<std::uint32_t>(i),
                                    static_cast<std::uint16_t>(j)};
          critical[slot] = norm < kCriticalNorm;
          ++slot;
        }
      }
    }
  });

  TreeLevel next;
  next.generated = children.size();
  next.critical =
      prev.critical || std::any_of(critical.begin(), critical.end(), [](char c) { return c; });
  if (children.size() > cap_) {
    std::vector<std::uint16_t> strata(children.size());
    for (std::size_t i = 0; i < children.size(); ++i) strata[i] = children[i].symbol;
    const std::uint64_t stream =
        splitmix64(rng_seed_ ^ splitmix64(static_cast<std::uint64_t>(levels_.size())));
    const Subsample sub = stratified_subsample(strata, mm_.size(), cap_, stream);
    next.nodes.reserve(sub.kept.size());
    for (std::size_t k = 0; k < sub.kept.size(); ++k) {
      TreeNode node = children[sub.kept[k]];
      node.log_weight += std::log(sub.inflation[k]);
      next.nodes.push_back(node);
    }
    next.subsampled = true;
  } else {
    next.nodes = std::move(children);
  }
  levels_.push_back(std::move(next));
}

Word PreimageTree::word_of(int level, std::size_t index) const {
  Word w;
  w.symbols.reserve(static_cast<std::size_t>(level));
  for (int k = level; k > 0; --k) {
    const TreeNode& node = levels_[static_cast<std::size_t>(k)].nodes[index];
    w.symbols.push_back(node.symbol);
    index = node.parent;
  }
  return w;
}

}  // namespace bowen
