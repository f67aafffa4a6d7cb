#include "bowen/semigroup.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>

#include "bowen/errors.hpp"
#include "bowen/preimage_tree.hpp"

namespace bowen {

namespace {

constexpr double kRepellingSlack = 1e-6;

std::string fmt_point(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  char buf[96];
  std::snprintf(buf, sizeof buf, "(%.10g, %.10g)", p.value().real(), p.value().imag());
  return buf;
}

std::string fmt_num(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

bool entry_less(const CloudEntry& a, const CloudEntry& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  if (a.word != b.word) return a.word < b.word;
  return canonical_less(a.point, b.point);
}

// Proportional thinning of per-level point lists so the union fits in cap.
// Every non-empty level keeps at least one entry when cap allows it.
std::vector<std::size_t> level_quotas(const std::vector<std::size_t>& sizes, std::size_t cap) {
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  std::vector<std::size_t> q(sizes);
  if (total <= cap) return q;
  std::vector<double> ideal(sizes.size());
  std::size_t sum = 0;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    ideal[k] = static_cast<double>(cap) * static_cast<double>(sizes[k]) / static_cast<double>(total);
    q[k] = std::min(sizes[k], std::max<std::size_t>(sizes[k] > 0 ? 1 : 0,
                                                     static_cast<std::size_t>(ideal[k])));
    sum += q[k];
  }
  while (sum > cap) {
    const auto it = std::max_element(q.begin(), q.end());
    --*it;
    --sum;
  }
  while (sum < cap) {
    std::size_t best = sizes.size();
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (q[k] >= sizes[k]) continue;
      if (best == sizes.size() || ideal[k] - q[k] > ideal[best] - q[best]) best = k;
    }
    if (best == sizes.size()) break;
    ++q[best];
    ++sum;
  }
  return q;
}

// Thins per-level entry lists to the cloud cap and sorts canonically.
std::vector<CloudEntry> assemble_cloud(std::vector<std::vector<CloudEntry>> levels,
                                       std::size_t num_symbols, std::size_t cap,
                                       std::uint64_t rng_seed) {
  std::vector<std::size_t> sizes;
  for (const auto& l : levels) sizes.push_back(l.size());
  const auto quotas = level_quotas(sizes, cap);
  std::vector<CloudEntry> out;
  for (std::size_t k = 0; k < levels.size(); ++k) {
    auto& level = levels[k];
    if (quotas[k] >= level.size()) {
      std::move(level.begin(), level.end(), std::back_inserter(out));
      continue;
    }
    std::vector<std::uint16_t> strata(level.size());
    for (std::size_t i = 0; i < level.size(); ++i) {
      strata[i] = level[i].word.empty() ? 0 : level[i].word.symbols.front();
    }
    const std::uint64_t stream = splitmix64(rng_seed ^ splitmix64(0x7468696eULL + k));
    const auto sub = stratified_subsample(strata, std::max<std::size_t>(num_symbols, 1),
                                          quotas[k], stream);
    for (std::size_t i : sub.kept) out.push_back(std::move(level[i]));
  }
  std::sort(out.begin(), out.end(), entry_less);
  return out;
}

// Nearest-neighbour queries in chordal distance over a uniform grid on the
// cube containing the unit sphere.
class SphereIndex {
 public:
  explicit SphereIndex(const std::vector<SpherePoint>& pts) {
    const double n = static_cast<double>(std::max<std::size_t>(pts.size(), 1));
    grid_ = std::clamp(static_cast<int>(std::cbrt(n)), 1, 64);
    cell_ = 2.0 / grid_;
    coords_.reserve(pts.size());
    for (const auto& p : pts) coords_.push_back(to_sphere(p));
    std::vector<std::size_t> counts(static_cast<std::size_t>(grid_) * grid_ * grid_ + 1, 0);
    for (const auto& c : coords_) ++counts[cell_of(c) + 1];
    std::partial_sum(counts.begin(), counts.end(), counts.begin());
    start_ = counts;
    order_.resize(coords_.size());
    for (std::size_t i = 0; i < coords_.size(); ++i) order_[counts[cell_of(coords_[i])]++] = i;
  }

  // Returns (index, distance); index is SIZE_MAX when empty.
  std::pair<std::size_t, double> nearest(const SpherePoint& q) const {
    const Vec3 v = to_sphere(q);
    const std::array<int, 3> c = cell_coords(v);
    std::size_t best = std::numeric_limits<std::size_t>::max();
    double best_d = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= grid_; ++r) {
      for (int dx = -r; dx <= r; ++dx)
        for (int dy = -r; dy <= r; ++dy)
          for (int dz = -r; dz <= r; ++dz) {
            if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
            const int x = c[0] + dx, y = c[1] + dy, z = c[2] + dz;
            if (x < 0 || y < 0 || z < 0 || x >= grid_ || y >= grid_ || z >= grid_) continue;
            const std::size_t cell = (static_cast<std::size_t>(x) * grid_ + y) * grid_ + z;
            for (std::size_t k = start_[cell]; k < start_[cell + 1]; ++k) {
              const std::size_t i = order_[k];
              const Vec3& p = coords_[i];
              const double d = std::sqrt((p.x - v.x) * (p.x - v.x) + (p.y - v.y) * (p.y - v.y) +
                                         (p.z - v.z) * (p.z - v.z));
              if (d < best_d || (d == best_d && i < best)) {
                best_d = d;
                best = i;
              }
            }
          }
      if (best_d <= r * cell_) break;
    }
    return {best, best_d};
  }

 private:
  std::array<int, 3> cell_coords(const Vec3& v) const {
    auto axis = [&](double t) {
      return std::clamp(static_cast<int>((t + 1.0) / cell_), 0, grid_ - 1);
    };
    return {axis(v.x), axis(v.y), axis(v.z)};
  }
  std::size_t cell_of(const Vec3& v) const {
    const auto c = cell_coords(v);
    return (static_cast<std::size_t>(c[0]) * grid_ + c[1]) * grid_ + c[2];
  }

  int grid_ = 1;
  double cell_ = 2.0;
  std::vector<Vec3> coords_;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> order_;
};

}  // namespace

MultiMap::MultiMap(std::vector<RationalMap> generators) : generators_(std::move(generators)) {
  if (generators_.empty()) throw InvalidMap("a multi-map needs at least one generator");
  if (generators_.size() > 0xffff) throw InvalidMap("too many generators");
  for (const auto& g : generators_) total_degree_ += g.degree();
}

Word Word::concat(const Word& then) const {
  Word w = *this;
  w.symbols.insert(w.symbols.end(), then.symbols.begin(), then.symbols.end());
  return w;
}

SpherePoint word_eval(const MultiMap& mm, const Word& w, const SpherePoint& z) {
  SpherePoint p = z;
  for (auto j : w.symbols) p = mm[j](p);
  return p;
}

double word_derivative_norm(const MultiMap& mm, const Word& w, const SpherePoint& z) {
  SpherePoint p = z;
  double norm = 1.0;
  for (auto j : w.symbols) {
    norm *= spherical_derivative_norm(mm[j], p);
    p = mm[j](p);
  }
  return norm;
}

std::vector<SkewPreimage> skew_preimages(const MultiMap& mm, const SpherePoint& z) {
  std::vector<SkewPreimage> out;
  out.reserve(static_cast<std::size_t>(mm.total_degree()));
  for (std::size_t j = 0; j < mm.size(); ++j) {
    for (const auto& y : preimages(mm[j], z)) out.push_back({j, y});
  }
  return out;
}

SeedInfo select_seed(const MultiMap& mm) {
  for (std::size_t j = 0; j < mm.size(); ++j) {
    auto fps = fixed_points(mm[j], true);
    std::sort(fps.begin(), fps.end(),
              [](const FixedPoint& a, const FixedPoint& b) { return canonical_less(a.point, b.point); });
    const FixedPoint* best = nullptr;
    for (const auto& fp : fps) {
      if (*fp.multiplier_norm <= 1.0 + kRepellingSlack) continue;
      if (!best || *fp.multiplier_norm > *best->multiplier_norm) best = &fp;
    }
    if (best) return SeedInfo{best->point, j, *best->multiplier_norm};
  }
  throw NoRepellingSeed("no generator has a repelling fixed point");
}

PointCloud julia_backward_cloud(const MultiMap& mm, int depth, std::size_t cap,
                                std::uint64_t rng_seed) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (cap == 0) throw std::invalid_argument("cap must be >= 1");
  const SeedInfo seed = select_seed(mm);
  PreimageTree tree(mm, seed.point, cap, rng_seed);
  tree.extend_to(depth);

  std::vector<std::vector<CloudEntry>> levels;
  for (int k = 0; k <= depth; ++k) {
    const auto& nodes = tree.level(k).nodes;
    std::vector<CloudEntry> level(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      level[i] = CloudEntry{nodes[i].point, tree.word_of(k, i), k};
    }
    levels.push_back(std::move(level));
  }
  PointCloud cloud;
  cloud.points = assemble_cloud(std::move(levels), mm.size(), cap, rng_seed);
  cloud.meta = CloudMeta{seed.point, rng_seed, depth, cap};
  return cloud;
}

PointCloud postcritical_cloud(const MultiMap& mm, int depth, std::size_t cap,
                              std::uint64_t rng_seed) {
  if (depth < 0) throw std::invalid_argument("depth must be >= 0");
  if (cap == 0) throw std::invalid_argument("cap must be >= 1");

  auto dedupe = [](std::vector<CloudEntry>& level) {
    std::stable_sort(level.begin(), level.end(), [](const CloudEntry& a, const CloudEntry& b) {
      if (canonical_less(a.point, b.point)) return true;
      if (canonical_less(b.point, a.point)) return false;
      return a.word < b.word;
    });
    level.erase(std::unique(level.begin(), level.end(),
                            [](const CloudEntry& a, const CloudEntry& b) { return a.point == b.point; }),
                level.end());
  };

  std::vector<std::vector<CloudEntry>> levels(1);
  for (std::size_t j = 0; j < mm.size(); ++j) {
    for (const auto& v : critical_values(mm[j])) levels[0].push_back(CloudEntry{v, Word{}, 0});
  }
  dedupe(levels[0]);

  for (int k = 1; k <= depth; ++k) {
    const auto& prev = levels.back();
    std::vector<CloudEntry> next;
    next.reserve(prev.size() * mm.size());
    for (const auto& e : prev) {
      for (std::size_t j = 0; j < mm.size(); ++j) {
        Word w = e.word;
        w.symbols.push_back(static_cast<std::uint16_t>(j));
        next.push_back(CloudEntry{mm[j](e.point), std::move(w), k});
      }
    }
    dedupe(next);
    if (next.size() > cap) {
      std::vector<std::uint16_t> strata(next.size());
      for (std::size_t i = 0; i < next.size(); ++i) strata[i] = next[i].word.symbols.back();
      const std::uint64_t stream = splitmix64(rng_seed ^ splitmix64(0x706f7374ULL + k));
      const auto sub = stratified_subsample(strata, mm.size(), cap, stream);
      std::vector<CloudEntry> kept;
      for (std::size_t i : sub.kept) kept.push_back(std::move(next[i]));
      next = std::move(kept);
    }
    levels.push_back(std::move(next));
  }

  PointCloud cloud;
  cloud.points = assemble_cloud(std::move(levels), mm.size(), cap, rng_seed);
  cloud.meta = CloudMeta{SpherePoint::infinity(), rng_seed, depth, cap};
  return cloud;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass:
      return "pass";
    case Verdict::Fail:
      return "fail";
    default:
      return "inconclusive";
  }
}

VerificationReport check_hyperbolic(const MultiMap& mm, int depth, double margin,
                                    std::size_t cap, std::uint64_t rng_seed) {
  VerificationReport report;
  report.parameters = {{"depth", std::to_string(depth)},
                       {"margin", fmt_num(margin)},
                       {"cap", std::to_string(cap)},
                       {"rng_seed", std::to_string(rng_seed)}};

  const PointCloud post = postcritical_cloud(mm, depth, cap, rng_seed);
  if (post.points.empty()) {
    report.verdict = Verdict::Pass;
    report.margin = 2.0;
    return report;
  }
  const PointCloud julia = julia_backward_cloud(mm, depth, cap, rng_seed);

  std::vector<SpherePoint> jpts;
  jpts.reserve(julia.points.size());
  for (const auto& e : julia.points) jpts.push_back(e.point);
  const SphereIndex index(jpts);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_post = 0, best_julia = 0;
  for (std::size_t i = 0; i < post.points.size(); ++i) {
    const auto [j, d] = index.nearest(post.points[i].point);
    if (d < best) {
      best = d;
      best_post = i;
      best_julia = j;
    }
  }
  report.margin = best;
  if (best >= margin) {
    report.verdict = Verdict::Pass;
    return report;
  }
  report.verdict = best < 0.5 * margin ? Verdict::Fail : Verdict::Inconclusive;
  const auto& p = post.points[best_post];
  const auto& q = julia.points[best_julia];
  report.witnesses.push_back(
      {p.point, "postcritical point at depth " + std::to_string(p.depth) + " lies " +
                    fmt_num(best) + " from Julia-cloud point " + fmt_point(q.point)});
  report.witnesses.push_back({q.point, "nearest Julia-cloud point"});
  return report;
}

VerificationReport check_expanding_growth(const MultiMap& mm, const PointCloud& cloud,
                                          double threshold) {
  VerificationReport report;
  report.parameters = {{"threshold", fmt_num(threshold)},
                       {"cloud_size", std::to_string(cloud.points.size())}};

  int max_depth = 0;
  for (const auto& e : cloud.points) max_depth = std::max(max_depth, e.depth);
  if (max_depth == 0) {
    report.verdict = Verdict::Inconclusive;
    return report;
  }
  std::vector<double> min_norm(static_cast<std::size_t>(max_depth) + 1,
                               std::numeric_limits<double>::infinity());
  std::vector<const CloudEntry*> argmin(min_norm.size(), nullptr);
  for (const auto& e : cloud.points) {
    if (e.depth == 0) continue;
    const double m = word_derivative_norm(mm, e.word, e.point);
    if (m < min_norm[e.depth]) {
      min_norm[e.depth] = m;
      argmin[e.depth] = &e;
    }
  }

  std::vector<int> depths;
  for (int n = 1; n <= max_depth; ++n) {
    if (argmin[n]) depths.push_back(n);
  }
  const int deepest = depths.back();
  report.margin = min_norm[deepest];

  auto fail_with = [&](const std::string& why) {
    report.verdict = Verdict::Fail;
    const CloudEntry& e = *argmin[deepest];
    report.witnesses.push_back({e.point, why + "; min derivative " + fmt_num(min_norm[deepest]) +
                                             " at depth " + std::to_string(deepest)});
    return report;
  };

  auto first = std::find_if(depths.begin(), depths.end(),
                            [&](int n) { return min_norm[n] >= threshold; });
  if (first == depths.end()) return fail_with("minimum derivative never reaches the threshold");

  // Least-squares slope of log m_n against n from the first passing depth on.
  const std::vector<int> tail(first, depths.end());
  if (tail.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int n : tail) {
      const double y = std::log(std::max(min_norm[n], 1e-300));
      sx += n;
      sy += y;
      sxx += static_cast<double>(n) * n;
      sxy += n * y;
    }
    const double k = static_cast<double>(tail.size());
    const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
    report.parameters.emplace_back("growth_slope", fmt_num(slope));
    if (!(slope > 0.0)) return fail_with("minimum derivative does not keep growing");
  }
  report.verdict = Verdict::Pass;
  return report;
}

}  // namespace bowen
