#pragma once

#include <algorithm>
#include <limits>
#include <vector>

#include "handover/geometry/summary.hpp"
#include "handover/grasp/types.hpp"
#include "handover/random.hpp"

namespace handover::grasp {

namespace detail {

inline double subset_min_distance(const std::vector<GraspCandidate>& c, const std::vector<std::size_t>& idx) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < idx.size(); ++a) {
    for (std::size_t b = a + 1; b < idx.size(); ++b) {
      m = std::min(m, (c[idx[a]].translation - c[idx[b]].translation).norm());
    }
  }
  return m;
}

// Visits every k-subset of [0, n) in lexicographic order.
template <typename Fn>
void for_each_subset(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Sets up to this size are small enough to search exhaustively.
inline constexpr std::size_t kExactFpsLimit = 12;

/// Farthest point sampling over grasp translations. The first pick is drawn
/// from `seed`; each further pick maximizes its distance to those already
/// taken (lowest index on ties). For small sets the greedy result is
/// replaced by an exhaustive max-min subset when it falls short, preferring
/// one that keeps the seeded pick. Returns indices in pick order.
inline std::vector<std::size_t> fps_indices(const std::vector<GraspCandidate>& candidates, std::size_t k,
                                            std::uint64_t seed) {
  if (candidates.empty()) throw InputError("fps_select: no candidates");
  if (k == 0) throw InputError("fps_select: k must be at least 1");
  const std::size_t n = candidates.size();
  std::vector<std::size_t> picked;
  if (k >= n) {
    for (std::size_t i = 0; i < n; ++i) picked.push_back(i);
    return picked;
  }
  Rng rng(seed);
  const std::size_t first = rng.index(n);
  picked.push_back(first);
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  while (picked.size() < k) {
    const auto& last = candidates[picked.back()].translation;
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      dist[i] = std::min(dist[i], (candidates[i].translation - last).norm());
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      if (dist[i] > best_d) {
        best_d = dist[i];
        best = i;
      }
    }
    picked.push_back(best);
  }
  if (n > kExactFpsLimit || k < 2) return picked;

  const double greedy = detail::subset_min_distance(candidates, picked);
  double best_any = greedy, best_with_first = -1.0;
  std::vector<std::size_t> any, with_first;
  detail::for_each_subset(n, k, [&](const std::vector<std::size_t>& idx) {
    const double d = detail::subset_min_distance(candidates, idx);
    if (d > best_any) {
      best_any = d;
      any = idx;
    }
    if (std::find(idx.begin(), idx.end(), first) != idx.end() && d > best_with_first) {
      best_with_first = d;
      with_first = idx;
    }
  });
  if (best_any <= greedy) return picked;
  std::vector<std::size_t> chosen = best_with_first >= best_any ? with_first : any;
  // Keep the seeded pick in front when it survived.
  auto it = std::find(chosen.begin(), chosen.end(), first);
  if (it != chosen.end()) std::rotate(chosen.begin(), it, it + 1);
  return chosen;
}

inline std::vector<GraspCandidate> fps_select(const std::vector<GraspCandidate>& candidates, std::size_t k,
                                              std::uint64_t seed) {
  std::vector<GraspCandidate> out;
  for (auto i : fps_indices(candidates, k, seed)) out.push_back(candidates[i]);
  return out;
}

/// True when some pair in `subset` is at least a third of the object's
/// dominant length apart.
inline bool diversity_gate(const std::vector<GraspCandidate>& subset, double dominant_length) {
  const double need = dominant_length / 3.0;
  for (std::size_t a = 0; a < subset.size(); ++a) {
    for (std::size_t b = a + 1; b < subset.size(); ++b) {
      if ((subset[a].translation - subset[b].translation).norm() >= need) return true;
    }
  }
  return false;
}

inline bool diversity_gate(const std::vector<GraspCandidate>& subset, const geometry::GeomSummary& object) {
  return diversity_gate(subset, object.dominant_length);
}

}  // namespace handover::grasp
