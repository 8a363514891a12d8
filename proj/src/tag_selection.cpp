#include "trmoa/tag_selection.hpp"

#include <algorithm>

#include "trmoa/error.hpp"

namespace trmoa {

TagSelection select_tags(std::span<const TagId> candidates, const InfluenceEngine& engine,
                         const TagSelectionParams& params) {
  if (!(params.omega > 0.0 && params.omega < 1.0)) {
    throw InvalidInput("omega must lie in (0, 1)");
  }
  std::vector<TagId> remaining(candidates.begin(), candidates.end());
  std::sort(remaining.begin(), remaining.end());
  remaining.erase(std::unique(remaining.begin(), remaining.end()), remaining.end());

  // miss[u] = prod over selected tags of (1 - Pr(u | x)).
  std::vector<double> miss(engine.user_count(), 1.0);
  double current = 0.0;
  TagSelection out;

  while (!remaining.empty()) {
    std::size_t best = 0;
    double best_gain = -1.0;
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      double g = 0.0;
      for (const auto& e : engine.users_with_tag(remaining[i])) g += miss[e.user] * e.prob;
      // `remaining` is ascending, so strict > keeps the smallest id on ties.
      if (g > best_gain) {
        best_gain = g;
        best = i;
      }
    }
    if (best_gain <= 0.0 || best_gain < params.omega * current) break;

    const TagId t = remaining[best];
    for (const auto& e : engine.users_with_tag(t)) miss[e.user] *= 1.0 - e.prob;
    current += best_gain;
    out.tags.push_back(t);
    out.gains.push_back(best_gain);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return out;
}

}  // namespace trmoa
