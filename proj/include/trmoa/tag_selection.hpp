#pragma once

#include <span>
#include <vector>

#include "trmoa/influence.hpp"

namespace trmoa {

struct TagSelectionParams {
  // Stop once the best marginal gain drops below omega * current influence.
  double omega = 0.01;
};

struct TagSelection {
  // Selected tags in insertion order.
  std::vector<TagId> tags;
  // Marginal gain recorded when each tag was admitted.
  std::vector<double> gains;
};

// Adaptive greedy tag refinement. Repeatedly admits the candidate with the
// largest gain in sum_u Pr(u | T'), ties to the smallest tag id, and stops when
// that gain is below omega * sum_u Pr(u | T'), is not positive, or no
// candidates remain. Duplicate candidates are ignored.
TagSelection select_tags(std::span<const TagId> candidates, const InfluenceEngine& engine,
                         const TagSelectionParams& params);

}  // namespace trmoa
