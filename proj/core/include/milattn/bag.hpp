#pragma once

#include <cstddef>
#include <vector>

#include "milattn/matrix.hpp"

namespace milattn {

/// One data point: M instance vectors with hidden population labels.
///
/// `instance_labels` are never shown to the model during training; they are
/// only read by the explanation metrics.
struct Bag {
  Matrix instances;                 // M x input_dim
  std::vector<int> instance_labels; // population 0, 1 or 2 per instance
  int label = 0;                    // bag label in {0, 1}

  std::size_t size() const noexcept { return instance_labels.size(); }
};

}  // namespace milattn
