#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slump/autograd.hpp"
#include "slump/models.hpp"

namespace slump {

struct GradCheckRow {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t coords = 0;
};

inline constexpr double kGradCheckTolerance = 1e-4;

// Finite-difference checks of every layer primitive on randomized small f64
// configurations, `seeds` configurations per primitive.
std::vector<GradCheckRow> primitive_grad_checks(std::uint64_t seeds = 10);

// End-to-end f64 check of a model: forward in train mode + MAE against fixed
// labels. One row per layer (its parameter tensors), one for the input batch,
// and a final "end-to-end" row holding the maximum. `coords` caps the checked
// coordinates per tensor (0 = all).
std::vector<GradCheckRow> model_grad_check(ModelId id, InputShape input, std::int64_t batch, std::uint64_t seed,
                                           std::size_t coords = 12);

}  // namespace slump
