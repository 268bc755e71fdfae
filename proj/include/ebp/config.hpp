#pragma once

// Model configuration text.
//
//   [model]
//   name = my-model
//   first_crossing = 0.5          # only consulted when u = 1 and v = 0
//
//   [orientation_law]
//   family = geometric            # geometric | constant | table
//   p = 0.5                       # or p_up / p_down
//   updown = 0.5                  # or updown_up / updown_down
//   count = 1                     # constant family; or count_up / count_down
//   ++   = 0.5                    # table rows: pattern = probability; the
//   +-++ = 0.5                    # last symbol names the parent.  Rows for
//                                 # one parent only are mirrored.
//
//   [weight_law]
//   mode = iid                    # constant | iid | table
//   family = gamma                # deterministic | gamma | lognormal
//   shape = 2                     # gamma; scale defaults to 1
//   value = 0.25                  # deterministic
//   mu = 0 / sigma = 0.5          # lognormal
//   orientation_dependent = false # true: use the _up / _down suffixed keys
//   normalize = true
//   +-++ = 0.3 0.2 0.25 0.25      # table mode: weights per pattern row
//
// '#' and ';' start comments.  Errors carry the line number.

#include <filesystem>
#include <string>
#include <string_view>

#include "ebp/model.hpp"

namespace ebp {

ModelSpec parse_model_config(std::string_view text, std::string_view source = "<config>");
ModelSpec load_model_config(const std::filesystem::path& path);

// Canonical text that parses back to the same model: normalization off,
// every parameter spelled out per parent, 17 significant digits.
std::string model_to_config(const ModelSpec& model);

}  // namespace ebp
