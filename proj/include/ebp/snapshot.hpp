#pragma once

// Versioned JSON snapshot of a simulator: the model in canonical config form
// plus every field of the state, including both generator counters.  Doubles
// are written with 17 significant digits, so a restored simulator continues
// bit for bit.

#include <filesystem>
#include <string>
#include <string_view>

#include "ebp/engine.hpp"

namespace ebp {

inline constexpr int kSnapshotVersion = 1;

std::string save_snapshot(const Simulator& sim);
Simulator load_snapshot(std::string_view text);

void write_snapshot_file(const Simulator& sim, const std::filesystem::path& path);
Simulator read_snapshot_file(const std::filesystem::path& path);

}  // namespace ebp
