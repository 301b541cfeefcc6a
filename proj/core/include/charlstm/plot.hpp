#pragma once

// Self-contained SVG renderings of benchmark checkpoint curves: one polyline
// per run, test perplexity against sequences seen or training wall time.
// Schedule colors: 1 blue, 2 red, 3 green, 4 yellow.

#include <filesystem>
#include <vector>

#include "charlstm/bench.hpp"

namespace charlstm {

enum class CurveAxis { sequences, wall_ms };

const char* schedule_color(int schedule);

void render_curves(const std::vector<CheckpointRecord>& records, CurveAxis axis,
                   const std::filesystem::path& path, bool log_y = false);

}  // namespace charlstm
