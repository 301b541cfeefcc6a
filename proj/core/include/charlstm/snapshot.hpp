#pragma once

// Flat binary model snapshots: 8-byte magic "CHARLSTM", u32 version, u64
// vocab, u64 hidden, then every tensor as little-endian doubles in the
// canonical tensor order.

#include <filesystem>

#include "charlstm/model.hpp"

namespace charlstm {

void save_model(const ModelParams& params, const std::filesystem::path& path);
ModelParams load_model(const std::filesystem::path& path);

}  // namespace charlstm
