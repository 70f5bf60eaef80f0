#pragma once

#include <string>

#include "geoforge/diffusion.hpp"

namespace geoforge {

// Versioned binary container: magic, version, model config, schedule betas,
// optimizer state, RNG state, loss history, then named parameter tensors
// (values + Adam moments) as little-endian 64-bit floats.
// Resuming from a checkpoint reproduces subsequent training bit-identically.
void save_checkpoint(const std::string& path, const TrainState& st);
TrainState load_checkpoint(const std::string& path);

}  // namespace geoforge
