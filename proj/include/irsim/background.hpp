#pragma once

#include "irsim/image.hpp"
#include "irsim/rng.hpp"
#include "irsim/spec.hpp"

namespace irsim {

// Deterministic synthetic background (value noise octaves + cloud blobs).
ImageF make_synthetic_background(const SyntheticBackgroundSpec& spec, Rng& rng);

} // namespace irsim
