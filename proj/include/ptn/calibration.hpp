#pragma once

#include "ptn/core.hpp"

namespace ptn {

/// Mean support-pool feature minus mean query feature.
Vec cross_class_bias(const EpisodeData& episode);

/// Shift every query vector by delta; support pool is untouched.
EpisodeData calibrate_queries(const EpisodeData& episode, const Vec& delta);

}  // namespace ptn
