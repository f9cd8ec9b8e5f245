#pragma once

#include <cstdint>

namespace extrude3d {

/// Semantic class identifier. Values 0..254 are legal class ids; 255 is
/// reserved as the VOID (unlabeled / ignore) marker. The built-in taxonomy
/// covers ids 0..14.
using ClassId = std::uint8_t;

inline constexpr ClassId kVoidLabel = 255;
inline constexpr int kNumClasses = 15;

/// True for ids belonging to the built-in 15-class taxonomy.
constexpr bool is_taxonomy_id(ClassId id) { return id < kNumClasses; }

using PointId = std::uint32_t;
using ViewId = std::uint32_t;

}  // namespace extrude3d
