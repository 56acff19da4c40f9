#pragma once

// Structural markers the synthetic generator plants in chat text and the
// mock oracles key on. Kept in one place so both sides stay in sync.

#include <string>

namespace driftline {

// A turn opening a new theme starts with "[theme:<title>]".
inline constexpr const char* kThemeMarkerPrefix = "[theme:";
inline constexpr char kThemeMarkerSuffix = ']';

// A turn carrying concern text starts with "[c]".
inline constexpr const char* kConcernTag = "[c]";

// Conjunction joining two standalone concerns inside one tagged turn.
inline constexpr const char* kConjunctionMarker = "&&";

}  // namespace driftline
