#pragma once

namespace qbgeom {

inline constexpr const char* version = "0.1.0";

} // namespace qbgeom
