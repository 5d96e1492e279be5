#pragma once

namespace strategem {

inline constexpr const char kVersionString[] = "0.1.0";

}  // namespace strategem
