#pragma once

namespace splatbudget {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace splatbudget
