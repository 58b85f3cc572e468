#pragma once

namespace momentdro {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace momentdro
