#pragma once

namespace tightness {

inline constexpr const char* kVersion = "0.1.0";

}
