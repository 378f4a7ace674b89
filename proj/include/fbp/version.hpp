#pragma once

namespace fbp {
inline constexpr const char* kVersion = "0.1.0";
}
