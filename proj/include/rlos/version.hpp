#pragma once

namespace rlos {
inline constexpr const char* kVersion = "0.1.0";
}
