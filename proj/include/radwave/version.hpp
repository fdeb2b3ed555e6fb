#pragma once

namespace radwave {
inline constexpr const char* kVersion = "0.1.0";
}
