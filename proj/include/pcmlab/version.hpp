#pragma once

namespace pcmlab {
inline constexpr const char* kToolVersion = "0.1.0";
}
