#pragma once

namespace ltn {
inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kLayoutVersion = 1;  // h packing layout, see README
}
