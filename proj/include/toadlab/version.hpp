#pragma once

namespace toadlab {

inline constexpr const char* kVersion = "toadlab 0.1.0";

} // namespace toadlab
