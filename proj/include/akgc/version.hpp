#pragma once

namespace akgc {

inline constexpr const char* kToolkitVersion = "0.1.0";
inline constexpr unsigned kCheckpointFormatVersion = 1;

} // namespace akgc
