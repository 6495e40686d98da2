#pragma once

namespace conesep {

inline constexpr const char* kLibraryVersion = "0.1.0";

} // namespace conesep
