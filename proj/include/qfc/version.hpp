#pragma once

namespace qfc {

inline constexpr const char* kVersion = "0.1.0";

/// Version stamped into every machine-readable CLI document.
inline constexpr int kSchemaVersion = 1;

} // namespace qfc
