#pragma once

namespace covsv {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace covsv
