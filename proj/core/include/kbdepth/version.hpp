#ifndef KBDEPTH_VERSION_HPP_
#define KBDEPTH_VERSION_HPP_

namespace kbdepth {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kbdepth

#endif  // KBDEPTH_VERSION_HPP_
