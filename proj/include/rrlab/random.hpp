#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rrlab {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

namespace detail {
inline std::uint64_t mix_part(std::uint64_t h, std::uint64_t v) {
  return splitmix64(h ^ splitmix64(v));
}
inline std::uint64_t mix_part(std::uint64_t h, std::string_view v) {
  return mix_part(h, fnv1a(v));
}
inline std::uint64_t mix_part(std::uint64_t h, const char* v) {
  return mix_part(h, std::string_view(v));
}
template <typename T>
  requires std::is_integral_v<T>
inline std::uint64_t mix_part(std::uint64_t h, T v) {
  return mix_part(h, static_cast<std::uint64_t>(v));
}
}  // namespace detail

/// Child seed = hash(root, parts...). Stable across platforms: only
/// splitmix64 and FNV-1a are involved, never std::hash.
template <typename... Parts>
std::uint64_t derive_seed(std::uint64_t root, const Parts&... parts) {
  std::uint64_t h = splitmix64(root);
  ((h = detail::mix_part(h, parts)), ...);
  return h;
}

template <typename... Parts>
Rng derive_rng(std::uint64_t root, const Parts&... parts) {
  return Rng(derive_seed(root, parts...));
}

}  // namespace rrlab
