// vec3.hpp: minimal 3-vector used for particle and field momenta

#pragma once

#include <array>
#include <cmath>

namespace stochlim {

using Vec3 = std::array<double, 3>;

inline constexpr Vec3 operator+(const Vec3& a, const Vec3& b) noexcept {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}
inline constexpr Vec3 operator-(const Vec3& a, const Vec3& b) noexcept {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}
inline constexpr Vec3 operator*(double s, const Vec3& a) noexcept {
    return {s * a[0], s * a[1], s * a[2]};
}
inline constexpr double dot(const Vec3& a, const Vec3& b) noexcept {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm(const Vec3& a) noexcept { return std::sqrt(dot(a, a)); }

}  // namespace stochlim
