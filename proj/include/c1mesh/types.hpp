#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace c1mesh {

// Points and vectors in R^2 or R^3. The z slot is kept zero in 2D so that
// most geometric code does not branch on the dimension.
using Vec = std::array<double, 3>;

inline Vec vec2(double x, double y) { return {x, y, 0.0}; }
inline Vec vec3(double x, double y, double z) { return {x, y, z}; }

inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec operator*(const Vec& a, double s) { return s * a; }
inline Vec operator/(const Vec& a, double s) { return {a[0] / s, a[1] / s, a[2] / s}; }
inline Vec& operator+=(Vec& a, const Vec& b) { a = a + b; return a; }
inline Vec& operator-=(Vec& a, const Vec& b) { a = a - b; return a; }

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline Vec cross(const Vec& a, const Vec& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline Vec normalized(const Vec& a) {
    const double n = norm(a);
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return a / n;
}

// Error categories; the CLI maps them to exit codes.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RegularityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace c1mesh
