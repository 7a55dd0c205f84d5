#pragma once

#include <array>
#include <cmath>
#include <limits>

namespace qconf {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }

    double norm() const { return std::hypot(x, y); }
    double norm1() const { return std::abs(x) + std::abs(y); }

    bool finite() const { return std::isfinite(x) && std::isfinite(y); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

// Row-major 2x2 matrix. Enough linear algebra for derivative data;
// anything bigger goes through Eigen.
struct Mat2 {
    double a = 1.0, b = 0.0;
    double c = 0.0, d = 1.0;

    static Mat2 identity() { return {}; }
    static Mat2 diag(double s, double t) { return {s, 0.0, 0.0, t}; }

    double det() const { return a * d - b * c; }

    Vec2 apply(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }

    Mat2 operator*(const Mat2& o) const {
        return {a * o.a + b * o.c, a * o.b + b * o.d,
                c * o.a + d * o.c, c * o.b + d * o.d};
    }

    Mat2 inverse() const {
        const double dd = det();
        return {d / dd, -b / dd, -c / dd, a / dd};
    }

    double frobenius() const { return std::sqrt(a * a + b * b + c * c + d * d); }

    // Singular values via the closed form for 2x2 matrices. The smaller one
    // is recovered as |det|/sigma_max to stay accurate near rank deficiency.
    std::array<double, 2> singular_values() const {
        const double f2 = a * a + b * b + c * c + d * d;
        const double dt = det();
        double disc = f2 * f2 - 4.0 * dt * dt;
        if (disc < 0.0) disc = 0.0;
        const double s1sq = 0.5 * (f2 + std::sqrt(disc));
        const double s1 = std::sqrt(s1sq);
        const double s2 = (s1 > 0.0) ? std::abs(dt) / s1 : 0.0;
        return {s1, s2};
    }
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace qconf
