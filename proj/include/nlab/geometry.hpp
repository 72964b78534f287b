#pragma once

#include <array>
#include <cmath>

namespace nlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

// Points of the lifted space (x1, x2, t).
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
};

inline Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.t + b.t}; }
inline Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.t - b.t}; }
inline Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.t}; }
inline double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.t * b.t; }
inline double norm(Vec3 a) { return std::sqrt(dot(a, a)); }
inline Vec2 horizontal(Vec3 a) { return {a.x, a.y}; }

struct Segment {
    Vec2 a;
    Vec2 b;

    double length() const { return norm(b - a); }
};

// Exact Euclidean distance from p to the closed segment s.
inline double distance(Vec2 p, const Segment& s) {
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
    return norm(p - (s.a + t * d));
}

// Kahan-compensated accumulator; used wherever reductions must not depend on
// batch layout.
class KahanSum {
public:
    void add(double v) {
        const double y = v - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

}  // namespace nlab
