#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoxray {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Error hierarchy. Every failure surfaced by the library derives from Error.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A point lies outside the region where a metric (or field) is defined.
class DomainError : public Error {
public:
    using Error::Error;
};

// Invalid argument combination (non-positive steps, too few samples, ...).
class ParameterError : public Error {
public:
    using Error::Error;
};

// The ODE integrator could not make progress.
class IntegrationError : public Error {
public:
    using Error::Error;
};

// A field that must be compactly supported touches the boundary collar.
class SupportError : public Error {
public:
    using Error::Error;
};

// An operation that requires a simple metric was given a non-simple one.
class SimplicityError : public Error {
public:
    using Error::Error;
};

// An internal invariant that the mathematics guarantees was violated.
class ConsistencyError : public Error {
public:
    using Error::Error;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    constexpr Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2& operator+=(Vec2 o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
};

constexpr double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }
constexpr double norm2(Vec2 a) { return a.x * a.x + a.y * a.y; }
inline Vec2 unit(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

// A scalar function on the plane, used for analytic phantoms and samplers.
using FieldFunction = std::function<double(Vec2)>;
// Function on the sphere bundle: (x, theta).
using SMFunction = std::function<double(Vec2, double)>;

// Fixed-order pairwise summation; results do not depend on thread count.
double pairwise_sum(std::span<const double> v);

// Sets the worker cap used by parallel_for. 0 restores the hardware default.
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is visited exactly once; callers
// write to disjoint outputs so results are independent of the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace geoxray
