// Copyright 2026 The SMOClust Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "smoclust/core.hpp"
#include "smoclust/rng.hpp"

namespace smoclust {

using Point = std::vector<double>;

struct HyperSphere {
    Point centre;
    double radius = 0.0;

    std::size_t dims() const { return centre.size(); }

    bool contains(std::span<const double> p, double tolerance = 1e-9) const;

    bool operator==(const HyperSphere&) const = default;
};

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw PreconditionError("dimension mismatch in distance");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

inline double distance(std::span<const double> a, std::span<const double> b) {
    return std::sqrt(squared_distance(a, b));
}

inline double norm(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc);
}

inline bool HyperSphere::contains(std::span<const double> p, double tolerance) const {
    return distance(p, centre) <= radius * (1.0 + tolerance) + tolerance;
}

/// Uniformly distributed unit vector in n dimensions (Muller's method:
/// normalise a standard normal vector).
inline Point unit_direction(std::size_t n, Rng& rng) {
    if (n == 0) throw PreconditionError("direction needs at least one dimension");
    Point v(n);
    for (;;) {
        for (auto& x : v) x = rng.normal();
        const double len = norm(v);
        if (len >= 1e-12) {
            for (auto& x : v) x /= len;
            return v;
        }
    }
}

/// Coefficients of the quadratic A t^2 + B t + C = 0 obtained by substituting
/// the line origin + t * (through - origin) into the sphere equation.
struct InterceptQuadratic {
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
};

inline InterceptQuadratic intercept_quadratic(std::span<const double> origin, std::span<const double> through,
                                              const HyperSphere& sphere) {
    if (origin.size() != sphere.dims() || through.size() != sphere.dims())
        throw PreconditionError("line and sphere dimensions differ");
    InterceptQuadratic q;
    double cross = 0.0;
    double gamma_sq = 0.0;
    for (std::size_t i = 0; i < sphere.dims(); ++i) {
        const double delta = through[i] - origin[i];
        const double gamma = sphere.centre[i] - origin[i];
        q.a += delta * delta;
        cross += delta * gamma;
        gamma_sq += gamma * gamma;
    }
    q.b = -2.0 * cross;
    q.c = gamma_sq - sphere.radius * sphere.radius;
    return q;
}

/// Positive root t of the line/hull intersection; origin + t * (through -
/// origin) lies on the hull in the direction of travel.
inline double positive_intercept(std::span<const double> origin, std::span<const double> through,
                                 const HyperSphere& sphere) {
    const auto q = intercept_quadratic(origin, through, sphere);
    if (!(q.a > 0.0)) throw PreconditionError("line direction is degenerate");
    if (!(q.c < 0.0)) throw PreconditionError("line origin must lie strictly inside the sphere");
    const double disc = q.b * q.b - 4.0 * q.a * q.c;
    if (disc < 0.0) throw InternalError("negative discriminant for an interior origin");
    const double root = std::sqrt(disc);
    // Same root as (-B + sqrt(disc)) / 2A, written to avoid cancellation when B > 0.
    if (q.b <= 0.0) return (-q.b + root) / (2.0 * q.a);
    return (2.0 * q.c) / (-q.b - root);
}

/// Deterministic core of skewed sampling: walks |g| along the given unit
/// direction from the anchor, clamped at the hull.
inline Point skewed_point(std::span<const double> anchor, const HyperSphere& sphere, std::span<const double> direction,
                          double g) {
    Point through(anchor.begin(), anchor.end());
    for (std::size_t i = 0; i < through.size(); ++i) through[i] += direction[i];
    const double t_hull = positive_intercept(anchor, through, sphere);
    const double t = std::min(std::abs(g), t_hull);
    Point out(anchor.begin(), anchor.end());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * direction[i];
    return out;
}

/// Sample inside the sphere with the density peak at the anchor: random
/// direction, positive hull intercept t, distance |N(0, (t/3)^2)| clamped at t.
inline Point skewed_sample(std::span<const double> anchor, const HyperSphere& sphere, Rng& rng) {
    if (anchor.size() != sphere.dims()) throw PreconditionError("anchor and sphere dimensions differ");
    if (sphere.radius <= 0.0) return sphere.centre;
    if (!(squared_distance(anchor, sphere.centre) < sphere.radius * sphere.radius))
        throw PreconditionError("anchor must lie strictly inside the sphere");
    const Point dir = unit_direction(sphere.dims(), rng);
    Point through(anchor.begin(), anchor.end());
    for (std::size_t i = 0; i < through.size(); ++i) through[i] += dir[i];
    const double t_hull = positive_intercept(anchor, through, sphere);
    const double g = rng.normal(0.0, t_hull / 3.0);
    return skewed_point(anchor, sphere, dir, g);
}

namespace detail {

inline Point raw_gaussian(const HyperSphere& sphere, Rng& rng) {
    Point p(sphere.centre);
    const double sd = sphere.radius / 3.0;
    for (auto& x : p) x = rng.normal(x, sd);
    return p;
}

}  // namespace detail

/// Isotropic Gaussian around the centre with sd = radius / 3. Draws landing
/// outside the sphere are redrawn up to 100 times, then pulled radially onto
/// the hull.
inline Point gaussian_in_sphere(const HyperSphere& sphere, Rng& rng) {
    if (sphere.radius <= 0.0) return sphere.centre;
    const double r2 = sphere.radius * sphere.radius;
    Point p;
    for (int attempt = 0; attempt < 100; ++attempt) {
        p = detail::raw_gaussian(sphere, rng);
        if (squared_distance(p, sphere.centre) <= r2) return p;
    }
    const double d = distance(p, sphere.centre);
    for (std::size_t i = 0; i < p.size(); ++i)
        p[i] = sphere.centre[i] + (p[i] - sphere.centre[i]) * (sphere.radius / d);
    return p;
}

}  // namespace smoclust
