// SPDX-License-Identifier: Apache-2.0
//
// beamscan: directional 60 GHz channel-sounder simulation and analysis
// Copyright (C) 2026 The beamscan authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef BEAMSCAN_GEOMETRY_HPP
#define BEAMSCAN_GEOMETRY_HPP

#include <cmath>
#include <numbers>

namespace beamscan
{

// Point or direction in the fixed room frame, meters, z up.
struct Point3
{
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend bool operator==(const Point3 &, const Point3 &) = default;
};

using Vec3 = Point3;

inline Point3 operator+(const Point3 &a, const Point3 &b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3 operator-(const Point3 &a, const Point3 &b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3 operator*(double s, const Point3 &a) { return {s * a.x, s * a.y, s * a.z}; }
inline Point3 operator*(const Point3 &a, double s) { return s * a; }

inline double dot(const Vec3 &a, const Vec3 &b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3 &a, const Vec3 &b)
{
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3 &a) { return std::sqrt(dot(a, a)); }
inline double distance(const Point3 &a, const Point3 &b) { return norm(a - b); }

inline Vec3 normalized(const Vec3 &a)
{
    const double n = norm(a);
    return {a.x / n, a.y / n, a.z / n};
}

inline bool is_finite(const Point3 &p)
{
    return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z);
}

inline constexpr double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

// Speed of light in m/ns.
inline constexpr double kLightSpeedMPerNs = 0.299792458;
inline constexpr double kLightSpeedMPerS = 299792458.0;

} // namespace beamscan

#endif
