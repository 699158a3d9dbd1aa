#pragma once

#include <algorithm>
#include <cmath>

namespace gsr {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
    friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
    friend Vec3 operator*(const Vec3& a, double s) { return {a.x * s, a.y * s, a.z * s}; }
    bool operator==(const Vec3&) const = default;
};

inline double norm(const Vec3& v) { return std::sqrt(v.x * v.x + v.y * v.y + v.z * v.z); }

// Unit quaternion, (w, x, y, z) order.
struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    bool operator==(const Quat&) const = default;
};

struct Pose {
    Vec3 position;
    Quat orientation;

    bool operator==(const Pose&) const = default;
};

// Axis-aligned bounding box, componentwise min <= max.
struct Aabb {
    Vec3 min;
    Vec3 max;

    bool operator==(const Aabb&) const = default;

    Vec3 center() const { return {(min.x + max.x) * 0.5, (min.y + max.y) * 0.5, (min.z + max.z) * 0.5}; }
    Vec3 size() const { return max - min; }

    double volume() const {
        Vec3 s = size();
        return s.x * s.y * s.z;
    }

    // Footprint area in the xy plane.
    double horizontal_area() const { return (max.x - min.x) * (max.y - min.y); }

    bool valid() const { return min.x <= max.x && min.y <= max.y && min.z <= max.z; }

    Aabb translated(const Vec3& d) const { return {min + d, max + d}; }

    static Aabb centered(const Vec3& c, const Vec3& full_size) {
        Vec3 h = full_size * 0.5;
        return {c - h, c + h};
    }
};

inline double intersection_volume(const Aabb& a, const Aabb& b) {
    double dx = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
    double dy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
    double dz = std::min(a.max.z, b.max.z) - std::max(a.min.z, b.min.z);
    if (dx <= 0.0 || dy <= 0.0 || dz <= 0.0) return 0.0;
    return dx * dy * dz;
}

inline double horizontal_overlap_area(const Aabb& a, const Aabb& b) {
    double dx = std::min(a.max.x, b.max.x) - std::max(a.min.x, b.min.x);
    double dy = std::min(a.max.y, b.max.y) - std::max(a.min.y, b.min.y);
    if (dx <= 0.0 || dy <= 0.0) return 0.0;
    return dx * dy;
}

inline double horizontal_center_distance(const Aabb& a, const Aabb& b) {
    Vec3 ca = a.center();
    Vec3 cb = b.center();
    double dx = ca.x - cb.x;
    double dy = ca.y - cb.y;
    return std::sqrt(dx * dx + dy * dy);
}

inline bool z_intervals_overlap(const Aabb& a, const Aabb& b) {
    return a.min.z <= b.max.z && b.min.z <= a.max.z;
}

// Strictly positive overlap on all three axes (touching faces do not count).
inline bool volumes_collide(const Aabb& a, const Aabb& b) {
    return intersection_volume(a, b) > 0.0;
}

}  // namespace gsr
