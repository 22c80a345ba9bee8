// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cmath>

namespace geotopics {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

/// Unit-length direction on the 2-sphere. Construction validates the norm
/// (1e-6 slack) and renormalizes, so stored values hold ||v|| = 1 to
/// machine precision.
class UnitVec3 {
 public:
  /// Throws InvalidVectorError if | ||v|| - 1 | > 1e-6 or v is non-finite.
  static UnitVec3 from(const Vec3& v);

  const Vec3& vec() const { return v_; }
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }
  double dot(const UnitVec3& o) const { return v_.dot(o.v_); }
  double dot(const Vec3& o) const { return v_.dot(o); }

 private:
  explicit UnitVec3(const Vec3& v) : v_(v) {}
  Vec3 v_{1.0, 0.0, 0.0};
};

/// Geographic coordinates in degrees: lat in [-90, 90], lon in (-180, 180].
struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;
};

/// Validates lat and wraps lon into (-180, 180]; -180 collapses to 180.
/// Throws InvalidCoordinateError on non-finite or out-of-range lat.
GeoPoint make_geo_point(double lat_deg, double lon_deg);

/// (cos lat cos lon, cos lat sin lon, sin lat). Throws
/// InvalidCoordinateError when p violates the GeoPoint ranges.
UnitVec3 latlon_to_unit(const GeoPoint& p);

/// Inverse of latlon_to_unit; at the poles longitude is reported as 0.
GeoPoint unit_to_latlon(const UnitVec3& v);

}  // namespace geotopics
