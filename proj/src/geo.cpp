// Apache License, Version 2.0, refer to LICENSE.txt

#include "geotopics/geo.hpp"

#include <numbers>
#include <string>

#include "geotopics/error.hpp"

namespace geotopics {

namespace {
constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;
}  // namespace

UnitVec3 UnitVec3::from(const Vec3& v) {
  const double n = v.norm();
  if (!std::isfinite(n) || std::abs(n - 1.0) > 1e-6)
    throw InvalidVectorError("UnitVec3: vector norm " + std::to_string(n) +
                             " is not 1 within 1e-6");
  return UnitVec3(v * (1.0 / n));
}

GeoPoint make_geo_point(double lat_deg, double lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg))
    throw InvalidCoordinateError("geo point: non-finite coordinate");
  if (lat_deg < -90.0 || lat_deg > 90.0)
    throw InvalidCoordinateError("geo point: latitude " +
                                 std::to_string(lat_deg) +
                                 " outside [-90, 90]");
  double lon = std::fmod(lon_deg, 360.0);
  if (lon <= -180.0) lon += 360.0;
  if (lon > 180.0) lon -= 360.0;
  return GeoPoint{lat_deg, lon};
}

UnitVec3 latlon_to_unit(const GeoPoint& p) {
  if (!std::isfinite(p.lat) || !std::isfinite(p.lon) || p.lat < -90.0 ||
      p.lat > 90.0 || p.lon <= -180.0 || p.lon > 180.0)
    throw InvalidCoordinateError("latlon_to_unit: invalid geo point (lat " +
                                 std::to_string(p.lat) + ", lon " +
                                 std::to_string(p.lon) + ")");
  const double lat = p.lat * kDegToRad;
  const double lon = p.lon * kDegToRad;
  const double cl = std::cos(lat);
  return UnitVec3::from(
      Vec3{cl * std::cos(lon), cl * std::sin(lon), std::sin(lat)});
}

GeoPoint unit_to_latlon(const UnitVec3& u) {
  const Vec3& v = u.vec();
  const double lat = std::asin(std::min(1.0, std::max(-1.0, v.z)));
  double lon = 0.0;
  // At the poles the horizontal component vanishes and longitude is
  // conventionally 0.
  if (std::hypot(v.x, v.y) > 1e-12) lon = std::atan2(v.y, v.x) * kRadToDeg;
  if (lon <= -180.0) lon = 180.0;
  return GeoPoint{lat * kRadToDeg, lon};
}

}  // namespace geotopics
