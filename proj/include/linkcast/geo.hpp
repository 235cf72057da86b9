#pragma once

// Geographic primitives: great-circle distance and bearing, heading
// quadrants, cyclic encodings, a local planar projection and the hexagonal
// cell index used by all spatial aggregation.

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

namespace linkcast {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kPi = 3.14159265358979323846;
// Latitudes above this are rejected by the planar projection.
inline constexpr double kPolarGuardDeg = 89.0;

constexpr double deg2rad(double d) { return d * kPi / 180.0; }
constexpr double rad2deg(double r) { return r * 180.0 / kPi; }

struct InvalidGeoPoint : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CoincidentPoints : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct PolarRegion : std::domain_error {
    using std::domain_error::domain_error;
};

// Wraps a longitude into [-180, 180).
double normalize_lon(double lon_deg);

// Shortest signed longitude difference, in [-180, 180).
double wrap_delta_lon(double dlon_deg);

struct GeoPoint {
    double lat = 0.0;  // degrees in [-90, 90]
    double lon = 0.0;  // degrees in [-180, 180)

    GeoPoint() = default;
    GeoPoint(double latitude_deg, double longitude_deg);

    bool operator==(const GeoPoint&) const = default;
};

enum class HeadingQuadrant { NE = 0, SE = 1, SW = 2, NW = 3 };

const char* to_string(HeadingQuadrant q);
HeadingQuadrant quadrant_from_string(const std::string& s);

// Axial hex cell relative to a grid anchor. Same origin + same (q, r)
// means the same cell.
struct HexIndex {
    long long q = 0;
    long long r = 0;
    GeoPoint origin;

    bool operator==(const HexIndex&) const = default;
};

struct LocalXY {
    double x_km = 0.0;  // east
    double y_km = 0.0;  // north
};

// Great-circle distance, mean sphere radius 6371.0 km.
double haversine_km(const GeoPoint& a, const GeoPoint& b);

// Initial great-circle bearing a->b, degrees in [0, 360), 0 = north,
// clockwise. Throws CoincidentPoints when a == b.
double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b);

// NE for [0,90), SE for [90,180), SW for [180,270), NW for [270,360).
// Out-of-range bearings are wrapped first.
HeadingQuadrant quadrant_of(double bearing_deg);

// (sin, cos) of 2*pi*value/period. period must be > 0.
std::pair<double, double> cyclic_encode(double value, double period);

// Equirectangular projection anchored at origin:
//   x = dlon * cos(origin.lat) * (pi*R/180), y = dlat * (pi*R/180).
// Throws PolarRegion when |p.lat| or |origin.lat| >= 89.
LocalXY to_local_km(const GeoPoint& p, const GeoPoint& origin);
GeoPoint from_local_km(const LocalXY& xy, const GeoPoint& origin);

// Pointy-top axial hex cell of p on a grid anchored at origin.
// Circumradius (center to vertex) in km.
HexIndex hex_index(const GeoPoint& p, const GeoPoint& origin,
                   double circumradius_km = 50.0);

// Geographic center of a hex cell (inverse of hex_index).
GeoPoint hex_center(const HexIndex& h, double circumradius_km = 50.0);

// Point reached from `from` along the initial bearing for `distance_km`
// on the sphere.
GeoPoint destination_point(const GeoPoint& from, double bearing_deg,
                           double distance_km);

}  // namespace linkcast
