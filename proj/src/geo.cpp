#include "linkcast/geo.hpp"

#include <algorithm>

namespace linkcast {

double normalize_lon(double lon_deg) {
    double x = std::fmod(lon_deg + 180.0, 360.0);
    if (x < 0.0) x += 360.0;
    return x - 180.0;
}

double wrap_delta_lon(double dlon_deg) { return normalize_lon(dlon_deg); }

GeoPoint::GeoPoint(double latitude_deg, double longitude_deg) {
    if (!std::isfinite(latitude_deg) || !std::isfinite(longitude_deg))
        throw InvalidGeoPoint("GeoPoint: coordinates must be finite");
    if (latitude_deg < -90.0 || latitude_deg > 90.0)
        throw InvalidGeoPoint("GeoPoint: latitude out of [-90, 90]: " +
                              std::to_string(latitude_deg));
    lat = latitude_deg;
    lon = normalize_lon(longitude_deg);
}

const char* to_string(HeadingQuadrant q) {
    switch (q) {
        case HeadingQuadrant::NE: return "NE";
        case HeadingQuadrant::SE: return "SE";
        case HeadingQuadrant::SW: return "SW";
        case HeadingQuadrant::NW: return "NW";
    }
    return "NE";
}

HeadingQuadrant quadrant_from_string(const std::string& s) {
    if (s == "NE") return HeadingQuadrant::NE;
    if (s == "SE") return HeadingQuadrant::SE;
    if (s == "SW") return HeadingQuadrant::SW;
    if (s == "NW") return HeadingQuadrant::NW;
    throw std::invalid_argument("unknown heading quadrant: " + s);
}

double haversine_km(const GeoPoint& a, const GeoPoint& b) {
    // |dlam| may exceed 180; sin^2(x/2) folds it back, no wrap needed.
    // Absolute differences keep the function bit-symmetric in (a, b).
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dphi = deg2rad(std::fabs(b.lat - a.lat));
    const double dlam = deg2rad(std::fabs(b.lon - a.lon));
    const double s1 = std::sin(0.5 * dphi), s2 = std::sin(0.5 * dlam);
    const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

double initial_bearing_deg(const GeoPoint& a, const GeoPoint& b) {
    if (a == b)
        throw CoincidentPoints("initial_bearing_deg: points coincide");
    const double phi1 = deg2rad(a.lat), phi2 = deg2rad(b.lat);
    const double dlam = deg2rad(wrap_delta_lon(b.lon - a.lon));
    const double y = std::sin(dlam) * std::cos(phi2);
    const double x = std::cos(phi1) * std::sin(phi2) -
                     std::sin(phi1) * std::cos(phi2) * std::cos(dlam);
    double deg = rad2deg(std::atan2(y, x));
    deg = std::fmod(deg + 360.0, 360.0);
    if (deg >= 360.0) deg = 0.0;
    return deg;
}

HeadingQuadrant quadrant_of(double bearing_deg) {
    double b = std::fmod(bearing_deg, 360.0);
    if (b < 0.0) b += 360.0;
    if (b < 90.0) return HeadingQuadrant::NE;
    if (b < 180.0) return HeadingQuadrant::SE;
    if (b < 270.0) return HeadingQuadrant::SW;
    return HeadingQuadrant::NW;
}

std::pair<double, double> cyclic_encode(double value, double period) {
    if (!(period > 0.0))
        throw std::invalid_argument("cyclic_encode: period must be > 0");
    const double theta = 2.0 * kPi * value / period;
    return {std::sin(theta), std::cos(theta)};
}

namespace {
constexpr double kKmPerDeg = kPi * kEarthRadiusKm / 180.0;

void check_projectable(const GeoPoint& p) {
    if (std::fabs(p.lat) >= kPolarGuardDeg)
        throw PolarRegion("to_local_km: latitude too close to a pole: " +
                          std::to_string(p.lat));
}
}  // namespace

LocalXY to_local_km(const GeoPoint& p, const GeoPoint& origin) {
    check_projectable(p);
    check_projectable(origin);
    const double dlon = wrap_delta_lon(p.lon - origin.lon);
    const double dlat = p.lat - origin.lat;
    return {dlon * std::cos(deg2rad(origin.lat)) * kKmPerDeg,
            dlat * kKmPerDeg};
}

GeoPoint from_local_km(const LocalXY& xy, const GeoPoint& origin) {
    check_projectable(origin);
    const double dlat = xy.y_km / kKmPerDeg;
    const double dlon = xy.x_km / (std::cos(deg2rad(origin.lat)) * kKmPerDeg);
    return GeoPoint(origin.lat + dlat, origin.lon + dlon);
}

HexIndex hex_index(const GeoPoint& p, const GeoPoint& origin,
                   double circumradius_km) {
    const LocalXY xy = to_local_km(p, origin);
    const double s = circumradius_km;
    // fractional axial coordinates, pointy-top layout
    const double qf = (std::sqrt(3.0) / 3.0 * xy.x_km - xy.y_km / 3.0) / s;
    const double rf = (2.0 / 3.0 * xy.y_km) / s;
    // cube rounding
    const double xf = qf, zf = rf, yf = -xf - zf;
    double rx = std::round(xf), ry = std::round(yf), rz = std::round(zf);
    const double dx = std::fabs(rx - xf), dy = std::fabs(ry - yf),
                 dz = std::fabs(rz - zf);
    if (dx > dy && dx > dz)
        rx = -ry - rz;
    else if (dy > dz)
        ry = -rx - rz;
    else
        rz = -rx - ry;
    return HexIndex{static_cast<long long>(rx), static_cast<long long>(rz),
                    origin};
}

GeoPoint hex_center(const HexIndex& h, double circumradius_km) {
    const double s = circumradius_km;
    const double x = s * std::sqrt(3.0) *
                     (static_cast<double>(h.q) + static_cast<double>(h.r) / 2.0);
    const double y = s * 1.5 * static_cast<double>(h.r);
    return from_local_km({x, y}, h.origin);
}

GeoPoint destination_point(const GeoPoint& from, double bearing_deg,
                           double distance_km) {
    const double delta = distance_km / kEarthRadiusKm;
    const double theta = deg2rad(bearing_deg);
    const double phi1 = deg2rad(from.lat);
    const double lam1 = deg2rad(from.lon);
    const double sinphi2 = std::sin(phi1) * std::cos(delta) +
                           std::cos(phi1) * std::sin(delta) * std::cos(theta);
    const double phi2 = std::asin(std::clamp(sinphi2, -1.0, 1.0));
    const double lam2 =
        lam1 + std::atan2(std::sin(theta) * std::sin(delta) * std::cos(phi1),
                          std::cos(delta) - std::sin(phi1) * sinphi2);
    return GeoPoint(rad2deg(phi2), normalize_lon(rad2deg(lam2)));
}

}  // namespace linkcast
