#include "optalarm/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace optalarm {

double normalize_angle(double theta) {
  if (!std::isfinite(theta)) {
    throw std::invalid_argument("angle must be finite");
  }
  double wrapped = std::remainder(theta, 2.0 * kPi);  // [-pi, pi]
  if (wrapped <= -kPi) wrapped += 2.0 * kPi;
  return wrapped;
}

Pose::Pose(double x_, double y_, double theta_)
    : x(x_), y(y_), theta(normalize_angle(theta_)) {}

OrientedRect::OrientedRect(Pose center, double length, double width)
    : center_(center), length_(length), width_(width) {
  if (!(length > 0.0) || !(width > 0.0)) {
    throw std::invalid_argument("rectangle dimensions must be positive");
  }
}

namespace {

struct Frame {
  double cx, cy;
  double ux, uy;  // unit heading
  double half_len, half_wid;
};

Frame frame_of(const OrientedRect& r) {
  const Pose& p = r.center();
  return {p.x, p.y, std::cos(p.theta), std::sin(p.theta), 0.5 * r.length(),
          0.5 * r.width()};
}

// Projection radius of `r` onto unit axis (ax, ay).
double radius_on(const Frame& r, double ax, double ay) {
  const double along = std::abs(r.ux * ax + r.uy * ay);
  const double across = std::abs(-r.uy * ax + r.ux * ay);
  return r.half_len * along + r.half_wid * across;
}

bool separated_on(const Frame& a, const Frame& b, double ax, double ay) {
  const double dist = std::abs((b.cx - a.cx) * ax + (b.cy - a.cy) * ay);
  return dist > radius_on(a, ax, ay) + radius_on(b, ax, ay);
}

}  // namespace

bool rect_overlap(const OrientedRect& a, const OrientedRect& b) {
  const Frame fa = frame_of(a);
  const Frame fb = frame_of(b);
  // Rectangles have two distinct edge normals each.
  if (separated_on(fa, fb, fa.ux, fa.uy)) return false;
  if (separated_on(fa, fb, -fa.uy, fa.ux)) return false;
  if (separated_on(fa, fb, fb.ux, fb.uy)) return false;
  if (separated_on(fa, fb, -fb.uy, fb.ux)) return false;
  return true;
}

OrientedRect inflate(const OrientedRect& r, double margin) {
  if (!(margin >= 0.0)) {
    throw std::invalid_argument("margin must be non-negative");
  }
  return OrientedRect(r.center(), r.length() + 2.0 * margin,
                      r.width() + 2.0 * margin);
}

}  // namespace optalarm
