#pragma once

namespace optalarm {

inline constexpr double kPi = 3.14159265358979323846;

/// Wraps an angle into (-pi, pi].
double normalize_angle(double theta);

/// Planar pose. Heading is counterclockwise from +x and normalized on
/// construction.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;

  Pose() = default;
  Pose(double x_, double y_, double theta_);
};

/// Rectangular vehicle footprint centered on a pose. Length runs along the
/// heading, width across it.
class OrientedRect {
 public:
  static constexpr double kDefaultLength = 5.0;
  static constexpr double kDefaultWidth = 2.0;

  explicit OrientedRect(Pose center, double length = kDefaultLength,
                        double width = kDefaultWidth);

  const Pose& center() const { return center_; }
  double length() const { return length_; }
  double width() const { return width_; }

 private:
  Pose center_;
  double length_;
  double width_;
};

/// Closed-set overlap test (touching counts) by separating axes over the
/// four edge normals.
bool rect_overlap(const OrientedRect& a, const OrientedRect& b);

/// Grows length and width by 2*margin. Throws std::invalid_argument for a
/// negative margin.
OrientedRect inflate(const OrientedRect& r, double margin);

}  // namespace optalarm
