#include <cmath>
#include <random>
#include <stdexcept>

#include <doctest.h>

#include "optalarm/geometry.hpp"
#include "optalarm/random.hpp"
#include "oracle.hpp"

using namespace optalarm;

namespace {

OrientedRect random_rect(Rng& rng, double spread) {
  std::uniform_real_distribution<double> pos(-spread, spread);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  std::uniform_real_distribution<double> len(0.5, 6.0);
  return OrientedRect(Pose(pos(rng), pos(rng), ang(rng)), len(rng), len(rng) / 2);
}

OrientedRect moved(const OrientedRect& r, double tx, double ty, double phi) {
  const auto& c = r.center();
  const double x = std::cos(phi) * c.x - std::sin(phi) * c.y + tx;
  const double y = std::sin(phi) * c.x + std::cos(phi) * c.y + ty;
  return OrientedRect(Pose(x, y, c.theta + phi), r.length(), r.width());
}

}  // namespace

TEST_CASE("normalize_angle wraps into (-pi, pi]") {
  CHECK(normalize_angle(0.0) == 0.0);
  CHECK(normalize_angle(kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(-kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(3 * kPi) == doctest::Approx(kPi));
  CHECK(normalize_angle(2 * kPi + 0.25) == doctest::Approx(0.25));
  CHECK(normalize_angle(-0.5) == doctest::Approx(-0.5));
}

TEST_CASE("rectangles reject non-positive dimensions") {
  CHECK_THROWS_AS(OrientedRect(Pose(), 0.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(OrientedRect(Pose(), 5.0, -1.0), std::invalid_argument);
}

TEST_CASE("rect_overlap fixed cases") {
  const OrientedRect a(Pose(0, 0, 0));
  CHECK(rect_overlap(a, a));
  CHECK_FALSE(rect_overlap(a, OrientedRect(Pose(20, 0, 0))));
  CHECK(rect_overlap(a, OrientedRect(Pose(4.0, 1.5, kPi / 4))));

  // Closed sets: edges touching exactly count as overlap.
  CHECK(rect_overlap(a, OrientedRect(Pose(5.0, 0, 0))));
  CHECK_FALSE(rect_overlap(a, OrientedRect(Pose(5.0 + 1e-9, 0, 0))));
  CHECK(rect_overlap(a, OrientedRect(Pose(0, 2.0, 0))));

  // Corner-to-edge case that the axes of only one rectangle would miss.
  const OrientedRect diamond(Pose(0, 0, kPi / 4), 2.0, 2.0);
  CHECK_FALSE(rect_overlap(diamond, OrientedRect(Pose(1.3, 1.3, 0), 1.0, 1.0)));
  CHECK(rect_overlap(diamond, OrientedRect(Pose(1.2, 1.2, 0), 1.0, 1.0)));
}

TEST_CASE("rect_overlap agrees with a point-sampling oracle") {
  Rng rng(11);
  constexpr int kPerSide = 80;
  int checked = 0;
  int positives = 0;
  for (int i = 0; i < 3000; ++i) {
    const OrientedRect a = random_rect(rng, 4.0);
    const OrientedRect b = random_rect(rng, 4.0);
    const auto sampled = oracle::sampled_overlap(a, b, kPerSide);
    if (sampled.overlap != rect_overlap(a, b)) {
      CHECK(oracle::near_boundary(a, b, sampled.resolution, kPerSide));
    } else {
      ++checked;
    }
    positives += sampled.overlap;
  }
  CHECK(checked > 2900);
  CHECK(positives > 300);
  CHECK(positives < 2700);
}

TEST_CASE("rect_overlap is symmetric and invariant under rigid motion") {
  Rng rng(12);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  std::uniform_real_distribution<double> ang(-kPi, kPi);
  for (int i = 0; i < 5000; ++i) {
    const OrientedRect a = random_rect(rng, 4.0);
    const OrientedRect b = random_rect(rng, 4.0);
    const bool ab = rect_overlap(a, b);
    CHECK(ab == rect_overlap(b, a));
    const double tx = u(rng);
    const double ty = u(rng);
    const double phi = ang(rng);
    const OrientedRect a2 = moved(a, tx, ty, phi);
    const OrientedRect b2 = moved(b, tx, ty, phi);
    // Rounding can only matter for near-touching pairs.
    if (ab != rect_overlap(a2, b2)) {
      if (ab) {
        CHECK(rect_overlap(inflate(a2, 1e-9), b2));
      } else {
        CHECK(rect_overlap(inflate(a, 1e-9), b));
      }
    }
  }
}

TEST_CASE("inflate") {
  const OrientedRect r(Pose(1, 2, 0.3));
  const OrientedRect same = inflate(r, 0.0);
  CHECK(same.length() == r.length());
  CHECK(same.width() == r.width());
  CHECK(same.center().x == r.center().x);
  const OrientedRect big = inflate(r, 0.5);
  CHECK(big.length() == doctest::Approx(6.0));
  CHECK(big.width() == doctest::Approx(3.0));
  CHECK_THROWS_AS(inflate(r, -0.1), std::invalid_argument);

  Rng rng(13);
  std::uniform_real_distribution<double> m(0.0, 2.0);
  for (int i = 0; i < 5000; ++i) {
    const OrientedRect a = random_rect(rng, 6.0);
    const OrientedRect b = random_rect(rng, 6.0);
    if (rect_overlap(a, b)) CHECK(rect_overlap(inflate(a, m(rng)), b));
  }
}
