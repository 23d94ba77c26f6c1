#include "sfc/geometry.hpp"

#include <algorithm>

namespace sfc {

double determinant(const Mat3& a) {
  return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
         a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
         a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

Vec3 solve(const Mat3& a, const Vec3& b) {
  const double det = determinant(a);
  Vec3 out;
  for (int col = 0; col < 3; ++col) {
    Mat3 t = a;
    for (int row = 0; row < 3; ++row) t(row, col) = b[row];
    out[col] = determinant(t) / det;
  }
  return out;
}

Mat3 dcm_from_quat(const Quat& q) {
  const double w = q.w, x = q.x, y = q.y, z = q.z;
  Mat3 c;
  c(0, 0) = w * w + x * x - y * y - z * z;
  c(0, 1) = 2.0 * (x * y + w * z);
  c(0, 2) = 2.0 * (x * z - w * y);
  c(1, 0) = 2.0 * (x * y - w * z);
  c(1, 1) = w * w - x * x + y * y - z * z;
  c(1, 2) = 2.0 * (y * z + w * x);
  c(2, 0) = 2.0 * (x * z + w * y);
  c(2, 1) = 2.0 * (y * z - w * x);
  c(2, 2) = w * w - x * x - y * y + z * z;
  return c;
}

Quat quat_from_dcm(const Mat3& c) {
  // Sheppard's method: pick the largest of the four squared components.
  const double tr = c(0, 0) + c(1, 1) + c(2, 2);
  const std::array<double, 4> sq = {(1.0 + tr) / 4.0, (1.0 + 2.0 * c(0, 0) - tr) / 4.0,
                                    (1.0 + 2.0 * c(1, 1) - tr) / 4.0, (1.0 + 2.0 * c(2, 2) - tr) / 4.0};
  const auto k = static_cast<int>(std::max_element(sq.begin(), sq.end()) - sq.begin());
  Quat q;
  switch (k) {
    case 0:
      q.w = std::sqrt(sq[0]);
      q.x = (c(1, 2) - c(2, 1)) / (4.0 * q.w);
      q.y = (c(2, 0) - c(0, 2)) / (4.0 * q.w);
      q.z = (c(0, 1) - c(1, 0)) / (4.0 * q.w);
      break;
    case 1:
      q.x = std::sqrt(sq[1]);
      q.w = (c(1, 2) - c(2, 1)) / (4.0 * q.x);
      q.y = (c(0, 1) + c(1, 0)) / (4.0 * q.x);
      q.z = (c(2, 0) + c(0, 2)) / (4.0 * q.x);
      break;
    case 2:
      q.y = std::sqrt(sq[2]);
      q.w = (c(2, 0) - c(0, 2)) / (4.0 * q.y);
      q.x = (c(0, 1) + c(1, 0)) / (4.0 * q.y);
      q.z = (c(1, 2) + c(2, 1)) / (4.0 * q.y);
      break;
    default:
      q.z = std::sqrt(sq[3]);
      q.w = (c(0, 1) - c(1, 0)) / (4.0 * q.z);
      q.x = (c(2, 0) + c(0, 2)) / (4.0 * q.z);
      q.y = (c(1, 2) + c(2, 1)) / (4.0 * q.z);
      break;
  }
  if (q.w < 0.0) q = Quat{-q.w, -q.x, -q.y, -q.z};
  return q.normalized();
}

Quat quat_from_axis_angle(const Vec3& axis, double angle) {
  const Vec3 a = normalized(axis);
  const double s = std::sin(0.5 * angle);
  return {std::cos(0.5 * angle), a.x * s, a.y * s, a.z * s};
}

double attitude_angle_between(const Quat& a, const Quat& b) {
  const Quat d = conjugate(a) * b;
  const double v = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
  return 2.0 * std::atan2(v, std::fabs(d.w));
}

}  // namespace sfc
