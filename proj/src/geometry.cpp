#include "boxpose/geometry.hpp"

#include <cmath>

#include "boxpose/random.hpp"

namespace boxpose {

namespace {
constexpr double kUnitTolerance = 1e-6;
}

CameraIntrinsics::CameraIntrinsics(double fx_in, double fy_in, double cx_in,
                                   double cy_in, int width_in, int height_in)
    : fx(fx_in), fy(fy_in), cx(cx_in), cy(cy_in), width(width_in), height(height_in) {
  if (!(fx > 0.0) || !(fy > 0.0)) throw DataError("camera: focal lengths must be positive");
  if (width <= 0 || height <= 0) throw DataError("camera: image size must be positive");
  if (!(cx >= 0.0) || !(cx < width) || !(cy >= 0.0) || !(cy < height))
    throw DataError("camera: principal point must lie inside the image");
}

Rotation3 Rotation3::from_quaternion(double w, double x, double y, double z) {
  const double norm = std::sqrt(w * w + x * x + y * y + z * z);
  if (std::abs(norm - 1.0) > kUnitTolerance)
    throw DataError("quaternion norm " + std::to_string(norm) + " outside tolerance");
  return Rotation3(Eigen::Quaterniond(w / norm, x / norm, y / norm, z / norm));
}

Rotation3 Rotation3::from_matrix(const Eigen::Matrix3d& m) {
  const double ortho = (m.transpose() * m - Eigen::Matrix3d::Identity()).norm();
  if (ortho > kUnitTolerance || m.determinant() < 0.0)
    throw DataError("matrix is not a rotation");
  Eigen::Quaterniond q(m);
  q.normalize();
  return Rotation3(q);
}

Rotation3 Rotation3::from_axis_angle(const Eigen::Vector3d& axis, double angle_rad) {
  const double norm = axis.norm();
  if (!(norm > 0.0)) throw DataError("axis must be non-zero");
  return Rotation3(Eigen::Quaterniond(Eigen::AngleAxisd(angle_rad, axis / norm)));
}

double Rotation3::angle_to(const Rotation3& other) const {
  // atan2 on the relative rotation stays well-conditioned near 0 and pi,
  // where acos of the quaternion dot product loses half the digits
  const Eigen::Quaterniond rel = q_.conjugate() * other.q_;
  return 2.0 * std::atan2(rel.vec().norm(), std::abs(rel.w()));
}

OrientedBox3::OrientedBox3(const Rotation3& rotation_in, const Eigen::Vector3d& center_in,
                           const Eigen::Vector3d& size_in)
    : rotation(rotation_in), center(center_in), size(size_in) {
  if (!(size.minCoeff() > 0.0)) throw DataError("box size components must be positive");
}

std::array<Eigen::Vector3d, 8> box_vertices(const OrientedBox3& box) {
  const Eigen::Matrix3d rot = box.rotation.matrix();
  std::array<Eigen::Vector3d, 8> out;
  for (int i = 0; i < 8; ++i) {
    const Eigen::Vector3d corner((i & 1 ? 0.5 : -0.5) * box.size.x(),
                                 (i & 2 ? 0.5 : -0.5) * box.size.y(),
                                 (i & 4 ? 0.5 : -0.5) * box.size.z());
    out[i] = box.center + rot * corner;
  }
  return out;
}

double box_volume(const OrientedBox3& box) { return box.size.prod(); }

bool box_contains(const OrientedBox3& box, const Eigen::Vector3d& p, double tol) {
  const Eigen::Vector3d local = box.rotation.matrix().transpose() * (p - box.center);
  return std::abs(local.x()) <= 0.5 * box.size.x() + tol &&
         std::abs(local.y()) <= 0.5 * box.size.y() + tol &&
         std::abs(local.z()) <= 0.5 * box.size.z() + tol;
}

Plane3::Plane3(const Eigen::Vector3d& normal_in, double d_in) {
  const double norm = normal_in.norm();
  if (!(norm > 1e-12)) throw DataError("plane normal must be non-zero");
  normal = normal_in / norm;
  d = d_in / norm;
}

Eigen::Vector2d project(const CameraIntrinsics& cam, const Eigen::Vector3d& point) {
  if (!(point.z() > 0.0)) throw NumericError("point behind camera");
  return {cam.fx * point.x() / point.z() + cam.cx,
          cam.fy * point.y() / point.z() + cam.cy};
}

Rotation3 random_rotation(std::mt19937_64& rng) {
  const double u1 = uniform_unit(rng);
  const double u2 = uniform_unit(rng);
  const double u3 = uniform_unit(rng);
  const double a = std::sqrt(1.0 - u1);
  const double b = std::sqrt(u1);
  return Rotation3::from_quaternion(b * std::cos(2.0 * M_PI * u3),
                                    a * std::sin(2.0 * M_PI * u2),
                                    a * std::cos(2.0 * M_PI * u2),
                                    b * std::sin(2.0 * M_PI * u3));
}

}  // namespace boxpose
