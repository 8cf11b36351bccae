#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>

#include <array>
#include <random>

#include "boxpose/error.hpp"

namespace boxpose {

/// Pinhole camera. Image axes are x-right, y-down and the camera looks along
/// +z. Pixel coordinates are continuous; integer pixel (i, j) covers
/// [i, i+1) x [j, j+1), so the pixel center is at (i + 0.5, j + 0.5).
struct CameraIntrinsics {
  double fx = 0.0;  ///< focal length, pixels
  double fy = 0.0;
  double cx = 0.0;  ///< principal point, pixels
  double cy = 0.0;
  int width = 0;
  int height = 0;

  CameraIntrinsics() = default;
  CameraIntrinsics(double fx_in, double fy_in, double cx_in, double cy_in,
                   int width_in, int height_in);
};

/// Rotation stored as a unit quaternion (w, x, y, z).
class Rotation3 {
 public:
  Rotation3() : q_(1.0, 0.0, 0.0, 0.0) {}

  /// Accepts a quaternion within 1e-6 of unit norm and renormalizes it.
  static Rotation3 from_quaternion(double w, double x, double y, double z);
  /// Accepts a matrix orthonormal with determinant +1 within 1e-6.
  static Rotation3 from_matrix(const Eigen::Matrix3d& m);
  static Rotation3 from_axis_angle(const Eigen::Vector3d& axis, double angle_rad);
  static Rotation3 identity() { return Rotation3(); }

  Eigen::Matrix3d matrix() const { return q_.toRotationMatrix(); }
  const Eigen::Quaterniond& quaternion() const { return q_; }
  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  Eigen::Vector3d operator*(const Eigen::Vector3d& v) const { return q_ * v; }
  Rotation3 operator*(const Rotation3& rhs) const { return Rotation3(q_ * rhs.q_); }
  Rotation3 inverse() const { return Rotation3(q_.conjugate()); }

  /// Geodesic distance to another rotation, radians in [0, pi].
  double angle_to(const Rotation3& other) const;

 private:
  explicit Rotation3(const Eigen::Quaterniond& q) : q_(q) {}
  Eigen::Quaterniond q_;
};

/// 9-DoF oriented box: rotation, center, and the full extent along each
/// object axis. Vertex i encodes its corner signs in the index bits:
/// bit 0 set -> +x half, bit 1 -> +y, bit 2 -> +z (clear bits pick the
/// negative half).
struct OrientedBox3 {
  Rotation3 rotation;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Ones();

  OrientedBox3() = default;
  OrientedBox3(const Rotation3& rotation_in, const Eigen::Vector3d& center_in,
               const Eigen::Vector3d& size_in);
};

std::array<Eigen::Vector3d, 8> box_vertices(const OrientedBox3& box);
double box_volume(const OrientedBox3& box);
/// True when p lies inside the box, expanded by tol along each local axis.
bool box_contains(const OrientedBox3& box, const Eigen::Vector3d& p,
                  double tol = 0.0);

/// Plane {X : normal . X + d = 0} with unit normal.
struct Plane3 {
  Eigen::Vector3d normal = Eigen::Vector3d::UnitZ();
  double d = 0.0;

  Plane3() = default;
  /// Normalizes the representation; rejects near-zero normals.
  Plane3(const Eigen::Vector3d& normal_in, double d_in);

  double signed_distance(const Eigen::Vector3d& p) const {
    return normal.dot(p) + d;
  }
};

/// Rigid transform applied as X -> rotation * X + translation.
struct RigidPose {
  Rotation3 rotation;
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
};

/// Projects a camera-frame point to continuous pixel coordinates.
/// Throws NumericError("point behind camera") unless point.z > 0.
Eigen::Vector2d project(const CameraIntrinsics& cam, const Eigen::Vector3d& point);

/// Uniformly distributed random rotation (Shoemake's method).
Rotation3 random_rotation(std::mt19937_64& rng);

}  // namespace boxpose
