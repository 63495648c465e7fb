#pragma once

// Camera-aligned contact splat rendering.
//
// Each contact (world point p, force f) is projected through a pinhole camera
// and drawn as an isotropic Gaussian whose colour packs the force:
//   R     clipped magnitude min(|f|, m_max) / m_max
//   G, B  unit direction of the projected force in pixel space, mapped [-1,1] -> [0,1]
// Overlapping kernels are blended by normalized weighted averaging with an
// exponential depth weight, so nearer contacts dominate.

#include "dreamer/types.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

namespace dreamer {

template <typename Scalar>
struct CameraModel {
  Vec3<Scalar> position = Vec3<Scalar>::Zero();
  Mat3<Scalar> rotation_cw = Mat3<Scalar>::Identity();  // world -> camera
  Scalar fx = 100;
  Scalar fy = 100;
  Scalar cx = 64;
  Scalar cy = 64;
  int width = 128;
  int height = 128;
  Scalar x_min = Scalar(0.01);  // near plane, camera-frame depth X

  void validate() const {
    const Mat3<Scalar> gram = rotation_cw.transpose() * rotation_cw;
    if (!((gram - Mat3<Scalar>::Identity()).cwiseAbs().maxCoeff() <= Scalar(1e-9)))
      throw InvalidInput("camera rotation_cw is not orthonormal");
    if (!(fx > 0 && fy > 0)) throw InvalidInput("camera focal lengths must be positive");
    if (!(x_min > 0)) throw InvalidInput("camera x_min must be positive");
    if (width < 1 || height < 1) throw InvalidInput("camera image size must be at least 1x1");
    if (!position.allFinite() || !std::isfinite(cx) || !std::isfinite(cy))
      throw InvalidInput("camera parameters must be finite");
  }
};

template <typename Scalar>
struct ContactRecord {
  Vec3<Scalar> p = Vec3<Scalar>::Zero();  // world position (m)
  Vec3<Scalar> f = Vec3<Scalar>::Zero();  // world force (N)
};

template <typename Scalar>
struct SplatConfig {
  Scalar m_max = 10;
  Scalar gamma = 1;
  Scalar r_min = 2;
  Scalar r_max = 8;
  Scalar tau_depth = 1;
  // Probe offset along the force: s = probe_offset + probe_gain * |f|.
  Scalar probe_offset = Scalar(0.05);
  Scalar probe_gain = Scalar(0.01);
  Scalar kernel_window_mult = 3;

  void validate() const {
    if (!(m_max > 0)) throw InvalidInput("splat m_max must be positive");
    if (!(gamma >= 1)) throw InvalidInput("splat gamma must be >= 1");
    if (!(r_min > 0 && r_min <= r_max)) throw InvalidInput("splat radii must satisfy 0 < r_min <= r_max");
    if (!(tau_depth > 0)) throw InvalidInput("splat tau_depth must be positive");
    if (!(kernel_window_mult > 0)) throw InvalidInput("splat kernel_window_mult must be positive");
  }
};

template <typename Scalar>
class SplatImage {
 public:
  using Channel = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SplatImage(int width, int height) : width_(width), height_(height) {
    for (auto& c : channels_) c = Channel::Zero(height, width);
  }

  int width() const { return width_; }
  int height() const { return height_; }

  /// Pixel (u, v) = (column, row), top-left origin.
  Vec3<Scalar> at(int u, int v) const {
    return {channels_[0](v, u), channels_[1](v, u), channels_[2](v, u)};
  }
  const Channel& channel(int c) const { return channels_[c]; }
  Channel& channel(int c) { return channels_[c]; }

  bool operator==(const SplatImage& other) const {
    if (width_ != other.width_ || height_ != other.height_) return false;
    for (int c = 0; c < 3; ++c)
      if (!(channels_[c] == other.channels_[c]).all()) return false;
    return true;
  }

 private:
  int width_;
  int height_;
  std::array<Channel, 3> channels_;
};

/// One contact reduced to what the rasterizer needs.
template <typename Scalar>
struct Splat {
  Eigen::Vector2i center;  // (u, v) pixel
  Scalar depth;            // camera-frame X
  Scalar radius;           // pixels
  Vec3<Scalar> color;      // (R, G, B)
};

template <typename Scalar>
struct EncodedContact {
  Vec3<Scalar> color;
  Eigen::Vector2i pixel_center;
};

template <typename Scalar>
Vec3<Scalar> world_to_camera(const Vec3<Scalar>& p, const CameraModel<Scalar>& cam) {
  return cam.rotation_cw * (p - cam.position);
}

/// Pinhole projection with the leftward/upward-positive convention
/// u = cx - fx*Y/X, v = cy - fy*Z/X. The caller clips against the near plane.
template <typename Scalar>
Vec2<Scalar> project(const Vec3<Scalar>& x_cam, const CameraModel<Scalar>& cam) {
  if (!(x_cam.x() >= cam.x_min)) throw InvalidInput("point lies in front of the camera near plane");
  return {cam.cx - cam.fx * (x_cam.y() / x_cam.x()), cam.cy - cam.fy * (x_cam.z() / x_cam.x())};
}

/// Round half away from zero.
template <typename Scalar>
Eigen::Vector2i round_pixel(const Vec2<Scalar>& uv) {
  using std::round;
  return {static_cast<int>(round(uv.x())), static_cast<int>(round(uv.y()))};
}

template <typename Scalar>
Scalar splat_radius(Scalar magnitude, const SplatConfig<Scalar>& cfg) {
  using std::min;
  using std::pow;
  const Scalar t = pow(min(magnitude, cfg.m_max) / cfg.m_max, cfg.gamma);
  return cfg.r_min + (cfg.r_max - cfg.r_min) * t;
}

/// Colour and pixel centre of a contact that already passed the near-plane test.
/// A zero pixel-space displacement, or a probe point behind the near plane,
/// encodes direction (G, B) = (0.5, 0.5).
template <typename Scalar>
EncodedContact<Scalar> encode_color(const ContactRecord<Scalar>& contact, const CameraModel<Scalar>& cam,
                                    const SplatConfig<Scalar>& cfg) {
  using std::min;
  const Vec3<Scalar> x_cam = world_to_camera(contact.p, cam);
  const Vec2<Scalar> uv = project(x_cam, cam);
  const Scalar magnitude = contact.f.norm();

  EncodedContact<Scalar> out;
  out.pixel_center = round_pixel(uv);
  out.color.x() = min(magnitude, cfg.m_max) / cfg.m_max;
  out.color.y() = Scalar(0.5);
  out.color.z() = Scalar(0.5);

  const Scalar scale = cfg.probe_offset + cfg.probe_gain * magnitude;
  const Vec3<Scalar> x_end = world_to_camera<Scalar>(contact.p + scale * contact.f, cam);
  if (!(x_end.x() >= cam.x_min)) return out;

  const Vec2<Scalar> delta = project(x_end, cam) - uv;
  const Scalar length = delta.norm();
  if (length > 0 && std::isfinite(length)) {
    const Vec2<Scalar> dir = delta / length;
    out.color.y() = (dir.x() + 1) / 2;
    out.color.z() = (dir.y() + 1) / 2;
  }
  return out;
}

/// Reduces a contact to a splat; nullopt for clipped or zero-force contacts.
template <typename Scalar>
std::optional<Splat<Scalar>> prepare_splat(const ContactRecord<Scalar>& contact, const CameraModel<Scalar>& cam,
                                           const SplatConfig<Scalar>& cfg) {
  if (!contact.p.allFinite() || !contact.f.allFinite()) throw InvalidInput("contact record must be finite");
  const Vec3<Scalar> x_cam = world_to_camera(contact.p, cam);
  if (x_cam.x() < cam.x_min) return std::nullopt;
  const Scalar magnitude = contact.f.norm();
  if (magnitude == 0) return std::nullopt;
  const EncodedContact<Scalar> enc = encode_color(contact, cam, cfg);
  return Splat<Scalar>{enc.pixel_center, x_cam.x(), splat_radius(magnitude, cfg), enc.color};
}

/// Accumulate-then-normalize over already prepared splats, in list order.
template <typename Scalar>
SplatImage<Scalar> rasterize(std::span<const Splat<Scalar>> splats, int width, int height,
                             const SplatConfig<Scalar>& cfg) {
  using std::ceil;
  using std::exp;
  using Channel = typename SplatImage<Scalar>::Channel;

  SplatImage<Scalar> image(width, height);
  Channel weight = Channel::Zero(height, width);

  for (const Splat<Scalar>& s : splats) {
    const Scalar depth_weight = exp(-s.depth / cfg.tau_depth);
    const Scalar sigma = s.radius / 3;
    const Scalar inv_two_var = Scalar(1) / (2 * sigma * sigma);
    const int window = static_cast<int>(ceil(cfg.kernel_window_mult * s.radius));
    const int u0 = std::max(0, s.center.x() - window);
    const int u1 = std::min(width - 1, s.center.x() + window);
    const int v0 = std::max(0, s.center.y() - window);
    const int v1 = std::min(height - 1, s.center.y() + window);
    for (int v = v0; v <= v1; ++v) {
      const Scalar dv = static_cast<Scalar>(v - s.center.y());
      for (int u = u0; u <= u1; ++u) {
        const Scalar du = static_cast<Scalar>(u - s.center.x());
        const Scalar w = depth_weight * exp(-(du * du + dv * dv) * inv_two_var);
        weight(v, u) += w;
        for (int c = 0; c < 3; ++c) image.channel(c)(v, u) += w * s.color[c];
      }
    }
  }

  for (int c = 0; c < 3; ++c) {
    Channel& ch = image.channel(c);
    ch = (weight > 0).select(ch / weight, Scalar(0));
    ch = ch.min(Scalar(1)).max(Scalar(0));
  }
  return image;
}

template <typename Scalar>
SplatImage<Scalar> render_splats(std::span<const ContactRecord<Scalar>> contacts, const CameraModel<Scalar>& cam,
                                 const SplatConfig<Scalar>& cfg) {
  cam.validate();
  cfg.validate();
  std::vector<Splat<Scalar>> splats;
  splats.reserve(contacts.size());
  for (const auto& c : contacts)
    if (auto s = prepare_splat(c, cam, cfg)) splats.push_back(*s);
  return rasterize<Scalar>(splats, cam.width, cam.height, cfg);
}

}  // namespace dreamer
