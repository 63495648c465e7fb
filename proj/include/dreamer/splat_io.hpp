#pragma once

#include "dreamer/contact_splat.hpp"
#include "dreamer/image_io.hpp"

#include <json.hpp>

#include <vector>

namespace dreamer {

/// {c:[x,y,z], rotation_cw:[9 reals, row-major], fx, fy, cx, cy, width, height, x_min}
CameraModel<double> camera_from_json(const nlohmann::json& j);
nlohmann::json camera_to_json(const CameraModel<double>& cam);

/// [{p:[x,y,z], f:[x,y,z]}, ...]
std::vector<ContactRecord<double>> scene_from_json(const nlohmann::json& j);

/// Every key optional; missing keys keep SplatConfig defaults.
SplatConfig<double> splat_config_from_json(const nlohmann::json& j);
nlohmann::json splat_config_to_json(const SplatConfig<double>& cfg);

Rgb8Image to_rgb8(const SplatImage<double>& image);

}  // namespace dreamer
