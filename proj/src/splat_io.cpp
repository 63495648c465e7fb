#include "dreamer/splat_io.hpp"

namespace dreamer {

namespace {

Vector3d vec3_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(what) + " must be an array of 3 numbers");
  Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) throw FormatError(std::string("missing numeric field '") + key + "'");
  return j[key].get<double>();
}

int integer(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number_integer())
    throw FormatError(std::string("missing integer field '") + key + "'");
  return j[key].get<int>();
}

}  // namespace

CameraModel<double> camera_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("camera must be a JSON object");
  CameraModel<double> cam;
  if (!j.contains("c")) throw FormatError("missing camera field 'c'");
  cam.position = vec3_from_json(j["c"], "c");
  if (!j.contains("rotation_cw")) throw FormatError("missing camera field 'rotation_cw'");
  const auto& r = j["rotation_cw"];
  if (!r.is_array() || r.size() != 9) throw FormatError("rotation_cw must hold 9 numbers (row-major)");
  for (int i = 0; i < 9; ++i) {
    if (!r[i].is_number()) throw FormatError("rotation_cw must hold numbers");
    cam.rotation_cw(i / 3, i % 3) = r[i].get<double>();
  }
  cam.fx = number(j, "fx");
  cam.fy = number(j, "fy");
  cam.cx = number(j, "cx");
  cam.cy = number(j, "cy");
  cam.width = integer(j, "width");
  cam.height = integer(j, "height");
  cam.x_min = number(j, "x_min");
  cam.validate();
  return cam;
}

nlohmann::json camera_to_json(const CameraModel<double>& cam) {
  nlohmann::json rot = nlohmann::json::array();
  for (int i = 0; i < 9; ++i) rot.push_back(cam.rotation_cw(i / 3, i % 3));
  return {{"c", {cam.position.x(), cam.position.y(), cam.position.z()}},
          {"rotation_cw", rot},
          {"fx", cam.fx},
          {"fy", cam.fy},
          {"cx", cam.cx},
          {"cy", cam.cy},
          {"width", cam.width},
          {"height", cam.height},
          {"x_min", cam.x_min}};
}

std::vector<ContactRecord<double>> scene_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw FormatError("scene must be a JSON array of contacts");
  std::vector<ContactRecord<double>> contacts;
  contacts.reserve(j.size());
  for (const auto& item : j) {
    if (!item.is_object() || !item.contains("p") || !item.contains("f"))
      throw FormatError("each contact needs 'p' and 'f'");
    ContactRecord<double> c{vec3_from_json(item["p"], "p"), vec3_from_json(item["f"], "f")};
    if (!c.p.allFinite() || !c.f.allFinite()) throw FormatError("contact values must be finite");
    contacts.push_back(c);
  }
  return contacts;
}

SplatConfig<double> splat_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("splat config must be a JSON object");
  SplatConfig<double> cfg;
  auto read = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw FormatError(std::string("splat config field '") + key + "' must be a number");
    dst = j[key].get<double>();
  };
  read("m_max", cfg.m_max);
  read("gamma", cfg.gamma);
  read("r_min", cfg.r_min);
  read("r_max", cfg.r_max);
  read("tau_depth", cfg.tau_depth);
  read("probe_offset", cfg.probe_offset);
  read("probe_gain", cfg.probe_gain);
  read("kernel_window_mult", cfg.kernel_window_mult);
  cfg.validate();
  return cfg;
}

nlohmann::json splat_config_to_json(const SplatConfig<double>& cfg) {
  return {{"m_max", cfg.m_max},         {"gamma", cfg.gamma},
          {"r_min", cfg.r_min},         {"r_max", cfg.r_max},
          {"tau_depth", cfg.tau_depth}, {"probe_offset", cfg.probe_offset},
          {"probe_gain", cfg.probe_gain}, {"kernel_window_mult", cfg.kernel_window_mult}};
}

Rgb8Image to_rgb8(const SplatImage<double>& image) {
  Rgb8Image out(image.width(), image.height());
  for (int v = 0; v < image.height(); ++v)
    for (int u = 0; u < image.width(); ++u)
      for (int c = 0; c < 3; ++c) out.pixel(u, v)[c] = to_byte(image.channel(c)(v, u));
  return out;
}

}  // namespace dreamer
