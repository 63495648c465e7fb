#include "dreamer/dataset.hpp"

#include "dreamer/archive.hpp"

#include <cmath>
#include <cstring>
#include <set>

namespace dreamer::dataset {

namespace {

using Kind = DatasetError::Kind;

constexpr char kArrayMagic[8] = {'D', 'R', 'M', 'A', 'R', 'R', 'A', 'Y'};
constexpr std::uint32_t kDtypeF64 = 1;
constexpr std::uint32_t kDtypeI64 = 2;

const std::set<std::string>& known_meta_keys() {
  static const std::set<std::string> keys = {
      "format",        "version",   "grid_h",     "grid_w",     "grid_tokens_per_frame", "codebook_size",
      "contact_codebook_size", "frame_count", "frame_rate", "joints", "bodies", "has_reward",
      "segments",      "token_encoding", "array_encoding"};
  return keys;
}

bool same_bits(const MatX<double>& a, const MatX<double>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

bool same_bits(const VecX<double>& a, const VecX<double>& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

bool same_bits(const Vector3d& a, const Vector3d& b) { return std::memcmp(a.data(), b.data(), sizeof(double) * 3) == 0; }

binary::Bytes array_header(std::uint32_t dtype, std::span<const std::uint64_t> dims) {
  binary::Bytes out(std::begin(kArrayMagic), std::end(kArrayMagic));
  binary::put_le<std::uint32_t>(out, 1);
  binary::put_le<std::uint32_t>(out, dtype);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) binary::put_le<std::uint64_t>(out, d);
  return out;
}

std::vector<std::uint64_t> read_array_header(binary::Reader& r, std::uint32_t want_dtype, const std::string& name) {
  const auto magic = r.take(sizeof(kArrayMagic));
  if (!std::equal(magic.begin(), magic.end(), std::begin(kArrayMagic)))
    throw DatasetError(Kind::kParse, name + ": bad array magic");
  if (r.get<std::uint32_t>() != 1) throw DatasetError(Kind::kParse, name + ": unsupported array version");
  if (r.get<std::uint32_t>() != want_dtype) throw DatasetError(Kind::kParse, name + ": unexpected dtype");
  const auto ndim = r.get<std::uint32_t>();
  if (ndim > 8) throw DatasetError(Kind::kParse, name + ": too many dimensions");
  std::vector<std::uint64_t> dims(ndim);
  for (auto& d : dims) d = r.get<std::uint64_t>();
  return dims;
}

template <typename Fn>
auto guard_truncation(const std::string& name, Fn&& fn) {
  try {
    return fn();
  } catch (const DatasetError&) {
    throw;
  } catch (const FormatError& e) {
    throw DatasetError(Kind::kTruncated, name + ": " + e.what());
  }
}

void require(bool ok, Kind kind, const std::string& message) {
  if (!ok) throw DatasetError(kind, message);
}

}  // namespace

bool EpisodeRecord::operator==(const EpisodeRecord& o) const {
  if (grid_h != o.grid_h || grid_w != o.grid_w || codebook_size != o.codebook_size ||
      contact_codebook_size != o.contact_codebook_size)
    return false;
  if (std::memcmp(&frame_rate, &o.frame_rate, sizeof(double)) != 0) return false;
  if (rgb_tokens != o.rgb_tokens || contact_tokens != o.contact_tokens || contact_mode != o.contact_mode) return false;
  if (!same_bits(q, o.q) || !same_bits(qdot, o.qdot) || !same_bits(actions, o.actions) || !same_bits(mu_s, o.mu_s) ||
      !same_bits(mu_k, o.mu_k))
    return false;
  if (reward.has_value() != o.reward.has_value()) return false;
  if (reward && !same_bits(*reward, *o.reward)) return false;
  if (forces.size() != o.forces.size()) return false;
  for (std::size_t t = 0; t < forces.size(); ++t) {
    if (forces[t].size() != o.forces[t].size()) return false;
    for (std::size_t i = 0; i < forces[t].size(); ++i)
      if (!same_bits(forces[t][i].p, o.forces[t][i].p) || !same_bits(forces[t][i].f, o.forces[t][i].f)) return false;
  }
  return extra_meta == o.extra_meta;
}

void validate_episode(const EpisodeRecord& ep, const HorizonBounds& bounds) {
  const auto T = static_cast<std::size_t>(ep.frames());
  require(T > 0, Kind::kInvariant, "episode has no frames");
  require(ep.frames() >= bounds.min_frames && ep.frames() <= bounds.max_frames, Kind::kInvariant,
          "episode length " + std::to_string(T) + " outside [" + std::to_string(bounds.min_frames) + ", " +
              std::to_string(bounds.max_frames) + "]");
  require(ep.grid_h >= 1 && ep.grid_w >= 1, Kind::kInvariant, "token grid must be at least 1x1");
  require(ep.codebook_size >= 1 && ep.codebook_size <= 0xFFFFFFFFull && ep.contact_codebook_size >= 1 &&
              ep.contact_codebook_size <= 0xFFFFFFFFull,
          Kind::kInvariant, "codebook sizes must fit 32-bit tokens");
  require(std::isfinite(ep.frame_rate) && ep.frame_rate > 0, Kind::kInvariant, "frame_rate must be positive");
  const std::size_t cells = T * static_cast<std::size_t>(ep.spatial());
  require(ep.rgb_tokens.size() == cells, Kind::kShape, "rgb token stream length does not match T*S");
  require(ep.contact_tokens.size() == cells, Kind::kShape, "contact token stream length does not match T*S");
  for (auto z : ep.rgb_tokens) require(z < ep.codebook_size, Kind::kRange, "rgb token outside the codebook");
  for (auto z : ep.contact_tokens)
    require(z < ep.contact_codebook_size, Kind::kRange, "contact token outside the codebook");
  const auto rows = static_cast<Eigen::Index>(T);
  require(ep.q.rows() == rows && ep.q.cols() >= 1, Kind::kShape, "q must be T x N_j");
  require(ep.qdot.rows() == rows && ep.qdot.cols() == ep.q.cols(), Kind::kShape, "qdot must match q");
  require(ep.actions.rows() == rows && ep.actions.cols() == 3, Kind::kShape, "actions must be T x 3");
  require(ep.mu_s.rows() == rows && ep.mu_s.cols() >= 1, Kind::kShape, "mu_s must be T x bodies");
  require(ep.mu_k.rows() == rows && ep.mu_k.cols() == ep.mu_s.cols(), Kind::kShape, "mu_k must match mu_s");
  require(ep.forces.size() == T, Kind::kShape, "forces must hold one list per step");
  for (auto m : ep.contact_mode)
    require(static_cast<std::int64_t>(m) >= 0 && static_cast<std::int64_t>(m) <= 3, Kind::kRange,
            "contact mode outside {0,1,2,3}");
  if (ep.reward) require(ep.reward->size() == rows, Kind::kShape, "reward must hold T values");
  require(ep.extra_meta.is_object(), Kind::kInvariant, "extra meta must be an object");
  for (const auto& [key, value] : ep.extra_meta.items())
    require(!known_meta_keys().contains(key), Kind::kInvariant, "extra meta key collides with " + key);
}

binary::Bytes encode_f64_array(const MatX<double>& m) {
  const std::uint64_t dims[2] = {static_cast<std::uint64_t>(m.rows()), static_cast<std::uint64_t>(m.cols())};
  binary::Bytes out = array_header(kDtypeF64, dims);
  for (Eigen::Index i = 0; i < m.size(); ++i) binary::put_f64(out, m.data()[i]);
  return out;
}

MatX<double> decode_f64_array(std::span<const std::uint8_t> bytes, const std::string& name) {
  return guard_truncation(name, [&] {
    binary::Reader r(bytes, name);
    const auto dims = read_array_header(r, kDtypeF64, name);
    if (dims.size() != 2) throw DatasetError(Kind::kShape, name + ": expected a 2-D array");
    if (dims[0] * dims[1] * 8 != r.remaining())
      throw DatasetError(Kind::kTruncated, name + ": payload size does not match its shape");
    MatX<double> m(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = r.get_f64();
    return m;
  });
}

binary::Bytes encode_i64_array(std::span<const std::int64_t> v) {
  const std::uint64_t dims[1] = {v.size()};
  binary::Bytes out = array_header(kDtypeI64, dims);
  for (auto x : v) binary::put_le<std::uint64_t>(out, static_cast<std::uint64_t>(x));
  return out;
}

std::vector<std::int64_t> decode_i64_array(std::span<const std::uint8_t> bytes, const std::string& name) {
  return guard_truncation(name, [&] {
    binary::Reader r(bytes, name);
    const auto dims = read_array_header(r, kDtypeI64, name);
    if (dims.size() != 1) throw DatasetError(Kind::kShape, name + ": expected a 1-D array");
    if (dims[0] * 8 != r.remaining())
      throw DatasetError(Kind::kTruncated, name + ": payload size does not match its shape");
    std::vector<std::int64_t> v(dims[0]);
    for (auto& x : v) x = static_cast<std::int64_t>(r.get<std::uint64_t>());
    return v;
  });
}

binary::Bytes encode_tokens(std::span<const tokens::Token> tokens) {
  binary::Bytes out;
  out.reserve(tokens.size() * 4);
  for (auto z : tokens) binary::put_le<std::uint32_t>(out, z);
  return out;
}

std::vector<tokens::Token> decode_tokens(std::span<const std::uint8_t> bytes, const std::string& name) {
  if (bytes.size() % 4 != 0) throw DatasetError(Kind::kTruncated, name + ": length is not a multiple of 4");
  binary::Reader r(bytes, name);
  std::vector<tokens::Token> out(bytes.size() / 4);
  for (auto& z : out) z = r.get<std::uint32_t>();
  return out;
}

std::vector<std::pair<std::string, binary::Bytes>> episode_entries(const EpisodeRecord& ep,
                                                                   const HorizonBounds& bounds) {
  validate_episode(ep, bounds);
  const auto T = ep.frames();

  nlohmann::json meta = ep.extra_meta;
  meta["format"] = "dreamer-episode";
  meta["version"] = 1;
  meta["grid_h"] = ep.grid_h;
  meta["grid_w"] = ep.grid_w;
  meta["grid_tokens_per_frame"] = ep.spatial();
  meta["codebook_size"] = ep.codebook_size;
  meta["contact_codebook_size"] = ep.contact_codebook_size;
  meta["frame_count"] = T;
  meta["frame_rate"] = ep.frame_rate;
  meta["joints"] = ep.q.cols();
  meta["bodies"] = ep.mu_s.cols();
  meta["has_reward"] = ep.reward.has_value();
  meta["segments"] = nlohmann::json::array({nlohmann::json::array({0, T})});
  meta["token_encoding"] = "u32le";
  meta["array_encoding"] = "dreamer-array-v1";
  const std::string meta_text = meta.dump(2) + "\n";

  std::vector<std::int64_t> modes;
  std::vector<std::int64_t> counts;
  std::size_t n_forces = 0;
  for (auto m : ep.contact_mode) modes.push_back(static_cast<std::int64_t>(m));
  for (const auto& step : ep.forces) {
    counts.push_back(static_cast<std::int64_t>(step.size()));
    n_forces += step.size();
  }
  MatX<double> forces(static_cast<Eigen::Index>(n_forces), 6);
  Eigen::Index row = 0;
  for (const auto& step : ep.forces)
    for (const auto& c : step) {
      forces.row(row).head<3>() = c.p.transpose();
      forces.row(row).tail<3>() = c.f.transpose();
      ++row;
    }

  std::vector<std::pair<std::string, binary::Bytes>> entries;
  entries.emplace_back("meta.json", binary::Bytes(meta_text.begin(), meta_text.end()));
  entries.emplace_back("video.bin", encode_tokens(ep.rgb_tokens));
  entries.emplace_back("contact_splat.bin", encode_tokens(ep.contact_tokens));
  entries.emplace_back("arrays/q.bin", encode_f64_array(ep.q));
  entries.emplace_back("arrays/qdot.bin", encode_f64_array(ep.qdot));
  entries.emplace_back("arrays/actions.bin", encode_f64_array(ep.actions));
  entries.emplace_back("arrays/mu_s.bin", encode_f64_array(ep.mu_s));
  entries.emplace_back("arrays/mu_k.bin", encode_f64_array(ep.mu_k));
  entries.emplace_back("arrays/contact_mode.bin", encode_i64_array(modes));
  entries.emplace_back("arrays/force_counts.bin", encode_i64_array(counts));
  entries.emplace_back("arrays/forces.bin", encode_f64_array(forces));
  if (ep.reward) entries.emplace_back("arrays/reward.bin", encode_f64_array(MatX<double>(*ep.reward)));
  return entries;
}

void pack_episode(const EpisodeRecord& ep, const std::filesystem::path& path, const HorizonBounds& bounds) {
  archive::write_entries(path, episode_entries(ep, bounds));
}

EpisodeRecord load_episode(const std::filesystem::path& path, MetaMode mode, const HorizonBounds& bounds) {
  std::map<std::string, binary::Bytes> files;
  try {
    files = archive::read_entries(path);
  } catch (const FormatError& e) {
    throw DatasetError(Kind::kMissingFile, e.what());
  }
  auto file = [&](const std::string& name) -> const binary::Bytes& {
    const auto it = files.find(name);
    if (it == files.end()) throw DatasetError(Kind::kMissingFile, "archive lacks " + name);
    return it->second;
  };

  nlohmann::json meta;
  try {
    const auto& bytes = file("meta.json");
    meta = nlohmann::json::parse(bytes.begin(), bytes.end());
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(Kind::kParse, std::string("meta.json: ") + e.what());
  }
  if (!meta.is_object()) throw DatasetError(Kind::kSchema, "meta.json must be an object");

  EpisodeRecord ep;
  for (const auto& [key, value] : meta.items()) {
    if (known_meta_keys().contains(key)) continue;
    if (mode == MetaMode::kStrict) throw DatasetError(Kind::kSchema, "meta.json: unknown field '" + key + "'");
    ep.extra_meta[key] = value;
  }
  std::int64_t frame_count = 0;
  int joints = 0;
  int bodies = 0;
  bool has_reward = false;
  try {
    if (meta.at("format").get<std::string>() != "dreamer-episode" || meta.at("version").get<int>() != 1)
      throw DatasetError(Kind::kSchema, "meta.json: unsupported format or version");
    if (meta.at("token_encoding").get<std::string>() != "u32le")
      throw DatasetError(Kind::kSchema, "meta.json: unsupported token encoding");
    ep.grid_h = meta.at("grid_h").get<int>();
    ep.grid_w = meta.at("grid_w").get<int>();
    ep.codebook_size = meta.at("codebook_size").get<std::uint64_t>();
    ep.contact_codebook_size = meta.at("contact_codebook_size").get<std::uint64_t>();
    ep.frame_rate = meta.at("frame_rate").get<double>();
    frame_count = meta.at("frame_count").get<std::int64_t>();
    joints = meta.at("joints").get<int>();
    bodies = meta.at("bodies").get<int>();
    has_reward = meta.at("has_reward").get<bool>();
    if (meta.at("grid_tokens_per_frame").get<std::int64_t>() != static_cast<std::int64_t>(ep.grid_h) * ep.grid_w)
      throw DatasetError(Kind::kShape, "meta.json: grid_tokens_per_frame != grid_h * grid_w");
    const auto& seg = meta.at("segments");
    if (seg.size() != 1 || seg[0].size() != 2 || seg[0][0].get<std::int64_t>() != 0 ||
        seg[0][1].get<std::int64_t>() != frame_count)
      throw DatasetError(Kind::kSchema, "meta.json: an episode archive holds exactly one segment [0, frame_count]");
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(Kind::kSchema, std::string("meta.json: ") + e.what());
  }
  if (frame_count < 1) throw DatasetError(Kind::kInvariant, "meta.json: frame_count must be positive");

  ep.rgb_tokens = decode_tokens(file("video.bin"), "video.bin");
  ep.contact_tokens = decode_tokens(file("contact_splat.bin"), "contact_splat.bin");
  const auto cells = static_cast<std::size_t>(frame_count) * static_cast<std::size_t>(ep.spatial());
  if (ep.rgb_tokens.size() != cells) throw DatasetError(Kind::kTruncated, "video.bin: expected T*S tokens");
  if (ep.contact_tokens.size() != cells) throw DatasetError(Kind::kTruncated, "contact_splat.bin: expected T*S tokens");

  ep.q = decode_f64_array(file("arrays/q.bin"), "arrays/q.bin");
  ep.qdot = decode_f64_array(file("arrays/qdot.bin"), "arrays/qdot.bin");
  ep.actions = decode_f64_array(file("arrays/actions.bin"), "arrays/actions.bin");
  ep.mu_s = decode_f64_array(file("arrays/mu_s.bin"), "arrays/mu_s.bin");
  ep.mu_k = decode_f64_array(file("arrays/mu_k.bin"), "arrays/mu_k.bin");
  if (ep.q.cols() != joints || ep.mu_s.cols() != bodies)
    throw DatasetError(Kind::kShape, "array widths disagree with meta.json");

  for (auto m : decode_i64_array(file("arrays/contact_mode.bin"), "arrays/contact_mode.bin")) {
    if (m < 0 || m > 3) throw DatasetError(Kind::kRange, "contact mode outside {0,1,2,3}");
    ep.contact_mode.push_back(static_cast<ContactMode>(m));
  }
  const auto counts = decode_i64_array(file("arrays/force_counts.bin"), "arrays/force_counts.bin");
  const MatX<double> forces = decode_f64_array(file("arrays/forces.bin"), "arrays/forces.bin");
  if (forces.cols() != 6) throw DatasetError(Kind::kShape, "arrays/forces.bin must be N x 6");
  Eigen::Index row = 0;
  for (auto n : counts) {
    if (n < 0 || row + n > forces.rows()) throw DatasetError(Kind::kShape, "force counts exceed stored forces");
    std::vector<ContactRecord<double>> step;
    for (std::int64_t i = 0; i < n; ++i, ++row)
      step.push_back({forces.row(row).head<3>().transpose(), forces.row(row).tail<3>().transpose()});
    ep.forces.push_back(std::move(step));
  }
  if (row != forces.rows()) throw DatasetError(Kind::kShape, "stored forces exceed force counts");

  if (has_reward) {
    const MatX<double> r = decode_f64_array(file("arrays/reward.bin"), "arrays/reward.bin");
    if (r.cols() != 1) throw DatasetError(Kind::kShape, "arrays/reward.bin must be T x 1");
    ep.reward = VecX<double>(r.col(0));
  }
  if (static_cast<std::int64_t>(ep.contact_mode.size()) != frame_count)
    throw DatasetError(Kind::kShape, "contact_mode length != frame_count");
  validate_episode(ep, bounds);
  return ep;
}

ConcatView::ConcatView(const std::vector<EpisodeRecord>& episodes) {
  for (const auto& ep : episodes) {
    if (ep.frames() < 1) throw InvalidInput("cannot concatenate an empty episode");
    if (segments_.empty()) spatial_ = ep.spatial();
    if (ep.spatial() != spatial_) throw InvalidInput("episodes disagree on tokens per frame");
    segments_.push_back({frame_count_, ep.frames()});
    frame_count_ += ep.frames();
    tokens_.insert(tokens_.end(), ep.rgb_tokens.begin(), ep.rgb_tokens.end());
  }
}

std::vector<std::int64_t> ConcatView::segment_ids() const {
  std::vector<std::int64_t> ids;
  ids.reserve(static_cast<std::size_t>(frame_count_));
  for (std::size_t i = 0; i < segments_.size(); ++i)
    ids.insert(ids.end(), static_cast<std::size_t>(segments_[i].length), static_cast<std::int64_t>(i));
  return ids;
}

std::vector<std::int64_t> ConcatView::window_starts(std::int64_t window, std::int64_t stride) const {
  if (window < 1 || stride < 1) throw InvalidInput("window and stride must be positive");
  std::vector<std::int64_t> out;
  for (const auto& seg : segments_)
    for (std::int64_t s = seg.start; s + window <= seg.start + seg.length; s += stride) out.push_back(s);
  return out;
}

namespace {

nlohmann::json matrix_json(const MatX<double>& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

MatX<double> matrix_from_json(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  MatX<double> m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw FormatError(std::string(what) + " rows differ in length");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

nlohmann::json episode_to_json(const EpisodeRecord& ep) {
  nlohmann::json forces = nlohmann::json::array();
  for (const auto& step : ep.forces) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& c : step)
      list.push_back({{"p", {c.p.x(), c.p.y(), c.p.z()}}, {"f", {c.f.x(), c.f.y(), c.f.z()}}});
    forces.push_back(list);
  }
  nlohmann::json modes = nlohmann::json::array();
  for (auto m : ep.contact_mode) modes.push_back(static_cast<std::int64_t>(m));
  nlohmann::json j = {{"grid_h", ep.grid_h},
                      {"grid_w", ep.grid_w},
                      {"codebook_size", ep.codebook_size},
                      {"contact_codebook_size", ep.contact_codebook_size},
                      {"frame_rate", ep.frame_rate},
                      {"rgb_tokens", ep.rgb_tokens},
                      {"contact_tokens", ep.contact_tokens},
                      {"q", matrix_json(ep.q)},
                      {"qdot", matrix_json(ep.qdot)},
                      {"actions", matrix_json(ep.actions)},
                      {"mu_s", matrix_json(ep.mu_s)},
                      {"mu_k", matrix_json(ep.mu_k)},
                      {"contact_mode", modes},
                      {"forces", forces},
                      {"extra_meta", ep.extra_meta}};
  if (ep.reward) j["reward"] = std::vector<double>(ep.reward->data(), ep.reward->data() + ep.reward->size());
  return j;
}

EpisodeRecord episode_from_json(const nlohmann::json& j) {
  EpisodeRecord ep;
  try {
    ep.grid_h = j.at("grid_h").get<int>();
    ep.grid_w = j.at("grid_w").get<int>();
    ep.codebook_size = j.value("codebook_size", ep.codebook_size);
    ep.contact_codebook_size = j.value("contact_codebook_size", ep.contact_codebook_size);
    ep.frame_rate = j.value("frame_rate", ep.frame_rate);
    ep.rgb_tokens = j.at("rgb_tokens").get<std::vector<tokens::Token>>();
    ep.contact_tokens = j.at("contact_tokens").get<std::vector<tokens::Token>>();
    ep.q = matrix_from_json(j.at("q"), "q");
    ep.qdot = matrix_from_json(j.at("qdot"), "qdot");
    ep.actions = matrix_from_json(j.at("actions"), "actions");
    ep.mu_s = matrix_from_json(j.at("mu_s"), "mu_s");
    ep.mu_k = matrix_from_json(j.at("mu_k"), "mu_k");
    for (auto m : j.at("contact_mode").get<std::vector<std::int64_t>>()) {
      if (m < 0 || m > 3) throw DatasetError(Kind::kRange, "contact mode outside {0,1,2,3}");
      ep.contact_mode.push_back(static_cast<ContactMode>(m));
    }
    for (const auto& step : j.at("forces")) {
      std::vector<ContactRecord<double>> list;
      for (const auto& c : step) {
        const auto p = c.at("p").get<std::vector<double>>();
        const auto f = c.at("f").get<std::vector<double>>();
        if (p.size() != 3 || f.size() != 3) throw FormatError("force p/f must have 3 components");
        list.push_back({Vector3d(p[0], p[1], p[2]), Vector3d(f[0], f[1], f[2])});
      }
      ep.forces.push_back(std::move(list));
    }
    if (j.contains("reward")) {
      const auto r = j["reward"].get<std::vector<double>>();
      ep.reward = Eigen::Map<const VecX<double>>(r.data(), static_cast<Eigen::Index>(r.size()));
    }
    if (j.contains("extra_meta")) ep.extra_meta = j["extra_meta"];
  } catch (const nlohmann::json::exception& e) {
    throw DatasetError(Kind::kSchema, std::string("episode JSON: ") + e.what());
  }
  return ep;
}

EpisodeRecord synthetic_episode(Rng& rng, const SyntheticEpisodeSpec& spec) {
  if (spec.frames < 1 || spec.grid_h < 1 || spec.grid_w < 1 || spec.joints < 1 || spec.bodies < 1 ||
      spec.codebook_size < 1 || spec.codebook_size > 0xFFFFFFFFull || spec.max_contacts < 0)
    throw InvalidInput("invalid synthetic episode spec");
  EpisodeRecord ep;
  ep.grid_h = spec.grid_h;
  ep.grid_w = spec.grid_w;
  ep.codebook_size = spec.codebook_size;
  ep.contact_codebook_size = spec.codebook_size;
  const auto T = static_cast<Eigen::Index>(spec.frames);
  const std::size_t cells = static_cast<std::size_t>(spec.frames) * static_cast<std::size_t>(ep.spatial());
  ep.rgb_tokens.resize(cells);
  ep.contact_tokens.resize(cells);
  for (auto& z : ep.rgb_tokens) z = static_cast<tokens::Token>(rng.uniform_int(spec.codebook_size));
  for (auto& z : ep.contact_tokens) z = static_cast<tokens::Token>(rng.uniform_int(spec.codebook_size));
  auto fill = [&](MatX<double>& m, Eigen::Index cols, double scale) {
    m.resize(T, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = scale * rng.normal();
  };
  fill(ep.q, spec.joints, 1.0);
  fill(ep.qdot, spec.joints, 0.5);
  fill(ep.actions, 3, 0.25);
  ep.mu_s.resize(T, spec.bodies);
  ep.mu_k.resize(T, spec.bodies);
  for (Eigen::Index i = 0; i < ep.mu_s.size(); ++i) {
    ep.mu_s.data()[i] = 0.2 + 0.8 * rng.uniform01();
    ep.mu_k.data()[i] = ep.mu_s.data()[i] * rng.uniform01();
  }
  for (int t = 0; t < spec.frames; ++t) {
    std::vector<ContactRecord<double>> list(rng.uniform_int(static_cast<std::uint64_t>(spec.max_contacts) + 1));
    for (auto& c : list) {
      for (int i = 0; i < 3; ++i) c.p[i] = 0.5 * rng.normal();
      for (int i = 0; i < 3; ++i) c.f[i] = 3.0 * rng.normal();
    }
    ep.forces.push_back(std::move(list));
    ep.contact_mode.push_back(static_cast<ContactMode>(rng.uniform_int(4)));
  }
  if (spec.with_reward) {
    VecX<double> r(T);
    for (Eigen::Index i = 0; i < T; ++i) r[i] = rng.normal();
    ep.reward = r;
  }
  return ep;
}

}  // namespace dreamer::dataset
