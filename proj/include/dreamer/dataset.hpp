#pragma once

// Episode archives: token streams, numeric state arrays and meta.json.
//
// Layout inside a directory or stored zip:
//   video.bin          u32 LE RGB tokens, frame-major then row-major (T*S*4 bytes)
//   contact_splat.bin  u32 LE contact-splat tokens, same layout
//   meta.json          see schemas/meta.schema.json
//   arrays/<name>.bin  numeric arrays (q, qdot, actions, mu_s, mu_k,
//                      contact_mode, force_counts, forces, reward)

#include "dreamer/binary_io.hpp"
#include "dreamer/contact_splat.hpp"
#include "dreamer/random.hpp"
#include "dreamer/tokens/vocab.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace dreamer::dataset {

enum class ContactMode : std::int64_t { kNoContact = 0, kSticking = 1, kSliding = 2, kSeparating = 3 };

class DatasetError : public FormatError {
 public:
  enum class Kind { kMissingFile, kTruncated, kParse, kSchema, kShape, kRange, kInvariant };

  DatasetError(Kind kind, const std::string& message) : FormatError(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct EpisodeRecord {
  int grid_h = 0;
  int grid_w = 0;
  std::uint64_t codebook_size = 65536;
  std::uint64_t contact_codebook_size = 65536;
  double frame_rate = 50.0;
  std::vector<tokens::Token> rgb_tokens;      // T*S
  std::vector<tokens::Token> contact_tokens;  // T*S
  MatX<double> q;                             // T x N_j
  MatX<double> qdot;                          // T x N_j
  MatX<double> actions;                       // T x 3
  std::vector<std::vector<ContactRecord<double>>> forces;  // T lists
  MatX<double> mu_s;                                       // T x bodies
  MatX<double> mu_k;                                       // T x bodies
  std::vector<ContactMode> contact_mode;                   // T
  std::optional<VecX<double>> reward;                      // T
  nlohmann::json extra_meta = nlohmann::json::object();    // unknown meta fields kept in lax mode

  int spatial() const { return grid_h * grid_w; }
  int frames() const { return static_cast<int>(contact_mode.size()); }

  bool operator==(const EpisodeRecord& other) const;
};

struct HorizonBounds {
  int min_frames = 300;
  int max_frames = 600;
};

/// Checks every cross-field invariant; throws DatasetError(kInvariant/kRange).
void validate_episode(const EpisodeRecord& ep, const HorizonBounds& bounds = {});

/// Numeric array file: "DRMARRAY" | u32 version=1 | u32 dtype (1=f64, 2=i64)
/// | u32 ndim | u64 dims[ndim] | LE data.
binary::Bytes encode_f64_array(const MatX<double>& m);
MatX<double> decode_f64_array(std::span<const std::uint8_t> bytes, const std::string& name);
binary::Bytes encode_i64_array(std::span<const std::int64_t> v);
std::vector<std::int64_t> decode_i64_array(std::span<const std::uint8_t> bytes, const std::string& name);

binary::Bytes encode_tokens(std::span<const tokens::Token> tokens);
std::vector<tokens::Token> decode_tokens(std::span<const std::uint8_t> bytes, const std::string& name);

/// Deterministic archive contents in write order.
std::vector<std::pair<std::string, binary::Bytes>> episode_entries(const EpisodeRecord& ep,
                                                                   const HorizonBounds& bounds = {});

void pack_episode(const EpisodeRecord& ep, const std::filesystem::path& archive, const HorizonBounds& bounds = {});

enum class MetaMode { kStrict, kLax };

EpisodeRecord load_episode(const std::filesystem::path& archive, MetaMode mode = MetaMode::kStrict,
                           const HorizonBounds& bounds = {});

struct Segment {
  std::int64_t start = 0;
  std::int64_t length = 0;
  bool operator==(const Segment&) const = default;
};

/// Episodes concatenated in input order over a shared S.
class ConcatView {
 public:
  explicit ConcatView(const std::vector<EpisodeRecord>& episodes);

  int spatial() const { return spatial_; }
  std::int64_t frame_count() const { return frame_count_; }
  const std::vector<tokens::Token>& tokens() const { return tokens_; }
  const std::vector<Segment>& segments() const { return segments_; }

  /// Segment id of each frame.
  std::vector<std::int64_t> segment_ids() const;

  /// Start frames of every window of `window` frames (step `stride`) that lies
  /// entirely inside one segment, in stream order.
  std::vector<std::int64_t> window_starts(std::int64_t window, std::int64_t stride = 1) const;

 private:
  int spatial_ = 0;
  std::int64_t frame_count_ = 0;
  std::vector<tokens::Token> tokens_;
  std::vector<Segment> segments_;
};

struct SyntheticEpisodeSpec {
  int frames = 300;
  int grid_h = 4;
  int grid_w = 4;
  int joints = 7;
  int bodies = 2;
  std::uint64_t codebook_size = 65536;
  int max_contacts = 3;
  bool with_reward = true;
};

/// Random but valid episode for tests and demos; a pure function of the Rng state.
EpisodeRecord synthetic_episode(Rng& rng, const SyntheticEpisodeSpec& spec);

/// Episode <-> JSON, used by the CLI for pack/unpack.
nlohmann::json episode_to_json(const EpisodeRecord& ep);
EpisodeRecord episode_from_json(const nlohmann::json& j);

}  // namespace dreamer::dataset
