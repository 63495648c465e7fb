#include "dreamer/archive.hpp"
#include "dreamer/dataset.hpp"

#include "../support/generators.hpp"

#include <doctest.h>

#include <filesystem>
#include <functional>

using namespace dreamer;
using namespace dreamer::dataset;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

EpisodeRecord make_episode(std::uint64_t seed, int frames = 300) {
  Rng rng(seed);
  SyntheticEpisodeSpec spec;
  spec.frames = frames;
  return synthetic_episode(rng, spec);
}

DatasetError::Kind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DatasetError& e) {
    return e.kind();
  }
  FAIL("expected a DatasetError");
  return DatasetError::Kind::kInvariant;
}

void rewrite_entry(const fs::path& zip, const std::string& name, const binary::Bytes& bytes) {
  auto entries = archive::read_entries(zip);
  entries[name] = bytes;
  archive::Entries ordered(entries.begin(), entries.end());
  archive::write_entries(zip, ordered);
}

binary::Bytes as_bytes(const std::string& s) { return binary::Bytes(s.begin(), s.end()); }

}  // namespace

TEST_CASE("directory and zip roundtrips are bit-exact") {
  TempDir tmp("dreamer_dataset_rt");
  const EpisodeRecord ep = make_episode(1, 320);
  for (const char* name : {"ep_dir", "ep.zip"}) {
    pack_episode(ep, tmp.path / name);
    const EpisodeRecord back = load_episode(tmp.path / name);
    CHECK(back == ep);
    CHECK(back.q == ep.q);
    CHECK(back.forces.size() == ep.forces.size());
  }
  const EpisodeRecord no_reward = [] {
    auto e = make_episode(2);
    e.reward.reset();
    return e;
  }();
  pack_episode(no_reward, tmp.path / "nr.zip");
  CHECK_FALSE(load_episode(tmp.path / "nr.zip").reward.has_value());
}

TEST_CASE("token files hold T*S*4 bytes") {
  TempDir tmp("dreamer_dataset_size");
  const EpisodeRecord ep = make_episode(3, 310);
  pack_episode(ep, tmp.path / "ep");
  CHECK(fs::file_size(tmp.path / "ep" / "video.bin") == 310u * 16u * 4u);
  CHECK(fs::file_size(tmp.path / "ep" / "contact_splat.bin") == 310u * 16u * 4u);
  CHECK(fs::exists(tmp.path / "ep" / "meta.json"));
  CHECK(fs::exists(tmp.path / "ep" / "arrays" / "forces.bin"));
}

TEST_CASE("packing is deterministic") {
  TempDir tmp("dreamer_dataset_det");
  const EpisodeRecord ep = make_episode(4);
  pack_episode(ep, tmp.path / "a.zip");
  pack_episode(ep, tmp.path / "b.zip");
  const auto a = binary::read_file(tmp.path / "a.zip");
  const auto b = binary::read_file(tmp.path / "b.zip");
  CHECK(a == b);
  CHECK(archive::encode_zip(episode_entries(ep)) == a);
}

TEST_CASE("invalid episodes are rejected before writing") {
  TempDir tmp("dreamer_dataset_invalid");
  EpisodeRecord ep = make_episode(5);

  EpisodeRecord empty = ep;
  empty.contact_mode.clear();
  CHECK(kind_of([&] { validate_episode(empty); }) == DatasetError::Kind::kInvariant);
  CHECK(kind_of([&] { validate_episode(make_episode(5, 299)); }) == DatasetError::Kind::kInvariant);
  CHECK(kind_of([&] { validate_episode(make_episode(5, 601)); }) == DatasetError::Kind::kInvariant);
  CHECK_NOTHROW(validate_episode(make_episode(5, 600)));
  CHECK_NOTHROW(validate_episode(make_episode(5, 10), HorizonBounds{1, 100}));

  EpisodeRecord big_token = ep;
  big_token.rgb_tokens[17] = 65536;
  CHECK(kind_of([&] { pack_episode(big_token, tmp.path / "x.zip"); }) == DatasetError::Kind::kRange);
  CHECK_FALSE(fs::exists(tmp.path / "x.zip"));

  EpisodeRecord short_q = ep;
  short_q.q.conservativeResize(ep.q.rows() - 1, Eigen::NoChange);
  CHECK(kind_of([&] { validate_episode(short_q); }) == DatasetError::Kind::kShape);

  EpisodeRecord bad_mode = ep;
  bad_mode.contact_mode[0] = static_cast<ContactMode>(7);
  CHECK(kind_of([&] { validate_episode(bad_mode); }) == DatasetError::Kind::kRange);
}

TEST_CASE("corrupted archives produce structured errors") {
  TempDir tmp("dreamer_dataset_corrupt");
  const EpisodeRecord ep = make_episode(6);
  const fs::path zip = tmp.path / "ep.zip";

  pack_episode(ep, zip);
  rewrite_entry(zip, "meta.json", as_bytes("{not json"));
  CHECK(kind_of([&] { load_episode(zip); }) == DatasetError::Kind::kParse);

  pack_episode(ep, zip);
  rewrite_entry(zip, "meta.json", as_bytes("[1,2]"));
  CHECK(kind_of([&] { load_episode(zip); }) == DatasetError::Kind::kSchema);

  pack_episode(ep, zip);
  auto video = archive::read_entries(zip).at("video.bin");
  video.resize(video.size() - 4);
  rewrite_entry(zip, "video.bin", video);
  CHECK(kind_of([&] { load_episode(zip); }) == DatasetError::Kind::kTruncated);

  pack_episode(ep, zip);
  video = archive::read_entries(zip).at("video.bin");
  video[0] = video[1] = video[2] = video[3] = 0xff;
  rewrite_entry(zip, "video.bin", video);
  CHECK(kind_of([&] { load_episode(zip); }) == DatasetError::Kind::kRange);

  pack_episode(ep, tmp.path / "dir");
  fs::remove(tmp.path / "dir" / "arrays" / "q.bin");
  CHECK(kind_of([&] { load_episode(tmp.path / "dir"); }) == DatasetError::Kind::kMissingFile);

  CHECK(kind_of([&] { load_episode(tmp.path / "nope.zip"); }) == DatasetError::Kind::kMissingFile);

  // A flipped payload byte breaks the stored CRC.
  pack_episode(ep, zip);
  auto raw = binary::read_file(zip);
  raw[200] ^= 0x01;
  binary::write_file(zip, raw);
  CHECK_THROWS_AS(load_episode(zip), FormatError);
}

TEST_CASE("strict mode rejects unknown meta keys, lax mode keeps them") {
  TempDir tmp("dreamer_dataset_lax");
  const EpisodeRecord ep = make_episode(7);
  const fs::path zip = tmp.path / "ep.zip";
  pack_episode(ep, zip);
  const auto bytes = archive::read_entries(zip).at("meta.json");
  auto meta = nlohmann::json::parse(bytes.begin(), bytes.end());
  meta["camera_serial"] = "A17";
  rewrite_entry(zip, "meta.json", as_bytes(meta.dump()));
  CHECK(kind_of([&] { load_episode(zip, MetaMode::kStrict); }) == DatasetError::Kind::kSchema);
  const EpisodeRecord lax = load_episode(zip, MetaMode::kLax);
  CHECK(lax.extra_meta.at("camera_serial") == "A17");
  CHECK(lax.rgb_tokens == ep.rgb_tokens);

  // Extra keys survive a rewrite in lax mode.
  pack_episode(lax, tmp.path / "again.zip");
  CHECK(load_episode(tmp.path / "again.zip", MetaMode::kLax).extra_meta == lax.extra_meta);
}

TEST_CASE("array and token codecs") {
  MatX<double> m(2, 3);
  m << 1, 2, 3, 4, 5, -0.0;
  CHECK(decode_f64_array(encode_f64_array(m), "m") == m);
  const std::vector<std::int64_t> v{-1, 0, 1LL << 40};
  CHECK(decode_i64_array(encode_i64_array(v), "v") == v);
  const std::vector<tokens::Token> t{0, 1, 0xffffffffu};
  const auto tb = encode_tokens(t);
  CHECK(tb.size() == 12);
  CHECK(tb[4] == 1);
  CHECK(decode_tokens(tb, "t") == t);
  CHECK_THROWS_AS(decode_f64_array(encode_i64_array(v), "v"), DatasetError);
  auto cut = encode_f64_array(m);
  cut.pop_back();
  CHECK_THROWS_AS(decode_f64_array(cut, "m"), DatasetError);
}

TEST_CASE("concatenation keeps segment boundaries") {
  std::vector<EpisodeRecord> eps{make_episode(8, 300), make_episode(9, 450), make_episode(10, 301)};
  const ConcatView view(eps);
  CHECK(view.frame_count() == 1051);
  CHECK(view.segments() == std::vector<Segment>{{0, 300}, {300, 450}, {750, 301}});
  CHECK(view.tokens().size() == 1051u * 16u);
  CHECK(std::equal(eps[1].rgb_tokens.begin(), eps[1].rgb_tokens.end(), view.tokens().begin() + 300 * 16));
  const auto ids = view.segment_ids();
  CHECK(ids[299] == 0);
  CHECK(ids[300] == 1);
  CHECK(ids[1050] == 2);

  EpisodeRecord other = make_episode(11);
  other.grid_w = 2;
  other.grid_h = 8;
  CHECK_NOTHROW(ConcatView({eps[0], other}));  // same S = 16
  Rng rng(1);
  SyntheticEpisodeSpec spec;
  spec.grid_w = 5;
  CHECK_THROWS_AS(ConcatView({eps[0], synthetic_episode(rng, spec)}), InvalidInput);
}

TEST_CASE("property: windows never cross a segment boundary (exhaustive over small cases)") {
  // Oracle: enumerate every start and keep those whose frames share one segment
  // and whose offset from that segment's first frame is a multiple of stride.
  for (int a = 1; a <= 6; ++a)
    for (int b = 1; b <= 6; ++b)
      for (int c = 1; c <= 4; ++c) {
        std::vector<EpisodeRecord> eps;
        for (int n : {a, b, c}) eps.push_back(make_episode(static_cast<std::uint64_t>(n), n));
        const ConcatView view(eps);
        const auto ids = view.segment_ids();
        for (std::int64_t window = 1; window <= 7; ++window)
          for (std::int64_t stride = 1; stride <= 3; ++stride) {
            std::vector<std::int64_t> expect;
            for (std::int64_t s = 0; s + window <= view.frame_count(); ++s) {
              const auto id = ids[static_cast<std::size_t>(s)];
              std::int64_t first = s;
              while (first > 0 && ids[static_cast<std::size_t>(first - 1)] == id) --first;
              if (id == ids[static_cast<std::size_t>(s + window - 1)] && (s - first) % stride == 0) expect.push_back(s);
            }
            REQUIRE(view.window_starts(window, stride) == expect);
          }
      }
}

TEST_CASE("episode JSON roundtrip") {
  const EpisodeRecord ep = make_episode(12);
  CHECK(episode_from_json(episode_to_json(ep)) == ep);
  auto j = episode_to_json(ep);
  j.erase("q");
  CHECK_THROWS_AS(episode_from_json(j), FormatError);
}
