#include "dreamer/archive.hpp"

#include <zlib.h>

namespace dreamer::archive {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::uint16_t kDosDate = (0 << 9) | (1 << 5) | 1;  // 1980-01-01

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  std::size_t done = 0;
  while (done < data.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(data.size() - done, 1u << 30));
    crc = crc32(crc, data.data() + done, chunk);
    done += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

binary::Bytes encode_zip(const Entries& entries) {
  using binary::put_le;
  binary::Bytes out;
  binary::Bytes central;
  for (const auto& [name, data] : entries) {
    if (data.size() >= 0xFFFFFFFFu || out.size() >= 0xFFFFFFFFu) throw InvalidInput("zip64 archives are not supported");
    const std::uint32_t crc = crc_of(data);
    const auto offset = static_cast<std::uint32_t>(out.size());
    const auto size = static_cast<std::uint32_t>(data.size());
    const auto name_len = static_cast<std::uint16_t>(name.size());

    put_le<std::uint32_t>(out, kLocalSig);
    put_le<std::uint16_t>(out, 20);  // version needed
    put_le<std::uint16_t>(out, 0);   // flags
    put_le<std::uint16_t>(out, 0);   // stored
    put_le<std::uint16_t>(out, 0);   // time
    put_le<std::uint16_t>(out, kDosDate);
    put_le<std::uint32_t>(out, crc);
    put_le<std::uint32_t>(out, size);
    put_le<std::uint32_t>(out, size);
    put_le<std::uint16_t>(out, name_len);
    put_le<std::uint16_t>(out, 0);
    out.insert(out.end(), name.begin(), name.end());
    out.insert(out.end(), data.begin(), data.end());

    put_le<std::uint32_t>(central, kCentralSig);
    put_le<std::uint16_t>(central, 20);  // version made by
    put_le<std::uint16_t>(central, 20);
    put_le<std::uint16_t>(central, 0);
    put_le<std::uint16_t>(central, 0);
    put_le<std::uint16_t>(central, 0);
    put_le<std::uint16_t>(central, kDosDate);
    put_le<std::uint32_t>(central, crc);
    put_le<std::uint32_t>(central, size);
    put_le<std::uint32_t>(central, size);
    put_le<std::uint16_t>(central, name_len);
    put_le<std::uint16_t>(central, 0);  // extra
    put_le<std::uint16_t>(central, 0);  // comment
    put_le<std::uint16_t>(central, 0);  // disk
    put_le<std::uint16_t>(central, 0);  // internal attrs
    put_le<std::uint32_t>(central, 0);  // external attrs
    put_le<std::uint32_t>(central, offset);
    central.insert(central.end(), name.begin(), name.end());
  }
  const auto central_offset = static_cast<std::uint32_t>(out.size());
  out.insert(out.end(), central.begin(), central.end());
  put_le<std::uint32_t>(out, kEndSig);
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint16_t>(out, 0);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(entries.size()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(entries.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(central.size()));
  put_le<std::uint32_t>(out, central_offset);
  put_le<std::uint16_t>(out, 0);
  return out;
}

std::map<std::string, binary::Bytes> decode_zip(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 22) throw FormatError("zip: too short");
  // The end record sits in the last 22 + 65535 bytes.
  std::size_t end_pos = std::string::npos;
  const std::size_t lowest = bytes.size() > 22 + 65535 ? bytes.size() - 22 - 65535 : 0;
  for (std::size_t p = bytes.size() - 22 + 1; p-- > lowest;) {
    binary::Reader r(bytes.subspan(p, 4), "zip");
    if (r.get<std::uint32_t>() == kEndSig) {
      end_pos = p;
      break;
    }
  }
  if (end_pos == std::string::npos) throw FormatError("zip: no end of central directory");

  binary::Reader end(bytes.subspan(end_pos), "zip");
  end.seek(10);
  const auto count = end.get<std::uint16_t>();
  end.get<std::uint32_t>();
  const auto central_offset = end.get<std::uint32_t>();

  std::map<std::string, binary::Bytes> out;
  binary::Reader central(bytes, "zip");
  central.seek(central_offset);
  for (std::uint16_t i = 0; i < count; ++i) {
    if (central.get<std::uint32_t>() != kCentralSig) throw FormatError("zip: bad central directory entry");
    central.take(6);
    const auto method = central.get<std::uint16_t>();
    central.take(4);
    const auto crc = central.get<std::uint32_t>();
    const auto csize = central.get<std::uint32_t>();
    const auto usize = central.get<std::uint32_t>();
    const auto name_len = central.get<std::uint16_t>();
    const auto extra_len = central.get<std::uint16_t>();
    const auto comment_len = central.get<std::uint16_t>();
    central.take(8);
    const auto local_offset = central.get<std::uint32_t>();
    const auto name_bytes = central.take(name_len);
    central.take(static_cast<std::size_t>(extra_len) + comment_len);
    const std::string name(name_bytes.begin(), name_bytes.end());
    if (method != 0 || csize != usize) throw FormatError("zip: entry " + name + " is compressed (only stored is supported)");

    binary::Reader local(bytes, "zip");
    local.seek(local_offset);
    if (local.get<std::uint32_t>() != kLocalSig) throw FormatError("zip: bad local header for " + name);
    local.take(22);
    const auto lname = local.get<std::uint16_t>();
    const auto lextra = local.get<std::uint16_t>();
    local.take(static_cast<std::size_t>(lname) + lextra);
    const auto data = local.take(csize);
    if (crc_of(data) != crc) throw FormatError("zip: CRC mismatch for " + name);
    out.emplace(name, binary::Bytes(data.begin(), data.end()));
  }
  return out;
}

bool is_zip_path(const std::filesystem::path& path) { return path.extension() == ".zip"; }

void write_entries(const std::filesystem::path& path, const Entries& entries) {
  if (is_zip_path(path)) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    binary::write_file(path, encode_zip(entries));
    return;
  }
  std::filesystem::create_directories(path);
  for (const auto& [name, data] : entries) {
    const auto target = path / name;
    std::filesystem::create_directories(target.parent_path());
    binary::write_file(target, data);
  }
}

std::map<std::string, binary::Bytes> read_entries(const std::filesystem::path& path) {
  if (is_zip_path(path) && std::filesystem::is_regular_file(path)) return decode_zip(binary::read_file(path));
  if (!std::filesystem::is_directory(path)) throw FormatError("archive not found: " + path.string());
  std::map<std::string, binary::Bytes> out;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(path)) {
    if (!entry.is_regular_file()) continue;
    out.emplace(std::filesystem::relative(entry.path(), path).generic_string(), binary::read_file(entry.path()));
  }
  return out;
}

}  // namespace dreamer::archive
