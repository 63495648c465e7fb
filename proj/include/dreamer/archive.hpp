#pragma once

// Named-file containers: a plain directory or a zip archive using the stored
// (uncompressed) method. Zip output is deterministic: entries in the given
// order with a fixed 1980-01-01 timestamp.

#include "dreamer/binary_io.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace dreamer::archive {

using Entries = std::vector<std::pair<std::string, binary::Bytes>>;

binary::Bytes encode_zip(const Entries& entries);
/// Reads a stored-method zip; rejects compressed entries and CRC mismatches.
std::map<std::string, binary::Bytes> decode_zip(std::span<const std::uint8_t> bytes);

bool is_zip_path(const std::filesystem::path& path);

/// Writes entries into `path`: a zip when it ends in ".zip", otherwise a directory
/// (created if needed; entry names may contain '/').
void write_entries(const std::filesystem::path& path, const Entries& entries);
std::map<std::string, binary::Bytes> read_entries(const std::filesystem::path& path);

}  // namespace dreamer::archive
