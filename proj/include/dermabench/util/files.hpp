#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace dermabench::util {

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view contents);

std::string read_file(const std::filesystem::path& path);

/// Creates `dir` if needed and checks a file can be created inside it.
/// Throws FilesystemError otherwise.
void ensure_writable_directory(const std::filesystem::path& dir);

std::uint64_t fnv1a64(std::string_view bytes) noexcept;
std::string to_hex(std::uint64_t value);

/// UTC timestamp, "20261019T153012Z".
std::string compact_utc_timestamp();
/// UTC timestamp, ISO-8601.
std::string iso_utc_timestamp();

}  // namespace dermabench::util
