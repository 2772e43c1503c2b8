#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace facial::io {

// On-disk layout of a FACL1 file:
//   bytes 0..4   "FACL1"
//   uint32 LE    length of the JSON header in bytes
//   JSON header  {"kind": ..., "fps": ..., "shape": [...]} (UTF-8)
//   payload      float32 LE, row-major, product(shape) values
inline constexpr char kMagic[] = "FACL1";
inline constexpr std::size_t kMagicSize = 5;

struct ArrayHeader {
    std::string kind = "array";
    double fps = 0.0;
    std::vector<std::int64_t> shape;

    std::int64_t element_count() const;
};

struct RawArray {
    ArrayHeader header;
    std::vector<float> data;
};

void write_array(const std::filesystem::path& path, const RawArray& array);

/// Throws Error{bad_magic} for missing or wrong magic (including empty files),
/// Error{bad_header} for unparsable JSON and Error{truncated} for a short
/// header or payload.
RawArray read_array(const std::filesystem::path& path);

/// Serialises to an in-memory byte string; write_array is this plus a file write.
std::string encode_array(const RawArray& array);
RawArray decode_array(const std::string& bytes, const std::string& origin);

} // namespace facial::io
