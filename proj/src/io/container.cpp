#include "facial/io/container.hpp"

#include "facial/common/error.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace facial::io {

namespace {

static_assert(sizeof(float) == 4);

void append_u32_le(std::string& out, std::uint32_t value)
{
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFFu));
}

std::uint32_t read_u32_le(const char* p)
{
    std::uint32_t value = 0;
    for (int i = 0; i < 4; ++i)
        value |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    return value;
}

void append_f32_le(std::string& out, float value)
{
    append_u32_le(out, std::bit_cast<std::uint32_t>(value));
}

} // namespace

std::int64_t ArrayHeader::element_count() const
{
    std::int64_t count = 1;
    for (auto extent : shape)
        count *= extent;
    return count;
}

std::string encode_array(const RawArray& array)
{
    const auto expected = array.header.element_count();
    if (expected != static_cast<std::int64_t>(array.data.size()))
        throw Error(ErrorKind::shape_mismatch, "array shape does not match payload size");

    nlohmann::json header = {
        {"kind", array.header.kind},
        {"fps", array.header.fps},
        {"shape", array.header.shape},
    };
    const std::string header_text = header.dump();

    std::string out;
    out.reserve(kMagicSize + 4 + header_text.size() + 4 * array.data.size());
    out.append(kMagic, kMagicSize);
    append_u32_le(out, static_cast<std::uint32_t>(header_text.size()));
    out += header_text;
    for (float v : array.data)
        append_f32_le(out, v);
    return out;
}

RawArray decode_array(const std::string& bytes, const std::string& origin)
{
    if (bytes.size() < kMagicSize || std::memcmp(bytes.data(), kMagic, kMagicSize) != 0)
        throw Error(ErrorKind::bad_magic, origin + ": missing FACL1 magic");
    if (bytes.size() < kMagicSize + 4)
        throw Error(ErrorKind::truncated, origin + ": truncated header length");

    const std::size_t header_len = read_u32_le(bytes.data() + kMagicSize);
    const std::size_t header_begin = kMagicSize + 4;
    if (bytes.size() < header_begin + header_len)
        throw Error(ErrorKind::truncated, origin + ": truncated header");

    RawArray array;
    try {
        const auto header = nlohmann::json::parse(bytes.begin() + header_begin,
                                                  bytes.begin() + header_begin + header_len);
        array.header.kind = header.at("kind").get<std::string>();
        array.header.fps = header.at("fps").get<double>();
        array.header.shape = header.at("shape").get<std::vector<std::int64_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, origin + ": " + e.what());
    }
    for (auto extent : array.header.shape) {
        if (extent < 0)
            throw Error(ErrorKind::bad_header, origin + ": negative extent in shape");
    }

    const auto count = static_cast<std::size_t>(array.header.element_count());
    const std::size_t payload_begin = header_begin + header_len;
    if (bytes.size() - payload_begin < 4 * count)
        throw Error(ErrorKind::truncated, origin + ": truncated payload");
    if (bytes.size() - payload_begin > 4 * count)
        throw Error(ErrorKind::bad_header, origin + ": trailing bytes after payload");

    array.data.resize(count);
    const char* p = bytes.data() + payload_begin;
    for (std::size_t i = 0; i < count; ++i, p += 4)
        array.data[i] = std::bit_cast<float>(read_u32_le(p));
    return array;
}

void write_array(const std::filesystem::path& path, const RawArray& array)
{
    const std::string bytes = encode_array(array);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw Error(ErrorKind::io, "write failed: " + path.string());
}

RawArray read_array(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return decode_array(buffer.str(), path.string());
}

} // namespace facial::io
