#include "facial/render/image_io.hpp"

#include "facial/common/error.hpp"

#include <nlohmann/json.hpp>

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>

namespace facial::render {

namespace fs = std::filesystem;

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp png, png_const_charp message)
{
    auto* text = static_cast<std::string*>(png_get_error_ptr(png));
    *text = message;
    png_longjmp(png, 1);
}

void png_warn(png_structp, png_const_charp) {}

std::string frame_name(const char* prefix, std::size_t i)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s_%05zu.png", prefix, i);
    return buf;
}

} // namespace

void write_png(const fs::path& path, const face::Image& image)
{
    if (image.channels != 1 && image.channels != 3)
        throw Error(ErrorKind::invalid_argument, "PNG export supports 1 or 3 channels");
    if (image.width < 1 || image.height < 1)
        throw Error(ErrorKind::invalid_argument, "cannot write an empty image");
    File file(std::fopen(path.c_str(), "wb"));
    if (!file)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());

    // Big-endian 16-bit samples, built before libpng takes over control flow.
    const std::size_t row_bytes = static_cast<std::size_t>(image.width) * image.channels * 2;
    std::vector<unsigned char> buffer(row_bytes * image.height);
    for (std::size_t i = 0; i < image.pixels.size(); ++i) {
        const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
        const auto q = static_cast<unsigned>(std::lround(v * 65535.0f));
        buffer[2 * i] = static_cast<unsigned char>(q >> 8);
        buffer[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y)
        rows[y] = buffer.data() + row_bytes * y;

    std::string message;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw Error(ErrorKind::io, "libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw Error(ErrorKind::io, path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.width, image.height, 16,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

face::Image read_png(const fs::path& path)
{
    File file(std::fopen(path.c_str(), "rb"));
    if (!file)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());
    unsigned char sig[8] = {};
    if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw Error(ErrorKind::bad_magic, path.string() + " is not a PNG file");

    std::string message;
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message, png_fail, png_warn);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw Error(ErrorKind::io, "libpng initialisation failed");
    }
    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;
    face::Image image;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw Error(ErrorKind::truncated, path.string() + ": " + message);
    }
    png_init_io(png, file.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);
    // Normalise every variant to 16-bit gray or RGB without alpha.
    png_set_expand(png);
    png_set_strip_alpha(png);
    if (png_get_bit_depth(png, info) < 16)
        png_set_expand_16(png);
    png_read_update_info(png, info);

    const int width = static_cast<int>(png_get_image_width(png, info));
    const int height = static_cast<int>(png_get_image_height(png, info));
    const int channels = png_get_channels(png, info);
    const std::size_t row_bytes = png_get_rowbytes(png, info);
    buffer.resize(row_bytes * height);
    rows.resize(height);
    for (int y = 0; y < height; ++y)
        rows[y] = buffer.data() + row_bytes * y;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    if (channels != 1 && channels != 3)
        throw Error(ErrorKind::bad_header, path.string() + ": unsupported channel layout");
    image = face::Image(width, height, channels);
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        image.pixels[i] = static_cast<float>((buffer[2 * i] << 8) | buffer[2 * i + 1]) / 65535.0f;
    return image;
}

void write_frame_sequence(const fs::path& dir, const FrameSequence& seq)
{
    if (!seq.attention.empty() && seq.attention.size() != seq.rgb.size())
        throw Error(ErrorKind::shape_mismatch, "attention frame count differs from rgb frame count");
    fs::create_directories(dir);
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t i = 0; i < seq.rgb.size(); ++i) {
        nlohmann::json entry = {{"index", i}, {"rgb", frame_name("rgb", i)}};
        write_png(dir / frame_name("rgb", i), seq.rgb[i]);
        if (!seq.attention.empty()) {
            entry["attention"] = frame_name("att", i);
            write_png(dir / frame_name("att", i), seq.attention[i]);
        }
        frames.push_back(entry);
    }
    const int w = seq.rgb.empty() ? 0 : seq.rgb.front().width;
    const int h = seq.rgb.empty() ? 0 : seq.rgb.front().height;
    std::ofstream out(dir / "frames.json");
    if (!out)
        throw Error(ErrorKind::io, "cannot write frame index in " + dir.string());
    out << nlohmann::json{{"fps", seq.fps}, {"width", w}, {"height", h}, {"frames", frames}}.dump(2) << '\n';
}

FrameSequence read_frame_sequence(const fs::path& dir)
{
    std::ifstream in(dir / "frames.json");
    if (!in)
        throw Error(ErrorKind::io, "no frame index in " + dir.string());
    FrameSequence seq;
    try {
        const auto doc = nlohmann::json::parse(in);
        seq.fps = doc.at("fps").get<double>();
        for (const auto& entry : doc.at("frames")) {
            seq.rgb.push_back(read_png(dir / entry.at("rgb").get<std::string>()));
            if (entry.contains("attention"))
                seq.attention.push_back(read_png(dir / entry.at("attention").get<std::string>()));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, "frame index: " + std::string(e.what()));
    }
    if (!seq.attention.empty() && seq.attention.size() != seq.rgb.size())
        throw Error(ErrorKind::bad_header, "frame index lists attention maps for only some frames");
    return seq;
}

} // namespace facial::render
