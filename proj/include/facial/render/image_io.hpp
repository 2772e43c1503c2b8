#pragma once

#include "facial/face/raster.hpp"

#include <filesystem>
#include <vector>

namespace facial::render {

/// 16-bit PNG, gray for 1 channel and RGB for 3. Values are clamped to
/// [0, 1] and quantized to 1/65535.
void write_png(const std::filesystem::path& path, const face::Image& image);
face::Image read_png(const std::filesystem::path& path);

struct FrameSequence {
    double fps = 30.0;
    std::vector<face::Image> rgb;
    std::vector<face::Image> attention; // empty when not exported
};

/// Writes rgb_NNNNN.png (and att_NNNNN.png) plus frames.json, an index with
/// fps, size and the per-frame file names.
void write_frame_sequence(const std::filesystem::path& dir, const FrameSequence& seq);
FrameSequence read_frame_sequence(const std::filesystem::path& dir);

} // namespace facial::render
