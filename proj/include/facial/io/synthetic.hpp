#pragma once

#include "facial/io/manifest.hpp"

#include <cstdint>
#include <filesystem>

namespace facial::io {

/// Ground-truth attributes at frame t depend on audio frames t-8 ... t+8
/// (inclusive, 17 frames, indices clamped to the clip).
inline constexpr int kSyntheticContextRadius = 8;
inline constexpr int kSyntheticContext = 2 * kSyntheticContextRadius + 1;

struct SyntheticSpec {
    std::uint64_t seed = 0;
    int clip_count = 4;
    int frames_per_clip = 256;
    int smoothing_radius = 2;
};

/// Linear map R^{29*17} -> R^{71}. Column index = context_offset * 29 + feature.
struct SyntheticMap {
    MatrixXf weights;
};

SyntheticMap make_synthetic_map(std::uint64_t seed);

/// Applies the map per frame then a centered moving average of the given
/// radius (edge frames clamped). Returns frames × 71.
MatrixXf apply_synthetic_map(const SyntheticMap& map, const MatrixXf& audio, int smoothing_radius);

/// Writes clip tracks, manifest.json, synthetic_map.facl and synthetic.json
/// under out_dir. Audio is emitted at 30 FPS.
DatasetManifest generate_synthetic_dataset(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

void write_synthetic_map(const SyntheticMap& map, const std::filesystem::path& path);
SyntheticMap read_synthetic_map(const std::filesystem::path& path);

} // namespace facial::io
