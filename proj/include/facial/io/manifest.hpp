#pragma once

#include "facial/io/track.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace facial::io {

enum class Split { train, val, test };

std::string_view to_string(Split split) noexcept;

struct ClipEntry {
    std::string clip_id;
    std::filesystem::path audio_track_path;
    /// Keyed by track kind name ("expression", "pose", "blink_au", and
    /// optionally "identity", "texture", "illumination").
    std::map<std::string, std::filesystem::path> attribute_track_paths;
    int frame_count = 0;
};

struct DatasetManifest {
    std::vector<ClipEntry> clips;
    Split split = Split::train;
};

nlohmann::json to_json(const DatasetManifest& manifest);
DatasetManifest manifest_from_json(const nlohmann::json& doc);

/// Relative track paths are stored relative to the manifest's directory.
void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest read_manifest(const std::filesystem::path& path);

/// All tracks of one clip, loaded and validated.
struct ClipTracks {
    std::string clip_id;
    FeatureTrack audio;
    FeatureTrack expression;
    FeatureTrack pose;
    FeatureTrack blink;
    std::optional<FeatureTrack> identity;
    std::optional<FeatureTrack> texture;
    std::optional<FeatureTrack> illumination;

    /// frames × 71 concatenation of expression, pose and blink.
    MatrixXf attributes() const;
};

ClipTracks load_clip(const ClipEntry& entry);

/// Throws Error{shape_mismatch} unless audio, expression, pose and blink
/// share one frame count (and it matches entry.frame_count when nonzero).
void check_frame_counts(const ClipTracks& clip, int declared_frames = 0);

const ClipEntry& find_clip(const DatasetManifest& manifest, const std::string& clip_id);

} // namespace facial::io
