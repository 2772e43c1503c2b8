#pragma once

#include "facial/io/track.hpp"

#include <filesystem>

namespace facial::io {

struct OpenFaceTracks {
    FeatureTrack pose;  // [pose_Rx, pose_Ry, pose_Rz, pose_Tx, pose_Ty, pose_Tz]
    FeatureTrack blink; // raw AU45_r intensity (0..5 scale)
};

/// Reads an OpenFace FeatureExtraction CSV (one row per frame). Column names
/// are matched after trimming whitespace; extra columns are ignored. Rows with
/// success == 0 keep their values as exported.
OpenFaceTracks ingest_openface_csv(const std::filesystem::path& path, double fps = 30.0);

} // namespace facial::io
