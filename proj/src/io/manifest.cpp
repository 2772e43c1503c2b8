#include "facial/io/manifest.hpp"

#include "facial/common/error.hpp"

#include <fstream>

namespace facial::io {

namespace fs = std::filesystem;

std::string_view to_string(Split split) noexcept
{
    switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    }
    return "train";
}

namespace {

Split split_from_string(const std::string& name)
{
    if (name == "train")
        return Split::train;
    if (name == "val")
        return Split::val;
    if (name == "test")
        return Split::test;
    throw Error(ErrorKind::bad_header, "unknown split '" + name + "'");
}

// In-memory paths are relative to the working directory; stored ones are
// relative to the manifest's directory when they live below it.
fs::path relative_if_inside(const fs::path& p, const fs::path& base)
{
    const fs::path abs = fs::absolute(p).lexically_normal();
    auto rel = abs.lexically_relative(base.lexically_normal());
    if (rel.empty() || *rel.begin() == "..")
        return abs;
    return rel;
}

} // namespace

nlohmann::json to_json(const DatasetManifest& manifest)
{
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& clip : manifest.clips) {
        nlohmann::json attrs = nlohmann::json::object();
        for (const auto& [name, path] : clip.attribute_track_paths)
            attrs[name] = path.generic_string();
        clips.push_back({
            {"clip_id", clip.clip_id},
            {"audio_track_path", clip.audio_track_path.generic_string()},
            {"attribute_track_paths", attrs},
            {"frame_count", clip.frame_count},
        });
    }
    return {{"split", std::string(to_string(manifest.split))}, {"clips", clips}};
}

DatasetManifest manifest_from_json(const nlohmann::json& doc)
{
    DatasetManifest manifest;
    try {
        manifest.split = split_from_string(doc.value("split", std::string("train")));
        for (const auto& c : doc.at("clips")) {
            ClipEntry clip;
            clip.clip_id = c.at("clip_id").get<std::string>();
            clip.audio_track_path = c.at("audio_track_path").get<std::string>();
            for (const auto& [name, path] : c.at("attribute_track_paths").items())
                clip.attribute_track_paths[name] = path.get<std::string>();
            clip.frame_count = c.value("frame_count", 0);
            manifest.clips.push_back(std::move(clip));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, std::string("malformed manifest: ") + e.what());
    }
    return manifest;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path)
{
    const fs::path base = fs::absolute(path).parent_path();
    DatasetManifest stored = manifest;
    for (auto& clip : stored.clips) {
        clip.audio_track_path = relative_if_inside(clip.audio_track_path, base);
        for (auto& [name, p] : clip.attribute_track_paths)
            p = relative_if_inside(p, base);
    }
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
    out << to_json(stored).dump(2) << '\n';
}

DatasetManifest read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorKind::io, "cannot open for reading: " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::bad_header, path.string() + ": " + e.what());
    }
    DatasetManifest manifest = manifest_from_json(doc);
    const fs::path base = fs::absolute(path).parent_path();
    for (auto& clip : manifest.clips) {
        if (clip.audio_track_path.is_relative())
            clip.audio_track_path = base / clip.audio_track_path;
        for (auto& [name, p] : clip.attribute_track_paths)
            if (p.is_relative())
                p = base / p;
    }
    return manifest;
}

MatrixXf ClipTracks::attributes() const
{
    MatrixXf out(expression.frames(), kAttributeDim);
    out << expression.data, pose.data, blink.data;
    return out;
}

ClipTracks load_clip(const ClipEntry& entry)
{
    auto require = [&](const char* name) -> const fs::path& {
        auto it = entry.attribute_track_paths.find(name);
        if (it == entry.attribute_track_paths.end())
            throw Error(ErrorKind::bad_header, "clip " + entry.clip_id + " lacks a " + name + " track");
        return it->second;
    };
    auto expect_kind = [&](FeatureTrack t, TrackKind kind) {
        if (t.kind != kind)
            throw Error(ErrorKind::bad_header, "clip " + entry.clip_id + ": expected a "
                                                   + std::string(to_string(kind)) + " track");
        return t;
    };

    ClipTracks clip;
    clip.clip_id = entry.clip_id;
    clip.audio = expect_kind(read_track(entry.audio_track_path), TrackKind::audio);
    clip.expression = expect_kind(read_track(require("expression")), TrackKind::expression);
    clip.pose = expect_kind(read_track(require("pose")), TrackKind::pose);
    clip.blink = expect_kind(read_track(require("blink_au")), TrackKind::blink_au);
    auto optional_track = [&](const char* name, TrackKind kind) -> std::optional<FeatureTrack> {
        auto it = entry.attribute_track_paths.find(name);
        if (it == entry.attribute_track_paths.end())
            return std::nullopt;
        return expect_kind(read_track(it->second), kind);
    };
    clip.identity = optional_track("identity", TrackKind::identity);
    clip.texture = optional_track("texture", TrackKind::texture);
    clip.illumination = optional_track("illumination", TrackKind::illumination);
    return clip;
}

void check_frame_counts(const ClipTracks& clip, int declared_frames)
{
    const int n = clip.audio.frames();
    const bool aligned = clip.expression.frames() == n && clip.pose.frames() == n && clip.blink.frames() == n;
    if (!aligned || (declared_frames > 0 && declared_frames != n)) {
        throw Error(ErrorKind::shape_mismatch,
                    "clip " + clip.clip_id + ": frame counts differ (audio " + std::to_string(n)
                        + ", expression " + std::to_string(clip.expression.frames()) + ", pose "
                        + std::to_string(clip.pose.frames()) + ", blink "
                        + std::to_string(clip.blink.frames()) + ", declared "
                        + std::to_string(declared_frames) + ")");
    }
}

const ClipEntry& find_clip(const DatasetManifest& manifest, const std::string& clip_id)
{
    for (const auto& clip : manifest.clips)
        if (clip.clip_id == clip_id)
            return clip;
    throw Error(ErrorKind::invalid_argument, "no clip named '" + clip_id + "' in manifest");
}

} // namespace facial::io
