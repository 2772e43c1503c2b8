#include "facial/io/track.hpp"

#include "facial/common/error.hpp"
#include "facial/io/container.hpp"

#include <array>
#include <utility>

namespace facial::io {

namespace {

constexpr std::array<std::pair<TrackKind, std::string_view>, 7> kKindNames{{
    {TrackKind::audio, "audio"},
    {TrackKind::expression, "expression"},
    {TrackKind::pose, "pose"},
    {TrackKind::blink_au, "blink_au"},
    {TrackKind::identity, "identity"},
    {TrackKind::texture, "texture"},
    {TrackKind::illumination, "illumination"},
}};

} // namespace

int expected_dim(TrackKind kind) noexcept
{
    switch (kind) {
    case TrackKind::audio: return kAudioDim;
    case TrackKind::expression: return kExpressionDim;
    case TrackKind::pose: return kPoseDim;
    case TrackKind::blink_au: return kBlinkDim;
    case TrackKind::identity: return kIdentityDim;
    case TrackKind::texture: return kTextureDim;
    case TrackKind::illumination: return kIlluminationDim;
    }
    return 0;
}

std::string_view to_string(TrackKind kind) noexcept
{
    for (const auto& [k, name] : kKindNames)
        if (k == kind)
            return name;
    return "unknown";
}

std::optional<TrackKind> track_kind_from_string(std::string_view name) noexcept
{
    for (const auto& [k, n] : kKindNames)
        if (n == name)
            return k;
    return std::nullopt;
}

void validate(const FeatureTrack& track)
{
    if (!(track.fps > 0.0))
        throw Error(ErrorKind::invalid_argument, "track fps must be positive");
    if (track.dim() != expected_dim(track.kind)) {
        throw Error(ErrorKind::dim_mismatch,
                    std::string(to_string(track.kind)) + " track must have dim "
                        + std::to_string(expected_dim(track.kind)) + ", got "
                        + std::to_string(track.dim()));
    }
    if (!track.data.allFinite())
        throw Error(ErrorKind::invalid_argument, "track contains non-finite values");
}

FeatureTrack make_track(TrackKind kind, double fps, MatrixXf data)
{
    FeatureTrack track{std::move(data), fps, kind};
    validate(track);
    return track;
}

void write_track(const FeatureTrack& track, const std::filesystem::path& path)
{
    validate(track);
    RawArray array;
    array.header.kind = std::string(to_string(track.kind));
    array.header.fps = track.fps;
    array.header.shape = {track.data.rows(), track.data.cols()};
    array.data.assign(track.data.data(), track.data.data() + track.data.size());
    write_array(path, array);
}

FeatureTrack read_track(const std::filesystem::path& path)
{
    RawArray array = read_array(path);
    const auto kind = track_kind_from_string(array.header.kind);
    if (!kind)
        throw Error(ErrorKind::bad_header, path.string() + ": unknown track kind '" + array.header.kind + "'");
    if (array.header.shape.size() != 2)
        throw Error(ErrorKind::bad_header, path.string() + ": track must be two-dimensional");

    FeatureTrack track;
    track.kind = *kind;
    track.fps = array.header.fps;
    track.data = Eigen::Map<const MatrixXf>(array.data.data(), array.header.shape[0], array.header.shape[1]);
    try {
        validate(track);
    } catch (const Error& e) {
        throw Error(e.kind(), path.string() + ": " + e.what());
    }
    return track;
}

} // namespace facial::io
