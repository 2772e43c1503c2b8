#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace facial {

using MatrixXf = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixXd = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

} // namespace facial

namespace facial::io {

enum class TrackKind { audio, expression, pose, blink_au, identity, texture, illumination };

inline constexpr int kAudioDim = 29;
inline constexpr int kExpressionDim = 64;
inline constexpr int kPoseDim = 6;
inline constexpr int kBlinkDim = 1;
inline constexpr int kIdentityDim = 80;
inline constexpr int kTextureDim = 80;
inline constexpr int kIlluminationDim = 27;
inline constexpr int kAttributeDim = kExpressionDim + kPoseDim + kBlinkDim;

int expected_dim(TrackKind kind) noexcept;
std::string_view to_string(TrackKind kind) noexcept;
std::optional<TrackKind> track_kind_from_string(std::string_view name) noexcept;

/// Time-major per-frame features. Row t is frame t.
struct FeatureTrack {
    MatrixXf data;
    double fps = 30.0;
    TrackKind kind = TrackKind::audio;

    int frames() const noexcept { return static_cast<int>(data.rows()); }
    int dim() const noexcept { return static_cast<int>(data.cols()); }
};

/// Checks the dim-vs-kind invariant, finiteness and fps > 0.
void validate(const FeatureTrack& track);

FeatureTrack make_track(TrackKind kind, double fps, MatrixXf data);

void write_track(const FeatureTrack& track, const std::filesystem::path& path);
FeatureTrack read_track(const std::filesystem::path& path);

} // namespace facial::io
