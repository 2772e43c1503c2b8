#pragma once

#include "facial/io/track.hpp"

#include <string>
#include <vector>

namespace facial::audio {

/// The local phonetic context of frame t is the half-open slice [t-8, t+8).
/// Flip kContextAfter to 9 for the inclusive 17-frame reading.
inline constexpr int kContextBefore = 8;
inline constexpr int kContextAfter = 8;
inline constexpr int kContextFrames = kContextBefore + kContextAfter;

inline constexpr int kDefaultWindow = 128;
inline constexpr int kDefaultStride = 5;

/// Number of output frames when resampling `frames` inputs from source_fps to
/// target_fps with both endpoints sample-aligned.
int resampled_frame_count(int frames, double source_fps, double target_fps);

/// Linear interpolation resampling. Output frame i sits at input position
/// i * source_fps / target_fps. Constant signals are reproduced bit-exactly.
io::FeatureTrack resample_features(const io::FeatureTrack& track, double target_fps);

struct WindowSample {
    MatrixXf audio;              // T × 29
    Eigen::VectorXf initial_state; // 71, equals targets.row(0)
    MatrixXf targets;            // T × 71
    std::string clip_id;
    int start_frame = 0;
};

std::vector<WindowSample> slice_windows(const io::FeatureTrack& audio,
                                        const io::FeatureTrack& expression,
                                        const io::FeatureTrack& pose,
                                        const io::FeatureTrack& blink,
                                        int window = kDefaultWindow,
                                        int stride = kDefaultStride,
                                        const std::string& clip_id = {});

int window_count(int frames, int window, int stride);

/// 16 × 29 block of frames t-8 .. t+7 with indices clamped to the clip.
struct LocalAudioContext {
    MatrixXf window;
};

LocalAudioContext local_context(const MatrixXf& audio, int t);
LocalAudioContext local_context(const io::FeatureTrack& audio, int t);

} // namespace facial::audio
