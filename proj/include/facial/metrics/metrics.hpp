#pragma once

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace facial::metrics {

/// F frames of L 2-D landmarks, frame-major.
struct LandmarkTrack {
    int frames = 0;
    int points = 0;
    std::vector<Eigen::Vector2d> xy;

    const Eigen::Vector2d& at(int f, int l) const { return xy[static_cast<std::size_t>(f) * points + l]; }
    Eigen::Vector2d& at(int f, int l) { return xy[static_cast<std::size_t>(f) * points + l]; }
};

/// Mean Euclidean distance over all frames and landmarks. Throws
/// Error{shape_mismatch} for unequal shapes.
double lmd(const LandmarkTrack& pred, const LandmarkTrack& truth);

/// LMD preprocessing: per frame, translate the mouth landmarks to their
/// centroid and divide by the inter-ocular distance of that frame.
LandmarkTrack normalize_mouth_landmarks(const LandmarkTrack& mouth,
                                        std::span<const Eigen::Vector2d> left_eye,
                                        std::span<const Eigen::Vector2d> right_eye);

inline constexpr double kDefaultBlinkHigh = 0.5;
inline constexpr double kDefaultBlinkLow = 0.3;
inline constexpr double kHumanBlinkRateLow = 0.28;
inline constexpr double kHumanBlinkRateHigh = 0.45;

struct BlinkEvent {
    int onset_frame = 0;
    int offset_frame = 0;
    double duration_s = 0.0; // (offset - onset + 1) / fps
};

/// Hysteresis detector on a normalised AU45 signal: an event opens on the
/// first frame with value >= hi and closes after the last frame before the
/// value drops below lo. An event still open at the end closes on the last frame.
std::vector<BlinkEvent> detect_blinks(std::span<const float> au45, double fps,
                                      double hi = kDefaultBlinkHigh, double lo = kDefaultBlinkLow);

struct BlinkStats {
    double rate = 0.0;                          // blinks per second
    std::optional<double> mean_duration_s;      // absent when there are no events
    double bin_width_s = 0.1;
    std::vector<int> duration_histogram;        // bin k counts durations in [k·w, (k+1)·w)
};

BlinkStats blink_stats(std::span<const BlinkEvent> events, double clip_duration_s, double bin_width_s = 0.1);

} // namespace facial::metrics
