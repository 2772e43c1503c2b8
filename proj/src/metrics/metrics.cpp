#include "facial/metrics/metrics.hpp"

#include "facial/common/error.hpp"

#include <cmath>

namespace facial::metrics {

double lmd(const LandmarkTrack& pred, const LandmarkTrack& truth)
{
    if (pred.frames != truth.frames || pred.points != truth.points || pred.xy.size() != truth.xy.size()
        || pred.xy.size() != static_cast<std::size_t>(pred.frames) * pred.points)
        throw Error(ErrorKind::shape_mismatch, "landmark tracks differ in shape");
    if (pred.xy.empty())
        throw Error(ErrorKind::invalid_argument, "landmark tracks are empty");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.xy.size(); ++i)
        sum += (pred.xy[i] - truth.xy[i]).norm();
    return sum / static_cast<double>(pred.xy.size());
}

LandmarkTrack normalize_mouth_landmarks(const LandmarkTrack& mouth,
                                        std::span<const Eigen::Vector2d> left_eye,
                                        std::span<const Eigen::Vector2d> right_eye)
{
    if (left_eye.size() != static_cast<std::size_t>(mouth.frames) || right_eye.size() != left_eye.size())
        throw Error(ErrorKind::shape_mismatch, "need one eye center per frame");
    LandmarkTrack out = mouth;
    for (int f = 0; f < mouth.frames; ++f) {
        const double iod = (left_eye[static_cast<std::size_t>(f)] - right_eye[static_cast<std::size_t>(f)]).norm();
        if (!(iod > 0.0))
            throw Error(ErrorKind::invalid_argument, "inter-ocular distance is zero");
        Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
        for (int l = 0; l < mouth.points; ++l)
            centroid += mouth.at(f, l);
        centroid /= mouth.points;
        for (int l = 0; l < mouth.points; ++l)
            out.at(f, l) = (mouth.at(f, l) - centroid) / iod;
    }
    return out;
}

std::vector<BlinkEvent> detect_blinks(std::span<const float> au45, double fps, double hi, double lo)
{
    if (!(fps > 0.0))
        throw Error(ErrorKind::invalid_argument, "fps must be positive");
    if (!(0.0 <= lo && lo < hi && hi <= 1.0))
        throw Error(ErrorKind::invalid_argument, "blink thresholds need 0 <= lo < hi <= 1");

    std::vector<BlinkEvent> events;
    bool open = false;
    int onset = 0;
    auto close = [&](int offset) {
        events.push_back({onset, offset, (offset - onset + 1) / fps});
        open = false;
    };
    const int n = static_cast<int>(au45.size());
    for (int t = 0; t < n; ++t) {
        const double v = au45[static_cast<std::size_t>(t)];
        if (!open && v >= hi) {
            open = true;
            onset = t;
        } else if (open && v < lo) {
            close(t - 1);
        }
    }
    if (open)
        close(n - 1);
    return events;
}

BlinkStats blink_stats(std::span<const BlinkEvent> events, double clip_duration_s, double bin_width_s)
{
    if (!(clip_duration_s > 0.0) || !(bin_width_s > 0.0))
        throw Error(ErrorKind::invalid_argument, "clip duration and bin width must be positive");
    BlinkStats stats;
    stats.bin_width_s = bin_width_s;
    stats.rate = static_cast<double>(events.size()) / clip_duration_s;
    if (events.empty())
        return stats;

    double total = 0.0;
    for (const auto& e : events) {
        total += e.duration_s;
        // Durations are multiples of 1/fps; the nudge keeps 0.2 s from landing in bin 1.
        const auto bin = static_cast<std::size_t>(std::floor(e.duration_s / bin_width_s + 1e-9));
        if (stats.duration_histogram.size() <= bin)
            stats.duration_histogram.resize(bin + 1, 0);
        ++stats.duration_histogram[bin];
    }
    stats.mean_duration_s = total / static_cast<double>(events.size());
    return stats;
}

} // namespace facial::metrics
