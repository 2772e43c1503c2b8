#include "facial/audio/pipeline.hpp"

#include "facial/common/error.hpp"

#include <algorithm>
#include <cmath>

namespace facial::audio {

int resampled_frame_count(int frames, double source_fps, double target_fps)
{
    if (frames < 1)
        return 0;
    // Small slack keeps exact ratios like 49 * 30/50 = 29.4 from being
    // disturbed by rounding in the division.
    const double span = static_cast<double>(frames - 1) * target_fps / source_fps;
    return static_cast<int>(std::floor(span + 1e-9)) + 1;
}

io::FeatureTrack resample_features(const io::FeatureTrack& track, double target_fps)
{
    if (!(target_fps > 0.0))
        throw Error(ErrorKind::invalid_argument, "target fps must be positive");
    if (track.frames() < 2)
        throw Error(ErrorKind::invalid_argument, "resampling needs at least two input frames");

    const int in_frames = track.frames();
    const int out_frames = resampled_frame_count(in_frames, track.fps, target_fps);
    const double step = track.fps / target_fps;

    MatrixXf out(out_frames, track.dim());
    for (int i = 0; i < out_frames; ++i) {
        const double pos = i * step;
        int lo = static_cast<int>(std::floor(pos));
        double frac = pos - lo;
        if (lo >= in_frames - 1) {
            lo = in_frames - 1;
            frac = 0.0;
        }
        if (frac == 0.0) {
            out.row(i) = track.data.row(lo);
            continue;
        }
        for (int d = 0; d < track.dim(); ++d) {
            const double a = track.data(lo, d);
            const double b = track.data(lo + 1, d);
            out(i, d) = static_cast<float>(a + frac * (b - a));
        }
    }
    return io::FeatureTrack{std::move(out), target_fps, track.kind};
}

int window_count(int frames, int window, int stride)
{
    if (window <= 0 || stride <= 0 || frames < window)
        return 0;
    return (frames - window) / stride + 1;
}

std::vector<WindowSample> slice_windows(const io::FeatureTrack& audio,
                                        const io::FeatureTrack& expression,
                                        const io::FeatureTrack& pose,
                                        const io::FeatureTrack& blink,
                                        int window,
                                        int stride,
                                        const std::string& clip_id)
{
    if (window <= 0 || stride <= 0)
        throw Error(ErrorKind::invalid_argument, "window and stride must be positive");
    const int frames = audio.frames();
    if (expression.frames() != frames || pose.frames() != frames || blink.frames() != frames)
        throw Error(ErrorKind::shape_mismatch, "audio and attribute tracks differ in frame count");
    if (audio.dim() != io::kAudioDim || expression.dim() != io::kExpressionDim || pose.dim() != io::kPoseDim
        || blink.dim() != io::kBlinkDim)
        throw Error(ErrorKind::dim_mismatch, "unexpected track dimensions for windowing");
    if (frames < window)
        throw Error(ErrorKind::shape_mismatch, "clip has " + std::to_string(frames)
                                                   + " frames, fewer than the window of " + std::to_string(window));

    const int count = window_count(frames, window, stride);
    std::vector<WindowSample> samples;
    samples.reserve(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) {
        const int start = k * stride;
        WindowSample s;
        s.clip_id = clip_id;
        s.start_frame = start;
        s.audio = audio.data.middleRows(start, window);
        s.targets.resize(window, io::kAttributeDim);
        s.targets << expression.data.middleRows(start, window), pose.data.middleRows(start, window),
            blink.data.middleRows(start, window);
        s.initial_state = s.targets.row(0).transpose();
        samples.push_back(std::move(s));
    }
    return samples;
}

LocalAudioContext local_context(const MatrixXf& audio, int t)
{
    const int frames = static_cast<int>(audio.rows());
    if (t < 0 || t >= frames)
        throw Error(ErrorKind::invalid_argument, "context frame out of range");
    LocalAudioContext ctx;
    ctx.window.resize(kContextFrames, audio.cols());
    for (int k = 0; k < kContextFrames; ++k)
        ctx.window.row(k) = audio.row(std::clamp(t - kContextBefore + k, 0, frames - 1));
    return ctx;
}

LocalAudioContext local_context(const io::FeatureTrack& audio, int t)
{
    return local_context(audio.data, t);
}

} // namespace facial::audio
