#include "facial/io/synthetic.hpp"

#include "facial/common/error.hpp"
#include "facial/io/container.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace facial::io {

namespace fs = std::filesystem;

namespace {

constexpr int kMapInputs = kAudioDim * kSyntheticContext;

// Output scale per attribute row so that synthetic targets land in plausible
// ranges: expression coefficients O(1), Euler angles O(0.1) rad, translation
// O(0.05) units and raw AU45 intensity O(1).
double row_scale(int row)
{
    if (row < kExpressionDim)
        return 0.5;
    if (row < kExpressionDim + 3)
        return 0.1;
    if (row < kExpressionDim + kPoseDim)
        return 0.05;
    return 1.5;
}

std::mt19937_64 clip_rng(std::uint64_t seed, int clip)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(clip), 0x5eedu};
    return std::mt19937_64(seq);
}

MatrixXf random_audio(std::mt19937_64& rng, int frames)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXf audio(frames, kAudioDim);
    std::vector<double> state(kAudioDim, 0.0);
    for (int t = 0; t < frames; ++t) {
        for (int d = 0; d < kAudioDim; ++d) {
            state[d] = 0.8 * state[d] + 0.6 * normal(rng);
            audio(t, d) = static_cast<float>(state[d]);
        }
    }
    return audio;
}

} // namespace

SyntheticMap make_synthetic_map(std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    SyntheticMap map;
    map.weights.resize(kAttributeDim, kMapInputs);
    const double norm = 1.0 / std::sqrt(static_cast<double>(kMapInputs));
    for (int r = 0; r < kAttributeDim; ++r)
        for (int c = 0; c < kMapInputs; ++c)
            map.weights(r, c) = static_cast<float>(normal(rng) * row_scale(r) * norm);
    return map;
}

MatrixXf apply_synthetic_map(const SyntheticMap& map, const MatrixXf& audio, int smoothing_radius)
{
    if (audio.cols() != kAudioDim)
        throw Error(ErrorKind::dim_mismatch, "synthetic map expects 29-dim audio");
    if (smoothing_radius < 0)
        throw Error(ErrorKind::invalid_argument, "smoothing radius must be non-negative");
    const int frames = static_cast<int>(audio.rows());
    const Eigen::MatrixXd w = map.weights.cast<double>();

    Eigen::MatrixXd raw(frames, kAttributeDim);
    Eigen::VectorXd context(kMapInputs);
    for (int t = 0; t < frames; ++t) {
        for (int k = 0; k < kSyntheticContext; ++k) {
            const int src = std::clamp(t - kSyntheticContextRadius + k, 0, frames - 1);
            context.segment(k * kAudioDim, kAudioDim) = audio.row(src).transpose().cast<double>();
        }
        raw.row(t) = (w * context).transpose();
    }

    MatrixXf out(frames, kAttributeDim);
    for (int t = 0; t < frames; ++t) {
        Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(kAttributeDim);
        for (int k = -smoothing_radius; k <= smoothing_radius; ++k)
            acc += raw.row(std::clamp(t + k, 0, frames - 1));
        out.row(t) = (acc / (2.0 * smoothing_radius + 1.0)).cast<float>();
    }
    return out;
}

void write_synthetic_map(const SyntheticMap& map, const fs::path& path)
{
    RawArray array;
    array.header.kind = "synthetic_map";
    array.header.shape = {map.weights.rows(), map.weights.cols()};
    array.data.assign(map.weights.data(), map.weights.data() + map.weights.size());
    write_array(path, array);
}

SyntheticMap read_synthetic_map(const fs::path& path)
{
    const RawArray array = read_array(path);
    if (array.header.shape != std::vector<std::int64_t>{kAttributeDim, kMapInputs})
        throw Error(ErrorKind::dim_mismatch, path.string() + ": synthetic map must be 71 x 493");
    SyntheticMap map;
    map.weights = Eigen::Map<const MatrixXf>(array.data.data(), kAttributeDim, kMapInputs);
    return map;
}

DatasetManifest generate_synthetic_dataset(const SyntheticSpec& spec, const fs::path& out_dir)
{
    if (spec.clip_count <= 0 || spec.frames_per_clip <= 0 || spec.smoothing_radius < 0)
        throw Error(ErrorKind::invalid_argument, "invalid synthetic dataset spec");
    fs::create_directories(out_dir);

    const SyntheticMap map = make_synthetic_map(spec.seed);
    write_synthetic_map(map, out_dir / "synthetic_map.facl");
    {
        std::ofstream meta(out_dir / "synthetic.json");
        meta << nlohmann::json{{"seed", spec.seed},
                               {"clip_count", spec.clip_count},
                               {"frames_per_clip", spec.frames_per_clip},
                               {"smoothing_radius", spec.smoothing_radius},
                               {"context_frames", kSyntheticContext}}
                    .dump(2)
             << '\n';
    }

    DatasetManifest manifest;
    manifest.split = Split::train;
    for (int c = 0; c < spec.clip_count; ++c) {
        auto rng = clip_rng(spec.seed, c);
        std::normal_distribution<double> normal(0.0, 1.0);
        char id[32];
        std::snprintf(id, sizeof id, "clip_%03d", c);
        const fs::path dir = out_dir / id;
        fs::create_directories(dir);

        const MatrixXf audio = random_audio(rng, spec.frames_per_clip);
        const MatrixXf attrs = apply_synthetic_map(map, audio, spec.smoothing_radius);

        auto coefficients = [&](int dim, double scale) {
            MatrixXf row(1, dim);
            for (int i = 0; i < dim; ++i)
                row(0, i) = static_cast<float>(normal(rng) * scale);
            return row;
        };
        MatrixXf gamma = coefficients(kIlluminationDim, 0.1);
        for (int ch = 0; ch < 3; ++ch) {
            gamma(0, 9 * ch) += 3.0f; // ambient term, ~0.85 after the band-0 constant
            gamma(0, 9 * ch + 2) += 0.4f; // light from the viewer side (+z)
        }

        ClipEntry entry;
        entry.clip_id = id;
        entry.frame_count = spec.frames_per_clip;
        entry.audio_track_path = dir / "audio.facl";
        write_track(make_track(TrackKind::audio, 30.0, audio), entry.audio_track_path);

        const std::pair<TrackKind, MatrixXf> tracks[] = {
            {TrackKind::expression, attrs.leftCols(kExpressionDim)},
            {TrackKind::pose, attrs.middleCols(kExpressionDim, kPoseDim)},
            {TrackKind::blink_au, attrs.rightCols(kBlinkDim)},
            {TrackKind::identity, coefficients(kIdentityDim, 0.5)},
            {TrackKind::texture, coefficients(kTextureDim, 0.3)},
            {TrackKind::illumination, gamma},
        };
        for (const auto& [kind, data] : tracks) {
            const std::string name(to_string(kind));
            const fs::path path = dir / (name + ".facl");
            write_track(make_track(kind, 30.0, data), path);
            entry.attribute_track_paths[name] = path;
        }
        manifest.clips.push_back(std::move(entry));
    }
    write_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

} // namespace facial::io
