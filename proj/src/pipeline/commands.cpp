#include "facial/pipeline/commands.hpp"

#include "facial/audio/pipeline.hpp"
#include "facial/common/error.hpp"
#include "facial/gan/facial_gan.hpp"
#include "facial/io/container.hpp"
#include "facial/io/openface_csv.hpp"
#include "facial/io/synthetic.hpp"
#include "facial/nn/checkpoint.hpp"
#include "facial/render/image_io.hpp"
#include "facial/render/render_net.hpp"

#include <fstream>

namespace facial::pipeline {

namespace fs = std::filesystem;

Stage stage_from_string(const std::string& s)
{
    if (s == "general")
        return Stage::general;
    if (s == "finetune")
        return Stage::finetune;
    if (s == "render")
        return Stage::render;
    throw Error(ErrorKind::invalid_argument, "unknown training stage '" + s + "'");
}

namespace {

fs::path require_path(const std::string& value, const char* key)
{
    if (value.empty())
        throw Error(ErrorKind::config, std::string("paths.") + key + " is not set");
    return value;
}

const io::ClipEntry& pick_clip(const io::DatasetManifest& manifest, const std::string& clip_id)
{
    if (manifest.clips.empty())
        throw Error(ErrorKind::invalid_argument, "manifest lists no clips");
    return clip_id.empty() ? manifest.clips.front() : io::find_clip(manifest, clip_id);
}

bool is_checkpoint(const std::string& dir)
{
    return !dir.empty() && fs::exists(fs::path(dir) / "manifest.json");
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path);
    if (!out)
        throw Error(ErrorKind::io, "cannot open for writing: " + path.string());
    out << text;
}

std::vector<render::RenderFrame> render_clip(const FrameRenderer& renderer, const MatrixXf& attributes,
                                             LandmarkSet* landmarks,
                                             std::vector<face::VisibilityBuffer>* visibility = nullptr)
{
    const int frames = static_cast<int>(attributes.rows());
    std::vector<render::RenderFrame> out;
    out.reserve(static_cast<std::size_t>(frames));
    if (landmarks) {
        const int m = static_cast<int>(renderer.basis.mouth_landmarks.size());
        const int l = static_cast<int>(renderer.basis.left_eye_landmarks.size());
        const int r = static_cast<int>(renderer.basis.right_eye_landmarks.size());
        landmarks->mouth = {frames, m, {}};
        landmarks->left_eye = {frames, l, {}};
        landmarks->right_eye = {frames, r, {}};
    }
    for (int t = 0; t < frames; ++t) {
        auto o = renderer.render(attributes.row(t).data());
        if (landmarks) {
            landmarks->mouth.xy.insert(landmarks->mouth.xy.end(), o.mouth.begin(), o.mouth.end());
            landmarks->left_eye.xy.insert(landmarks->left_eye.xy.end(), o.left_eye.begin(), o.left_eye.end());
            landmarks->right_eye.xy.insert(landmarks->right_eye.xy.end(), o.right_eye.begin(), o.right_eye.end());
        }
        if (visibility)
            visibility->push_back(std::move(o.visibility));
        out.push_back(std::move(o.frame));
    }
    return out;
}

io::FeatureTrack at_fps(const io::FeatureTrack& track, double fps)
{
    return track.fps == fps ? track : audio::resample_features(track, fps);
}

nlohmann::json input_record(const fs::path& path)
{
    return {{"path", path.generic_string()}, {"digest", nn::content_digest(path)}};
}

} // namespace

io::DatasetManifest cmd_generate_data(const PipelineConfig& config, const fs::path& out_dir, int clips,
                                      int frames_per_clip, const std::optional<fs::path>& basis_dir)
{
    io::SyntheticSpec spec;
    spec.seed = module_seed(config.seed, 2);
    spec.clip_count = clips;
    spec.frames_per_clip = frames_per_clip;
    auto manifest = io::generate_synthetic_dataset(spec, out_dir);
    if (!basis_dir)
        return manifest;

    const auto basis = face::load_basis(*basis_dir);
    for (auto& entry : manifest.clips) {
        const auto clip = io::load_clip(entry);
        const FrameRenderer renderer(basis, clip_appearance(clip, basis), config.eye.threshold, config.eye.au_max,
                                     config.render.resolution);
        std::vector<face::VisibilityBuffer> vis;
        const auto frames = render_clip(renderer, clip.attributes(), nullptr, &vis);
        render::FrameSequence video;
        video.fps = clip.audio.fps;
        for (std::size_t t = 0; t < frames.size(); ++t)
            video.rgb.push_back(photo_transform(frames[t], vis[t]));
        const fs::path dir = out_dir / entry.clip_id / "frames";
        render::write_frame_sequence(dir, video);
        entry.attribute_track_paths["frames"] = fs::absolute(dir);
    }
    io::write_manifest(manifest, out_dir / "manifest.json");
    return manifest;
}

void cmd_generate_basis(const PipelineConfig& config, const fs::path& out_dir, int grid)
{
    face::SyntheticFaceOptions options;
    options.seed = module_seed(config.seed, 3);
    options.grid = grid;
    face::save_basis(face::make_synthetic_basis(options), out_dir);
}

io::DatasetManifest cmd_prepare(const PipelineConfig& config, const fs::path& manifest_in, const fs::path& out_dir)
{
    const auto input = io::read_manifest(manifest_in);
    const double fps = config.audio.target_fps;
    io::DatasetManifest out;
    out.split = input.split;
    for (const auto& source : input.clips) {
        const fs::path dir = fs::absolute(out_dir / source.clip_id);
        fs::create_directories(dir);
        io::ClipEntry entry = source;

        if (auto it = source.attribute_track_paths.find("openface"); it != source.attribute_track_paths.end()) {
            const auto tracks = io::ingest_openface_csv(it->second, fps);
            io::write_track(tracks.pose, dir / "openface_pose.facl");
            io::write_track(tracks.blink, dir / "openface_blink_au.facl");
            entry.attribute_track_paths["pose"] = dir / "openface_pose.facl";
            entry.attribute_track_paths["blink_au"] = dir / "openface_blink_au.facl";
        }

        const auto clip = io::load_clip(entry);
        io::ClipTracks prepared = clip;
        prepared.audio = at_fps(clip.audio, fps);
        prepared.expression = at_fps(clip.expression, fps);
        prepared.pose = at_fps(clip.pose, fps);
        prepared.blink = at_fps(clip.blink, fps);
        io::check_frame_counts(prepared, 0);

        entry.frame_count = prepared.audio.frames();
        auto put = [&](const io::FeatureTrack& track, const std::string& name) {
            const fs::path path = dir / (name + ".facl");
            io::write_track(track, path);
            return path;
        };
        entry.audio_track_path = put(prepared.audio, "audio");
        entry.attribute_track_paths["expression"] = put(prepared.expression, "expression");
        entry.attribute_track_paths["pose"] = put(prepared.pose, "pose");
        entry.attribute_track_paths["blink_au"] = put(prepared.blink, "blink_au");
        // Per-clip constants are copied unchanged.
        if (prepared.identity)
            entry.attribute_track_paths["identity"] = put(*prepared.identity, "identity");
        if (prepared.texture)
            entry.attribute_track_paths["texture"] = put(*prepared.texture, "texture");
        if (prepared.illumination)
            entry.attribute_track_paths["illumination"] = put(*prepared.illumination, "illumination");
        entry.attribute_track_paths.erase("openface");
        out.clips.push_back(std::move(entry));
    }
    io::write_manifest(out, out_dir / "manifest.json");
    return out;
}

void cmd_train(const PipelineConfig& config, Stage stage, const fs::path& out_dir, const std::string& clip_id)
{
    const auto manifest = io::read_manifest(require_path(config.paths.manifest, "manifest"));
    std::vector<LossReport> history;
    std::string stage_name;
    switch (stage) {
    case Stage::general: {
        stage_name = "general";
        auto model = gan::train_facial_gan(manifest, config.facial_gan_config());
        gan::save_checkpoint(model, out_dir);
        history = model.history;
        break;
    }
    case Stage::finetune: {
        stage_name = "finetune";
        if (!is_checkpoint(config.paths.general))
            throw Error(ErrorKind::stage_order, "fine-tuning needs a general checkpoint (paths.general)");
        const auto general = gan::load_checkpoint(config.paths.general);
        const auto& entry = pick_clip(manifest, clip_id);
        const auto clip = io::load_clip(entry);
        io::check_frame_counts(clip, entry.frame_count);
        const auto cfg = config.facial_gan_config();
        const auto windows = audio::slice_windows(clip.audio, clip.expression, clip.pose, clip.blink,
                                                  general.config.window, cfg.stride, clip.clip_id);
        auto model = gan::finetune_facial_gan(general, windows, cfg);
        gan::save_checkpoint(model, out_dir);
        history = model.history;
        break;
    }
    case Stage::render: {
        stage_name = "render";
        const auto cfg = config.render_config();
        const auto& entry = pick_clip(manifest, clip_id);
        auto frames_it = entry.attribute_track_paths.find("frames");
        if (frames_it == entry.attribute_track_paths.end())
            throw Error(ErrorKind::invalid_argument, "clip " + entry.clip_id + " has no target video ('frames')");
        const auto clip = io::load_clip(entry);
        const auto basis = face::load_basis(require_path(config.paths.basis, "basis"));
        const FrameRenderer renderer(basis, clip_appearance(clip, basis), config.eye.threshold, config.eye.au_max,
                                     cfg.resolution);
        const auto rendered = render_clip(renderer, clip.attributes(), nullptr);
        const auto video = render::read_frame_sequence(frames_it->second);
        if (video.rgb.size() != rendered.size())
            throw Error(ErrorKind::shape_mismatch, "target video and attribute tracks differ in frame count");
        std::vector<render::TrainingPair> pairs;
        for (int t = 0; t < static_cast<int>(rendered.size()); ++t) {
            if (video.rgb[t].width != cfg.resolution || video.rgb[t].height != cfg.resolution)
                throw Error(ErrorKind::shape_mismatch, "target video resolution differs from render.resolution");
            pairs.push_back({render::stack_window(rendered, t, cfg.n_w), video.rgb[t]});
        }
        render::RenderNet net(cfg);
        auto extractor = render::make_feature_extractor(cfg);
        render::train_render_net(net, pairs, *extractor);
        render::save_render_checkpoint(net, out_dir);
        history = net.history;
        break;
    }
    }
    write_text(out_dir / "loss_history.csv", history_csv(history));
    nn::write_json({{"stage", stage_name}, {"pipeline_seed", config.seed}, {"config", to_json(config)}},
                   out_dir / "train.json");
}

void write_landmarks(const fs::path& dir, const LandmarkSet& set, double fps)
{
    const int frames = set.mouth.frames;
    const int m = set.mouth.points, l = set.left_eye.points, r = set.right_eye.points;
    io::RawArray array;
    array.header.kind = "landmarks";
    array.header.fps = fps;
    array.header.shape = {frames, m + l + r, 2};
    array.data.reserve(static_cast<std::size_t>(frames) * (m + l + r) * 2);
    for (int f = 0; f < frames; ++f)
        for (const auto* track : {&set.mouth, &set.left_eye, &set.right_eye})
            for (int p = 0; p < track->points; ++p) {
                array.data.push_back(static_cast<float>(track->at(f, p).x()));
                array.data.push_back(static_cast<float>(track->at(f, p).y()));
            }
    io::write_array(dir / "landmarks.facl", array);
    nn::write_json({{"mouth", m}, {"left_eye", l}, {"right_eye", r}}, dir / "landmarks.json");
}

LandmarkSet read_landmarks(const fs::path& dir)
{
    const auto layout = nn::read_json(dir / "landmarks.json");
    const auto array = io::read_array(dir / "landmarks.facl");
    const int m = layout.at("mouth").get<int>(), l = layout.at("left_eye").get<int>(),
              r = layout.at("right_eye").get<int>();
    if (array.header.shape.size() != 3 || array.header.shape[1] != m + l + r || array.header.shape[2] != 2)
        throw Error(ErrorKind::bad_header, "landmark array does not match its layout");
    const int frames = static_cast<int>(array.header.shape[0]);
    LandmarkSet set{{frames, m, {}}, {frames, l, {}}, {frames, r, {}}};
    std::size_t i = 0;
    for (int f = 0; f < frames; ++f)
        for (auto* track : {&set.mouth, &set.left_eye, &set.right_eye})
            for (int p = 0; p < track->points; ++p, i += 2)
                track->xy.emplace_back(array.data[i], array.data[i + 1]);
    return set;
}

int cmd_synthesize(const PipelineConfig& config, const SynthesizeOptions& opt)
{
    const fs::path manifest_path = require_path(config.paths.manifest, "manifest");
    const fs::path basis_path = require_path(config.paths.basis, "basis");
    const auto manifest = io::read_manifest(manifest_path);
    const auto& entry = pick_clip(manifest, opt.clip_id);
    const auto clip = io::load_clip(entry);
    const auto basis = face::load_basis(basis_path);
    const double fps = config.audio.target_fps;

    nlohmann::json inputs = {{"manifest", input_record(manifest_path)}, {"basis", input_record(basis_path)}};
    nlohmann::json clip_inputs = nlohmann::json::object();
    clip_inputs["audio"] = nn::content_digest(entry.audio_track_path);
    for (const auto& [name, path] : entry.attribute_track_paths)
        if (name != "frames")
            clip_inputs[name] = nn::content_digest(path);
    inputs["clip_tracks"] = clip_inputs;

    MatrixXf attributes;
    std::string source;
    if (opt.attributes) {
        source = "attributes";
        const auto exp = io::read_track(*opt.attributes / "expression.facl");
        const auto pose = io::read_track(*opt.attributes / "pose.facl");
        const auto blink = io::read_track(*opt.attributes / "blink_au.facl");
        if (exp.frames() != pose.frames() || exp.frames() != blink.frames())
            throw Error(ErrorKind::shape_mismatch, "attribute tracks differ in frame count");
        attributes.resize(exp.frames(), io::kAttributeDim);
        attributes << exp.data, pose.data, blink.data;
        inputs["attributes"] = input_record(*opt.attributes);
    } else if (opt.ground_truth) {
        source = "ground_truth";
        attributes = clip.attributes();
    } else {
        source = "inference";
        const std::string& ckpt = is_checkpoint(config.paths.finetuned) ? config.paths.finetuned : config.paths.general;
        if (!is_checkpoint(ckpt))
            throw Error(ErrorKind::stage_order, "synthesis needs a trained facial_gan checkpoint");
        if (opt.audio.empty())
            throw Error(ErrorKind::invalid_argument, "no audio track given");
        auto model = gan::load_checkpoint(ckpt);
        const auto audio = at_fps(io::read_track(opt.audio), fps);
        if (audio.kind != io::TrackKind::audio)
            throw Error(ErrorKind::invalid_argument, opt.audio.string() + " is not an audio feature track");
        const auto result = gan::infer_sequence(model, audio.data, gan::mean_attribute_frame(clip.attributes()));
        attributes = result.attributes;
        inputs["audio"] = input_record(opt.audio);
        inputs["facial_gan"] = input_record(ckpt);
    }

    const auto rcfg = config.render_config();
    const FrameRenderer renderer(basis, clip_appearance(clip, basis), config.eye.threshold, config.eye.au_max,
                                 rcfg.resolution);
    LandmarkSet landmarks;
    const auto rendered = render_clip(renderer, attributes, &landmarks);

    render::FrameSequence video;
    video.fps = fps;
    if (opt.translate) {
        if (!is_checkpoint(config.paths.render))
            throw Error(ErrorKind::stage_order, "translation needs a render checkpoint (paths.render)");
        auto net = render::load_render_checkpoint(config.paths.render);
        video.rgb = render::translate(net, rendered);
        inputs["render"] = input_record(config.paths.render);
    } else {
        for (const auto& f : rendered)
            video.rgb.push_back(f.rgb);
    }
    if (opt.export_attention)
        for (const auto& f : rendered)
            video.attention.push_back(f.attention);

    fs::create_directories(opt.out);
    const int frames = static_cast<int>(attributes.rows());
    io::write_track(io::make_track(io::TrackKind::expression, fps, attributes.leftCols(io::kExpressionDim)),
                    opt.out / "expression.facl");
    io::write_track(io::make_track(io::TrackKind::pose, fps, attributes.middleCols(io::kExpressionDim, io::kPoseDim)),
                    opt.out / "pose.facl");
    io::write_track(io::make_track(io::TrackKind::blink_au, fps, attributes.rightCols(io::kBlinkDim)),
                    opt.out / "blink_au.facl");
    render::write_frame_sequence(opt.out / "frames", video);
    if (opt.export_attention) {
        io::RawArray maps;
        maps.header.kind = "attention";
        maps.header.fps = fps;
        maps.header.shape = {frames, rcfg.resolution, rcfg.resolution};
        for (const auto& f : rendered)
            maps.data.insert(maps.data.end(), f.attention.pixels.begin(), f.attention.pixels.end());
        io::write_array(opt.out / "attention.facl", maps);
    }
    write_landmarks(opt.out, landmarks, fps);
    nn::write_json({{"command", "synthesize"},
                    {"config", to_json(config)},
                    {"seed", config.seed},
                    {"clip", entry.clip_id},
                    {"source", source},
                    {"translate", opt.translate},
                    {"export_attention", opt.export_attention},
                    {"frames", frames},
                    {"inputs", inputs}},
                   opt.out / "provenance.json");
    return frames;
}

namespace {

nlohmann::json blink_report(const fs::path& dir, const PipelineConfig& config)
{
    const auto track = io::read_track(dir / "blink_au.facl");
    std::vector<float> normalized(static_cast<std::size_t>(track.frames()));
    for (int t = 0; t < track.frames(); ++t)
        normalized[t] = static_cast<float>(eye::normalize_au(track.data(t, 0), config.eye.au_max));
    const auto events = metrics::detect_blinks(normalized, track.fps, config.metrics.blink_hi, config.metrics.blink_lo);
    const double duration = track.frames() / track.fps;
    const auto stats = metrics::blink_stats(events, duration, config.metrics.bin_width_s);
    return {{"events", events.size()},
            {"duration_s", duration},
            {"rate_per_s", stats.rate},
            {"mean_duration_s", stats.mean_duration_s ? nlohmann::json(*stats.mean_duration_s) : nlohmann::json()},
            {"bin_width_s", stats.bin_width_s},
            {"duration_histogram", stats.duration_histogram},
            {"human_rate_band", {metrics::kHumanBlinkRateLow, metrics::kHumanBlinkRateHigh}},
            {"hi", config.metrics.blink_hi},
            {"lo", config.metrics.blink_lo}};
}

std::vector<Eigen::Vector2d> centers(const metrics::LandmarkTrack& track)
{
    std::vector<Eigen::Vector2d> out;
    for (int f = 0; f < track.frames; ++f) {
        Eigen::Vector2d c = Eigen::Vector2d::Zero();
        for (int p = 0; p < track.points; ++p)
            c += track.at(f, p);
        out.push_back(c / track.points);
    }
    return out;
}

metrics::LandmarkTrack normalized_mouth(const LandmarkSet& set)
{
    return metrics::normalize_mouth_landmarks(set.mouth, centers(set.left_eye), centers(set.right_eye));
}

} // namespace

nlohmann::json cmd_evaluate(const PipelineConfig& config, const fs::path& pred_dir, const fs::path& ref_dir,
                            const fs::path& report_path, const std::optional<fs::path>& external)
{
    const auto pred = read_landmarks(pred_dir);
    const auto ref = read_landmarks(ref_dir);
    nlohmann::json report;
    report["frames"] = pred.mouth.frames;
    report["lmd"] = metrics::lmd(normalized_mouth(pred), normalized_mouth(ref));
    report["lmd_normalization"] = "mouth landmarks translated to their per-frame centroid and divided by the "
                                  "per-frame inter-ocular distance";
    report["blink"] = blink_report(pred_dir, config);
    report["reference_blink"] = blink_report(ref_dir, config);
    report["cpbd"] = nullptr;
    report["av_offset"] = nullptr;
    report["av_confidence"] = nullptr;
    report["personalization"] = nullptr;
    if (external) {
        const auto doc = nn::read_json(*external);
        for (const char* key : {"cpbd", "av_offset", "av_confidence"})
            if (doc.contains(key))
                report[key] = doc.at(key);
    }

    if (report_path.has_parent_path())
        fs::create_directories(report_path.parent_path());
    nn::write_json(report, report_path);
    std::string csv = "bin_start_s,bin_end_s,count\n";
    const double w = config.metrics.bin_width_s;
    const auto& hist = report["blink"]["duration_histogram"];
    for (std::size_t k = 0; k < hist.size(); ++k)
        csv += std::to_string(k * w) + ',' + std::to_string((k + 1) * w) + ',' + std::to_string(hist[k].get<int>())
               + '\n';
    fs::path csv_path = report_path;
    csv_path.replace_extension(".blink_histogram.csv");
    write_text(csv_path, csv);
    return report;
}

metrics::PersonalizationResult cmd_personalize(const PipelineConfig& config, const std::vector<fs::path>& manifests,
                                               metrics::PersonalAttribute attribute)
{
    std::vector<std::vector<MatrixXf>> tracks;
    for (const auto& path : manifests) {
        const auto manifest = io::read_manifest(path);
        std::vector<MatrixXf> clips;
        for (const auto& entry : manifest.clips) {
            const auto clip = io::load_clip(entry);
            clips.push_back(attribute == metrics::PersonalAttribute::pose ? clip.pose.data : clip.blink.data);
        }
        tracks.push_back(std::move(clips));
    }
    metrics::PersonalizationOptions options;
    options.window = config.metrics.window;
    options.stride = std::max(1, config.metrics.window / 2);
    options.seed = module_seed(config.seed, 4);
    return metrics::personalization_score(tracks, attribute, config.metrics.k_fold, options);
}

} // namespace facial::pipeline
