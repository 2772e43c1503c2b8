#pragma once

#include "facial/io/manifest.hpp"
#include "facial/metrics/personalization.hpp"
#include "facial/pipeline/config.hpp"
#include "facial/pipeline/frames.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace facial::pipeline {

enum class Stage { general, finetune, render };

Stage stage_from_string(const std::string& s);

/// Synthetic audio/attribute dataset. With a basis directory, every clip also
/// gets a target video (clip_NNN/frames) rendered at render.resolution.
io::DatasetManifest cmd_generate_data(const PipelineConfig& config, const std::filesystem::path& out_dir,
                                      int clips, int frames_per_clip,
                                      const std::optional<std::filesystem::path>& basis_dir);

void cmd_generate_basis(const PipelineConfig& config, const std::filesystem::path& out_dir, int grid);

/// Resamples every per-frame track to audio.target_fps (OpenFace CSVs listed
/// under the "openface" key replace pose and blink_au), checks alignment and
/// writes the tracks plus a new manifest under out_dir.
io::DatasetManifest cmd_prepare(const PipelineConfig& config, const std::filesystem::path& manifest_in,
                                const std::filesystem::path& out_dir);

/// Trains one stage into out_dir. finetune needs paths.general; an empty
/// clip_id selects the manifest's first clip.
void cmd_train(const PipelineConfig& config, Stage stage, const std::filesystem::path& out_dir,
               const std::string& clip_id = {});

struct SynthesizeOptions {
    std::filesystem::path audio;                     // audio feature track (FACL1)
    std::filesystem::path out;
    std::string clip_id;                             // reference clip; empty = first
    std::optional<std::filesystem::path> attributes; // directory with expression/pose/blink_au tracks
    bool ground_truth = false;                       // use the reference clip's own attributes
    bool export_attention = false;
    bool translate = true;                           // false writes the raw renders
};

/// Returns the number of frames written.
int cmd_synthesize(const PipelineConfig& config, const SynthesizeOptions& options);

/// Compares two synthesize outputs. external, when given, is a JSON file
/// with any of cpbd / av_offset / av_confidence.
nlohmann::json cmd_evaluate(const PipelineConfig& config, const std::filesystem::path& pred_dir,
                            const std::filesystem::path& ref_dir, const std::filesystem::path& report_path,
                            const std::optional<std::filesystem::path>& external = std::nullopt);

/// One manifest per identity.
metrics::PersonalizationResult cmd_personalize(const PipelineConfig& config,
                                               const std::vector<std::filesystem::path>& manifests,
                                               metrics::PersonalAttribute attribute);

void write_landmarks(const std::filesystem::path& dir, const LandmarkSet& set, double fps);
LandmarkSet read_landmarks(const std::filesystem::path& dir);

} // namespace facial::pipeline
