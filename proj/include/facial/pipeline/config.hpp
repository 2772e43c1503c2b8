#pragma once

#include "facial/gan/config.hpp"
#include "facial/render/render_net.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace facial::pipeline {

struct AudioSettings {
    double target_fps = 30.0;
};

struct EyeSettings {
    double threshold = 0.004; // ellipse threshold in mesh units
    double au_max = 5.0;      // raw AU45 value mapped to full attention
};

struct MetricsSettings {
    double blink_hi = 0.5;
    double blink_lo = 0.3;
    double bin_width_s = 0.1;
    int k_fold = 2;
    int window = 64;
};

struct Paths {
    std::string manifest;
    std::string basis;
    std::string general;   // general facial_gan checkpoint
    std::string finetuned; // fine-tuned facial_gan checkpoint
    std::string render;    // render net checkpoint
};

/// Whole-pipeline configuration. Module seeds are not set directly; they are
/// derived from the top-level seed by module_seed().
struct PipelineConfig {
    std::uint64_t seed = 0;
    AudioSettings audio;
    gan::FacialGanConfig facial_gan;
    render::RenderNetConfig render;
    EyeSettings eye;
    MetricsSettings metrics;
    Paths paths;

    gan::FacialGanConfig facial_gan_config() const;
    render::RenderNetConfig render_config() const;
};

/// splitmix64 of the top-level seed mixed with a module index.
std::uint64_t module_seed(std::uint64_t seed, int module);

nlohmann::json to_json(const PipelineConfig& config);
/// Missing keys keep their defaults. Unknown keys, or module-level seeds,
/// throw Error{config}.
PipelineConfig pipeline_config_from_json(const nlohmann::json& doc);

/// Applies "a.b=value" overrides. The value is parsed as JSON when possible,
/// otherwise taken as a string.
nlohmann::json apply_overrides(nlohmann::json doc, const std::vector<std::string>& overrides);

PipelineConfig load_pipeline_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

} // namespace facial::pipeline
