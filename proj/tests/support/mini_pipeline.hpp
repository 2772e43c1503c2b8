#pragma once

// A complete but tiny pipeline workspace: basis, synthetic data, prepared
// manifest, general FACIAL-GAN and render checkpoints.

#include "facial/pipeline/commands.hpp"

#include <filesystem>

namespace facial::testing {

inline pipeline::PipelineConfig mini_config(const std::filesystem::path& root, std::uint64_t seed = 3)
{
    pipeline::PipelineConfig c;
    c.seed = seed;
    auto& g = c.facial_gan;
    g.window = 16;
    g.stride = 4;
    g.d_z = g.temporal_hidden = g.d_c = 16;
    g.temporal_layers = 2;
    g.local_hidden = g.disc_hidden = 8;
    g.general_epochs = 1;
    g.general_batch = 8;
    g.finetune_epochs = 1;
    g.finetune_batch = 8;
    auto& r = c.render;
    r.resolution = 32;
    r.epochs = 1;
    r.generator_base = 4;
    r.residual_blocks = 1;
    r.discriminator_base = 4;
    r.scales = 2;
    r.max_steps = 4;
    c.paths.basis = (root / "basis").string();
    c.paths.manifest = (root / "prep" / "manifest.json").string();
    c.paths.general = (root / "ck" / "general").string();
    c.paths.render = (root / "ck" / "render").string();
    return c;
}

/// Runs generate-basis, generate-data, prepare and trains the general and
/// render stages. Returns the config pointing at the results.
inline pipeline::PipelineConfig build_mini_pipeline(const std::filesystem::path& root, std::uint64_t seed = 3)
{
    auto c = mini_config(root, seed);
    pipeline::cmd_generate_basis(c, c.paths.basis, 17);
    pipeline::cmd_generate_data(c, root / "data", 2, 60, std::filesystem::path(c.paths.basis));
    pipeline::cmd_prepare(c, root / "data" / "manifest.json", root / "prep");
    pipeline::cmd_train(c, pipeline::Stage::general, c.paths.general);
    pipeline::cmd_train(c, pipeline::Stage::render, c.paths.render);
    return c;
}

} // namespace facial::testing
