#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>

namespace facial::gan {

/// Balancing weights of the regression, motion and adversarial terms.
struct LossWeights {
    double expression = 2.0;    // ω1
    double pose = 1.0;          // ω2
    double eye = 5.0;           // ω3
    double initial_state = 10.0; // ω4
    double motion = 10.0;       // ω5
    double adversarial = 0.1;   // ω6
};

struct FacialGanConfig {
    int window = 128; // T
    int stride = 5;

    // Temporal generator: dilated 1-D convolutions over the whole window.
    int d_z = 128;
    int temporal_hidden = 128;
    int temporal_layers = 4; // dilations 1, 2, 4, ...
    int temporal_kernel = 3;

    // Local generator: strided convolutions over the 16-frame context.
    int d_c = 128;
    int local_hidden = 64;

    int disc_hidden = 64;

    LossWeights weights;
    double learning_rate = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;

    int general_epochs = 50;
    int general_batch = 64;
    int finetune_epochs = 10;
    int finetune_batch = 16;
    /// Stops after this many optimizer steps when > 0 (smoke tests).
    int max_steps = 0;

    std::uint64_t seed = 0;
};

nlohmann::json to_json(const FacialGanConfig& config);
FacialGanConfig facial_gan_config_from_json(const nlohmann::json& doc);

} // namespace facial::gan
