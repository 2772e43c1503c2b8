#pragma once

#include "facial/audio/pipeline.hpp"
#include "facial/common/loss_report.hpp"
#include "facial/gan/config.hpp"
#include "facial/gan/losses.hpp"
#include "facial/gan/networks.hpp"
#include "facial/io/manifest.hpp"

#include <torch/torch.h>

#include <filesystem>
#include <functional>
#include <vector>

namespace facial::gan {

/// Generator, discriminator and bookkeeping. Parameters are initialised from
/// config.seed, so two models built from the same config are identical.
struct FacialGan {
    explicit FacialGan(const FacialGanConfig& config);

    FacialGanConfig config;
    FacialGenerator generator{nullptr};
    FacialDiscriminator discriminator{nullptr};
    std::int64_t step = 0;
    std::vector<LossReport> history; // one entry per epoch
};

struct TrainSchedule {
    int epochs = 0;
    int batch = 1;
    int max_steps = 0; // 0: unbounded
    std::uint64_t order_seed = 0;
};

/// Alternating discriminator / generator Adam updates over the samples. The
/// discriminator update is skipped while the adversarial weight is zero.
/// Throws Error{divergence} naming the step when a loss turns non-finite.
/// Appends one averaged LossReport per epoch and returns the per-step reports.
std::vector<LossReport> optimize(FacialGan& model, const std::vector<audio::WindowSample>& samples,
                                 const TrainSchedule& schedule);

/// Slices every clip of the manifest into training windows.
std::vector<audio::WindowSample> manifest_windows(const io::DatasetManifest& manifest, int window, int stride);

/// General stage: whole training set, general_epochs / general_batch.
FacialGan train_facial_gan(const io::DatasetManifest& manifest, const FacialGanConfig& config);
FacialGan train_facial_gan(const std::vector<audio::WindowSample>& samples, const FacialGanConfig& config);

/// Personalisation stage: continues from `general` on one clip's windows with
/// finetune_epochs / finetune_batch, updating all generator parameters.
FacialGan finetune_facial_gan(const FacialGan& general, const std::vector<audio::WindowSample>& clip_samples,
                              const FacialGanConfig& config);

/// Mean L_Reg (and component means) over samples, evaluated without gradients.
LossReport evaluate_regression(FacialGan& model, const std::vector<audio::WindowSample>& samples);

/// Checkpoint directory: manifest.json (kind, config, seed, step, parameter
/// table, history) plus params/*.facl.
void save_checkpoint(const FacialGan& model, const std::filesystem::path& dir);
FacialGan load_checkpoint(const std::filesystem::path& dir);

/// Predicts one window: audio T × 29 and s (71) -> T × 71.
using WindowPredictor = std::function<MatrixXf(const MatrixXf& audio_window, const Eigen::VectorXf& initial_state)>;

struct InferenceResult {
    MatrixXf attributes; // frames × 71
    std::vector<int> window_starts;
    std::vector<Eigen::VectorXf> initial_states;    // s used by each window
    std::vector<MatrixXf> window_predictions;       // raw T × 71 output per window
};

/// Windows start at 0, T-1, 2(T-1), ...: window k's frame 0 is the same
/// instant as window k-1's final frame, and its initial state is that
/// generated frame. Windows reaching past the clip repeat the last audio
/// frame; output rows beyond the clip are dropped.
InferenceResult chain_windows(const MatrixXf& audio, const Eigen::VectorXf& initial_state, int window,
                              const WindowPredictor& predict);

InferenceResult infer_sequence(FacialGan& model, const MatrixXf& audio, const Eigen::VectorXf& initial_state);

/// Column means of a clip's attribute matrix; the default first-window state.
Eigen::VectorXf mean_attribute_frame(const MatrixXf& attributes);

} // namespace facial::gan
