#pragma once

#include "facial/common/loss_report.hpp"
#include "facial/face/raster.hpp"

#include <torch/torch.h>

#include <nlohmann/json.hpp>

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

namespace facial::render {

/// RGB render (3 channels) and eye attention map (1 channel) of one frame.
struct RenderFrame {
    face::Image rgb;
    face::Image attention;
};

/// Channel-major (CHW) stack of 2·N_w frames; frame k occupies channels
/// [4k, 4k + 4) as r, g, b, attention.
struct StackedInput {
    int width = 0;
    int height = 0;
    int channels = 0;
    std::vector<float> data;
};

/// Frames t-N_w ... t+N_w-1, clamped to the sequence.
StackedInput stack_window(const std::vector<RenderFrame>& frames, int t, int n_w);
std::vector<RenderFrame> unstack_window(const StackedInput& input);

torch::Tensor to_tensor(const StackedInput& input); // [C, H, W]
torch::Tensor to_tensor(const face::Image& image);  // [C, H, W]
face::Image to_image(const torch::Tensor& chw);      // clamps to [0, 1]

struct RenderNetConfig {
    int n_w = 2;
    int resolution = 256; // square render / video frames
    double lambda_fm = 2.0;   // λ1
    double lambda_vgg = 10.0; // λ2
    double lambda_l1 = 50.0;  // λ3
    int epochs = 50;
    int batch = 1;
    int decay_epochs = 30; // linear decay to zero over the final epochs
    double learning_rate = 1e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    bool least_squares = false;
    int generator_base = 32;
    int residual_blocks = 2;
    int discriminator_base = 32;
    int scales = 3;
    int max_steps = 0;
    std::string feature_extractor = "random_conv";
    std::uint64_t seed = 0;

    int input_channels() const { return 8 * n_w; }
};

nlohmann::json to_json(const RenderNetConfig& config);
RenderNetConfig render_config_from_json(const nlohmann::json& doc);

/// Learning-rate multiplier for a 0-based epoch: 1 until the final
/// decay_epochs, then (epochs - epoch) / decay_epochs, so it falls linearly
/// and would reach zero one epoch after the last.
double lr_factor(const RenderNetConfig& config, int epoch);

/// Resolution-preserving encoder-decoder with residual blocks and one skip
/// connection; sigmoid output in [0, 1]. [B, 8N_w, H, W] -> [B, 3, H, W].
class RenderGeneratorImpl : public torch::nn::Module {
public:
    explicit RenderGeneratorImpl(const RenderNetConfig& config);
    torch::Tensor forward(const torch::Tensor& x);

private:
    torch::nn::Conv2d in_{nullptr};
    torch::nn::Conv2d down_{nullptr};
    torch::nn::ModuleList res_{nullptr};
    torch::nn::Conv2d up_{nullptr};
    torch::nn::Conv2d merge_{nullptr};
    torch::nn::Conv2d out_{nullptr};
};
TORCH_MODULE(RenderGenerator);

struct DiscriminatorOutput {
    std::vector<torch::Tensor> features; // intermediate activations
    torch::Tensor logits;                // patch logits
};

/// Four-layer conditional patch classifier over cat(X_t, frame).
class PatchDiscriminatorImpl : public torch::nn::Module {
public:
    PatchDiscriminatorImpl(int in_channels, int base);
    DiscriminatorOutput forward(const torch::Tensor& x);

private:
    torch::nn::ModuleList layers_{nullptr};
};
TORCH_MODULE(PatchDiscriminator);

/// D_i sees X_t and the frame average-pooled by 2^(i-1).
class MultiScaleDiscriminatorImpl : public torch::nn::Module {
public:
    explicit MultiScaleDiscriminatorImpl(const RenderNetConfig& config);
    std::vector<DiscriminatorOutput> forward(const torch::Tensor& stacked, const torch::Tensor& frame);
    /// Inputs actually fed to each scale, for shape checks.
    std::vector<torch::Tensor> scale_inputs(const torch::Tensor& stacked, const torch::Tensor& frame) const;

private:
    torch::nn::ModuleList scales_{nullptr};
};
TORCH_MODULE(MultiScaleDiscriminator);

/// Perceptual feature source. Implementations return a fixed list of
/// activations for an image batch [B, 3, H, W].
class FeatureExtractor {
public:
    virtual ~FeatureExtractor() = default;
    virtual std::vector<torch::Tensor> features(const torch::Tensor& images) = 0;
};

/// Frozen, seeded random convolution stack. Stands in for a pretrained
/// network so tests need no downloaded weights.
class RandomConvExtractor : public FeatureExtractor {
public:
    explicit RandomConvExtractor(std::uint64_t seed);
    std::vector<torch::Tensor> features(const torch::Tensor& images) override;

private:
    std::vector<torch::Tensor> weights_;
    std::vector<torch::Tensor> biases_;
};

/// Builds the extractor named in the config ("random_conv" is the only
/// built-in one).
std::unique_ptr<FeatureExtractor> make_feature_extractor(const RenderNetConfig& config);

/// Mean over layers of the mean absolute difference between activations.
torch::Tensor feature_l1(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b);

torch::Tensor perceptual_loss(FeatureExtractor& extractor, const torch::Tensor& a, const torch::Tensor& b);

/// Generator-side adversarial term on patch logits: −log σ(l) (mean), or
/// (l − 1)² for the least-squares variant.
torch::Tensor generator_adversarial(const torch::Tensor& logits, bool least_squares);

/// Discriminator-side term: real towards 1, fake towards 0.
torch::Tensor discriminator_adversarial(const torch::Tensor& real_logits, const torch::Tensor& fake_logits,
                                        bool least_squares);

struct RenderLosses {
    torch::Tensor adversarial;      // Σ_i L_R-GAN(G, D_i)
    torch::Tensor feature_matching; // Σ_i L_FM(G, D_i)
    torch::Tensor perceptual;       // L_VGG
    torch::Tensor l1;               // mean absolute error
    torch::Tensor total;
    LossReport report() const;
};

/// total = Σ_i [adv_i + λ1·FM_i] + λ2·perceptual + λ3·L1. fake, real:
/// [B, 3, H, W]; stacked: [B, 8N_w, H, W].
RenderLosses loss_render(const torch::Tensor& fake, const torch::Tensor& real, const torch::Tensor& stacked,
                         MultiScaleDiscriminator& discriminator, FeatureExtractor& extractor,
                         const RenderNetConfig& config);

torch::Tensor render_discriminator_loss(const torch::Tensor& fake, const torch::Tensor& real,
                                        const torch::Tensor& stacked, MultiScaleDiscriminator& discriminator,
                                        bool least_squares);

struct TrainingPair {
    StackedInput input;
    face::Image frame;
};

struct RenderNet {
    explicit RenderNet(const RenderNetConfig& config);

    RenderNetConfig config;
    RenderGenerator generator{nullptr};
    MultiScaleDiscriminator discriminator{nullptr};
    std::int64_t step = 0;
    std::vector<LossReport> history;
};

/// Alternating G / D Adam updates, batch order seeded per epoch, learning
/// rate decayed per lr_factor. Throws Error{divergence} on non-finite loss.
std::vector<LossReport> train_render_net(RenderNet& net, const std::vector<TrainingPair>& pairs,
                                         FeatureExtractor& extractor);

/// Mean absolute reconstruction error of the generator over the pairs.
double reconstruction_error(RenderNet& net, const std::vector<TrainingPair>& pairs);

/// Stacks each frame's window, runs G and clamps to [0, 1].
std::vector<face::Image> translate(RenderNet& net, const std::vector<RenderFrame>& frames);

void save_render_checkpoint(const RenderNet& net, const std::filesystem::path& dir);
RenderNet load_render_checkpoint(const std::filesystem::path& dir);

} // namespace facial::render
