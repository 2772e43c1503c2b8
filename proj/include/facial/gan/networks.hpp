#pragma once

#include "facial/gan/config.hpp"

#include <torch/torch.h>

namespace facial::gan {

/// Whole-window encoder: audio [B, T, 29] concatenated with the initial state
/// s [B, 71] at every timestep, through dilated convolutions, to z [B, T, d_z].
/// Row t of z is the per-frame block z_t.
class TemporalGeneratorImpl : public torch::nn::Module {
public:
    explicit TemporalGeneratorImpl(const FacialGanConfig& config);
    torch::Tensor forward(const torch::Tensor& audio, const torch::Tensor& initial_state);

private:
    torch::nn::ModuleList convs_{nullptr};
    torch::nn::Conv1d head_{nullptr};
};
TORCH_MODULE(TemporalGenerator);

/// Per-frame encoder over a 16 × 29 context: contexts [N, 16, 29] -> [N, d_c].
class LocalGeneratorImpl : public torch::nn::Module {
public:
    explicit LocalGeneratorImpl(const FacialGanConfig& config);
    torch::Tensor forward(const torch::Tensor& contexts);

private:
    torch::nn::Conv1d conv1_{nullptr};
    torch::nn::Conv1d conv2_{nullptr};
    torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(LocalGenerator);

/// [B, T, 29] -> [B, T, 16, 29]: frame t gets audio[t-8 .. t+7], clamped to the window.
torch::Tensor local_contexts(const torch::Tensor& audio);

/// G^f: temporal and local latents fused per frame by one affine layer into
/// [B, T, 71] = expression (64) ⊕ pose (6) ⊕ blink (1).
class FacialGeneratorImpl : public torch::nn::Module {
public:
    explicit FacialGeneratorImpl(const FacialGanConfig& config);

    torch::Tensor forward(const torch::Tensor& audio, const torch::Tensor& initial_state);

    torch::Tensor temporal(const torch::Tensor& audio, const torch::Tensor& initial_state);
    torch::Tensor local(const torch::Tensor& audio);
    /// FC(z_t ⊕ c_t) for latents of shape [..., d_z] and [..., d_c].
    torch::Tensor fuse(const torch::Tensor& z, const torch::Tensor& c);

    TemporalGenerator tem{nullptr};
    LocalGenerator loc{nullptr};
    torch::nn::Linear fc{nullptr};
};
TORCH_MODULE(FacialGenerator);

/// D^f: temporal convolutional classifier over whole attribute sequences
/// [B, T, 71] -> probability of being real, [B].
class FacialDiscriminatorImpl : public torch::nn::Module {
public:
    explicit FacialDiscriminatorImpl(const FacialGanConfig& config);
    torch::Tensor forward(const torch::Tensor& sequence);
    torch::Tensor logits(const torch::Tensor& sequence);

private:
    torch::nn::Conv1d conv1_{nullptr};
    torch::nn::Conv1d conv2_{nullptr};
    torch::nn::Linear head_{nullptr};
};
TORCH_MODULE(FacialDiscriminator);

/// Splits a [.., 71] attribute tensor into its 64 / 6 / 1 parts.
struct AttributeSplit {
    torch::Tensor expression;
    torch::Tensor pose;
    torch::Tensor blink;
};
AttributeSplit split_attributes(const torch::Tensor& attributes);

} // namespace facial::gan
