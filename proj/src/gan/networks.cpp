#include "facial/gan/networks.hpp"

#include "facial/audio/pipeline.hpp"
#include "facial/io/track.hpp"

namespace facial::gan {

namespace F = torch::nn::functional;

namespace {

constexpr double kSlope = 0.2;

torch::Tensor lrelu(const torch::Tensor& x)
{
    return F::leaky_relu(x, F::LeakyReLUFuncOptions().negative_slope(kSlope));
}

} // namespace

TemporalGeneratorImpl::TemporalGeneratorImpl(const FacialGanConfig& config)
{
    convs_ = register_module("convs", torch::nn::ModuleList());
    int in = io::kAudioDim + io::kAttributeDim;
    int dilation = 1;
    for (int layer = 0; layer < config.temporal_layers; ++layer) {
        const int pad = dilation * (config.temporal_kernel / 2);
        convs_->push_back(torch::nn::Conv1d(torch::nn::Conv1dOptions(in, config.temporal_hidden, config.temporal_kernel)
                                                .padding(pad)
                                                .dilation(dilation)));
        in = config.temporal_hidden;
        dilation *= 2;
    }
    head_ = register_module("head", torch::nn::Conv1d(torch::nn::Conv1dOptions(in, config.d_z, 1)));
}

torch::Tensor TemporalGeneratorImpl::forward(const torch::Tensor& audio, const torch::Tensor& initial_state)
{
    const auto frames = audio.size(1);
    auto cond = initial_state.unsqueeze(1).expand({audio.size(0), frames, initial_state.size(1)});
    auto x = torch::cat({audio, cond}, 2).transpose(1, 2); // [B, C, T]
    for (const auto& module : *convs_)
        x = lrelu(module->as<torch::nn::Conv1d>()->forward(x));
    return head_->forward(x).transpose(1, 2); // [B, T, d_z]
}

LocalGeneratorImpl::LocalGeneratorImpl(const FacialGanConfig& config)
{
    const int h = config.local_hidden;
    conv1_ = register_module("conv1", torch::nn::Conv1d(torch::nn::Conv1dOptions(io::kAudioDim, h, 3).stride(2).padding(1)));
    conv2_ = register_module("conv2", torch::nn::Conv1d(torch::nn::Conv1dOptions(h, h, 3).stride(2).padding(1)));
    // 16 frames -> 8 -> 4 after the two stride-2 convolutions.
    head_ = register_module("head", torch::nn::Linear(h * (audio::kContextFrames / 4), config.d_c));
}

torch::Tensor LocalGeneratorImpl::forward(const torch::Tensor& contexts)
{
    auto x = contexts.transpose(1, 2); // [N, 29, 16]
    x = lrelu(conv1_->forward(x));
    x = lrelu(conv2_->forward(x));
    return head_->forward(x.flatten(1));
}

torch::Tensor local_contexts(const torch::Tensor& audio)
{
    const auto frames = audio.size(1);
    auto t = torch::arange(frames, torch::kLong).unsqueeze(1);
    auto k = torch::arange(audio::kContextFrames, torch::kLong).unsqueeze(0);
    auto idx = (t - audio::kContextBefore + k).clamp(0, frames - 1).flatten();
    return audio.index_select(1, idx).view({audio.size(0), frames, audio::kContextFrames, audio.size(2)});
}

FacialGeneratorImpl::FacialGeneratorImpl(const FacialGanConfig& config)
{
    tem = register_module("tem", TemporalGenerator(config));
    loc = register_module("loc", LocalGenerator(config));
    fc = register_module("fc", torch::nn::Linear(config.d_z + config.d_c, io::kAttributeDim));
}

torch::Tensor FacialGeneratorImpl::temporal(const torch::Tensor& audio, const torch::Tensor& initial_state)
{
    return tem->forward(audio, initial_state);
}

torch::Tensor FacialGeneratorImpl::local(const torch::Tensor& audio)
{
    const auto batch = audio.size(0);
    const auto frames = audio.size(1);
    auto ctx = local_contexts(audio).reshape({batch * frames, audio::kContextFrames, audio.size(2)});
    return loc->forward(ctx).view({batch, frames, -1});
}

torch::Tensor FacialGeneratorImpl::fuse(const torch::Tensor& z, const torch::Tensor& c)
{
    return fc->forward(torch::cat({z, c}, -1));
}

torch::Tensor FacialGeneratorImpl::forward(const torch::Tensor& audio, const torch::Tensor& initial_state)
{
    return fuse(temporal(audio, initial_state), local(audio));
}

FacialDiscriminatorImpl::FacialDiscriminatorImpl(const FacialGanConfig& config)
{
    const int h = config.disc_hidden;
    conv1_ = register_module("conv1", torch::nn::Conv1d(torch::nn::Conv1dOptions(io::kAttributeDim, h, 5).stride(2).padding(2)));
    conv2_ = register_module("conv2", torch::nn::Conv1d(torch::nn::Conv1dOptions(h, h, 5).stride(2).padding(2)));
    head_ = register_module("head", torch::nn::Linear(h, 1));
}

torch::Tensor FacialDiscriminatorImpl::logits(const torch::Tensor& sequence)
{
    auto x = sequence.transpose(1, 2);
    x = lrelu(conv1_->forward(x));
    x = lrelu(conv2_->forward(x));
    return head_->forward(x.mean(2)).squeeze(1);
}

torch::Tensor FacialDiscriminatorImpl::forward(const torch::Tensor& sequence)
{
    return torch::sigmoid(logits(sequence));
}

AttributeSplit split_attributes(const torch::Tensor& attributes)
{
    auto parts = attributes.split_with_sizes({io::kExpressionDim, io::kPoseDim, io::kBlinkDim}, -1);
    return {parts[0], parts[1], parts[2]};
}

} // namespace facial::gan
