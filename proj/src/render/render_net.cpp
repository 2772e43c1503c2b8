#include "facial/render/render_net.hpp"

#include "facial/common/error.hpp"
#include "facial/nn/checkpoint.hpp"
#include "facial/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace facial::render {

namespace fs = std::filesystem;
namespace F = torch::nn::functional;

StackedInput stack_window(const std::vector<RenderFrame>& frames, int t, int n_w)
{
    if (frames.empty())
        throw Error(ErrorKind::invalid_argument, "cannot stack an empty frame sequence");
    if (n_w < 1)
        throw Error(ErrorKind::invalid_argument, "N_w must be at least 1");
    const int w = frames.front().rgb.width;
    const int h = frames.front().rgb.height;
    const int last = static_cast<int>(frames.size()) - 1;

    StackedInput out;
    out.width = w;
    out.height = h;
    out.channels = 8 * n_w;
    const std::size_t plane = static_cast<std::size_t>(w) * h;
    out.data.assign(plane * out.channels, 0.0f);
    for (int k = 0; k < 2 * n_w; ++k) {
        const auto& f = frames[static_cast<std::size_t>(std::clamp(t - n_w + k, 0, last))];
        if (f.rgb.width != w || f.rgb.height != h || f.rgb.channels != 3 || f.attention.width != w
            || f.attention.height != h || f.attention.channels != 1)
            throw Error(ErrorKind::shape_mismatch, "render frames differ in size or channel count");
        float* base = out.data.data() + plane * 4 * k;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                for (int c = 0; c < 3; ++c)
                    base[plane * c + i] = f.rgb.at(x, y, c);
                base[plane * 3 + i] = f.attention.at(x, y, 0);
            }
    }
    return out;
}

std::vector<RenderFrame> unstack_window(const StackedInput& input)
{
    if (input.channels % 4 != 0)
        throw Error(ErrorKind::shape_mismatch, "stacked channel count is not a multiple of 4");
    const std::size_t plane = static_cast<std::size_t>(input.width) * input.height;
    std::vector<RenderFrame> frames;
    for (int k = 0; k < input.channels / 4; ++k) {
        RenderFrame f{face::Image(input.width, input.height, 3), face::Image(input.width, input.height, 1)};
        const float* base = input.data.data() + plane * 4 * k;
        for (int y = 0; y < input.height; ++y)
            for (int x = 0; x < input.width; ++x) {
                const std::size_t i = static_cast<std::size_t>(y) * input.width + x;
                for (int c = 0; c < 3; ++c)
                    f.rgb.at(x, y, c) = base[plane * c + i];
                f.attention.at(x, y, 0) = base[plane * 3 + i];
            }
        frames.push_back(std::move(f));
    }
    return frames;
}

torch::Tensor to_tensor(const StackedInput& input)
{
    return torch::from_blob(const_cast<float*>(input.data.data()), {input.channels, input.height, input.width},
                            torch::kFloat32)
        .clone();
}

torch::Tensor to_tensor(const face::Image& image)
{
    auto hwc = torch::from_blob(const_cast<float*>(image.pixels.data()), {image.height, image.width, image.channels},
                                torch::kFloat32);
    return hwc.permute({2, 0, 1}).contiguous();
}

face::Image to_image(const torch::Tensor& chw)
{
    if (chw.dim() != 3)
        throw Error(ErrorKind::shape_mismatch, "expected a [C, H, W] tensor");
    auto hwc = chw.detach().to(torch::kFloat32).clamp(0.0, 1.0).permute({1, 2, 0}).contiguous();
    face::Image image(static_cast<int>(chw.size(2)), static_cast<int>(chw.size(1)), static_cast<int>(chw.size(0)));
    std::copy(hwc.data_ptr<float>(), hwc.data_ptr<float>() + hwc.numel(), image.pixels.begin());
    return image;
}

nlohmann::json to_json(const RenderNetConfig& c)
{
    return {
        {"n_w", c.n_w},
        {"resolution", c.resolution},
        {"lambda1", c.lambda_fm},
        {"lambda2", c.lambda_vgg},
        {"lambda3", c.lambda_l1},
        {"epochs", c.epochs},
        {"batch", c.batch},
        {"decay_epochs", c.decay_epochs},
        {"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"least_squares", c.least_squares},
        {"generator_base", c.generator_base},
        {"residual_blocks", c.residual_blocks},
        {"discriminator_base", c.discriminator_base},
        {"scales", c.scales},
        {"max_steps", c.max_steps},
        {"feature_extractor", c.feature_extractor},
        {"seed", c.seed},
    };
}

RenderNetConfig render_config_from_json(const nlohmann::json& doc)
{
    RenderNetConfig c;
    const nlohmann::json defaults = to_json(c);
    for (const auto& [key, value] : doc.items())
        if (!defaults.contains(key))
            throw Error(ErrorKind::config, "unknown render key '" + key + "'");
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key))
            field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    try {
        get("n_w", c.n_w);
        get("resolution", c.resolution);
        get("lambda1", c.lambda_fm);
        get("lambda2", c.lambda_vgg);
        get("lambda3", c.lambda_l1);
        get("epochs", c.epochs);
        get("batch", c.batch);
        get("decay_epochs", c.decay_epochs);
        get("learning_rate", c.learning_rate);
        get("beta1", c.beta1);
        get("beta2", c.beta2);
        get("least_squares", c.least_squares);
        get("generator_base", c.generator_base);
        get("residual_blocks", c.residual_blocks);
        get("discriminator_base", c.discriminator_base);
        get("scales", c.scales);
        get("max_steps", c.max_steps);
        get("feature_extractor", c.feature_extractor);
        get("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad render config value: ") + e.what());
    }
    if (c.n_w < 1 || c.resolution < 1 || c.batch < 1 || c.epochs < 0 || c.decay_epochs < 0 || c.generator_base < 1
        || c.discriminator_base < 1 || c.scales < 1 || c.residual_blocks < 0)
        throw Error(ErrorKind::config, "render config out of range");
    return c;
}

double lr_factor(const RenderNetConfig& config, int epoch)
{
    const int start = config.epochs - config.decay_epochs;
    if (config.decay_epochs <= 0 || epoch < start)
        return 1.0;
    return static_cast<double>(config.epochs - epoch) / config.decay_epochs;
}

namespace {

torch::nn::Conv2dOptions conv3(int in, int out, int stride = 1)
{
    return torch::nn::Conv2dOptions(in, out, 3).stride(stride).padding(1);
}

struct ResidualBlockImpl : torch::nn::Module {
    explicit ResidualBlockImpl(int ch)
        : a(register_module("a", torch::nn::Conv2d(conv3(ch, ch)))),
          b(register_module("b", torch::nn::Conv2d(conv3(ch, ch))))
    {}
    torch::Tensor forward(const torch::Tensor& x) { return x + b(torch::relu(a(x))); }
    torch::nn::Conv2d a, b;
};
TORCH_MODULE(ResidualBlock);

} // namespace

RenderGeneratorImpl::RenderGeneratorImpl(const RenderNetConfig& c)
{
    const int b = c.generator_base;
    in_ = register_module("in", torch::nn::Conv2d(conv3(c.input_channels(), b)));
    down_ = register_module("down", torch::nn::Conv2d(conv3(b, 2 * b, 2)));
    res_ = register_module("res", torch::nn::ModuleList());
    for (int i = 0; i < c.residual_blocks; ++i)
        res_->push_back(ResidualBlock(2 * b));
    up_ = register_module("up", torch::nn::Conv2d(conv3(2 * b, b)));
    merge_ = register_module("merge", torch::nn::Conv2d(conv3(2 * b, b)));
    out_ = register_module("out", torch::nn::Conv2d(conv3(b, 3)));
}

torch::Tensor RenderGeneratorImpl::forward(const torch::Tensor& x)
{
    auto skip = torch::relu(in_(x));
    auto h = torch::relu(down_(skip));
    for (const auto& block : *res_)
        h = block->as<ResidualBlock>()->forward(h);
    h = F::interpolate(h, F::InterpolateFuncOptions()
                              .size(std::vector<int64_t>{skip.size(2), skip.size(3)})
                              .mode(torch::kNearest));
    h = torch::relu(up_(h));
    h = torch::relu(merge_(torch::cat({h, skip}, 1)));
    return torch::sigmoid(out_(h));
}

PatchDiscriminatorImpl::PatchDiscriminatorImpl(int in_channels, int base)
{
    layers_ = register_module("layers", torch::nn::ModuleList());
    layers_->push_back(torch::nn::Conv2d(conv3(in_channels, base, 2)));
    layers_->push_back(torch::nn::Conv2d(conv3(base, 2 * base, 2)));
    layers_->push_back(torch::nn::Conv2d(conv3(2 * base, 4 * base)));
    layers_->push_back(torch::nn::Conv2d(conv3(4 * base, 1)));
}

DiscriminatorOutput PatchDiscriminatorImpl::forward(const torch::Tensor& x)
{
    DiscriminatorOutput out;
    auto h = x;
    const auto n = layers_->size();
    for (std::size_t i = 0; i < n; ++i) {
        h = layers_[i]->as<torch::nn::Conv2d>()->forward(h);
        if (i + 1 < n) {
            h = F::leaky_relu(h, F::LeakyReLUFuncOptions().negative_slope(0.2));
            out.features.push_back(h);
        }
    }
    out.logits = h;
    return out;
}

MultiScaleDiscriminatorImpl::MultiScaleDiscriminatorImpl(const RenderNetConfig& c)
{
    scales_ = register_module("scales", torch::nn::ModuleList());
    for (int i = 0; i < c.scales; ++i)
        scales_->push_back(PatchDiscriminator(c.input_channels() + 3, c.discriminator_base));
}

std::vector<torch::Tensor> MultiScaleDiscriminatorImpl::scale_inputs(const torch::Tensor& stacked,
                                                                     const torch::Tensor& frame) const
{
    std::vector<torch::Tensor> inputs;
    auto x = torch::cat({stacked, frame}, 1);
    for (std::size_t i = 0; i < scales_->size(); ++i) {
        if (i > 0)
            x = F::avg_pool2d(x, F::AvgPool2dFuncOptions(2));
        inputs.push_back(x);
    }
    return inputs;
}

std::vector<DiscriminatorOutput> MultiScaleDiscriminatorImpl::forward(const torch::Tensor& stacked,
                                                                      const torch::Tensor& frame)
{
    std::vector<DiscriminatorOutput> out;
    const auto inputs = scale_inputs(stacked, frame);
    for (std::size_t i = 0; i < inputs.size(); ++i)
        out.push_back(scales_[i]->as<PatchDiscriminator>()->forward(inputs[i]));
    return out;
}

RandomConvExtractor::RandomConvExtractor(std::uint64_t seed)
{
    const int widths[] = {3, 8, 16, 16};
    std::mt19937_64 rng(seed ^ 0x5eedf00dull);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int l = 0; l < 3; ++l) {
        const int in = widths[l], out = widths[l + 1];
        const double scale = std::sqrt(2.0 / (in * 9));
        std::vector<double> w(static_cast<std::size_t>(out) * in * 9), b(static_cast<std::size_t>(out));
        for (auto& v : w)
            v = normal(rng) * scale;
        for (auto& v : b)
            v = normal(rng) * 0.01;
        weights_.push_back(torch::tensor(w, torch::kFloat64).reshape({out, in, 3, 3}));
        biases_.push_back(torch::tensor(b, torch::kFloat64));
    }
}

std::vector<torch::Tensor> RandomConvExtractor::features(const torch::Tensor& images)
{
    std::vector<torch::Tensor> out;
    auto h = images;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        const auto w = weights_[l].to(images.dtype());
        const auto b = biases_[l].to(images.dtype());
        h = torch::relu(F::conv2d(h, w, F::Conv2dFuncOptions().bias(b).stride(l == 0 ? 1 : 2).padding(1)));
        out.push_back(h);
    }
    return out;
}

std::unique_ptr<FeatureExtractor> make_feature_extractor(const RenderNetConfig& config)
{
    if (config.feature_extractor == "random_conv")
        return std::make_unique<RandomConvExtractor>(config.seed);
    throw Error(ErrorKind::config, "unknown feature extractor '" + config.feature_extractor + "'");
}

torch::Tensor feature_l1(const std::vector<torch::Tensor>& a, const std::vector<torch::Tensor>& b)
{
    if (a.size() != b.size() || a.empty())
        throw Error(ErrorKind::shape_mismatch, "feature lists differ in depth");
    torch::Tensor sum;
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto term = (a[i] - b[i]).abs().mean();
        sum = i == 0 ? term : sum + term;
    }
    return sum / static_cast<double>(a.size());
}

torch::Tensor perceptual_loss(FeatureExtractor& extractor, const torch::Tensor& a, const torch::Tensor& b)
{
    return feature_l1(extractor.features(a), extractor.features(b));
}

torch::Tensor generator_adversarial(const torch::Tensor& logits, bool least_squares)
{
    if (least_squares)
        return (logits - 1.0).pow(2).mean();
    return F::softplus(-logits).mean();
}

torch::Tensor discriminator_adversarial(const torch::Tensor& real_logits, const torch::Tensor& fake_logits,
                                        bool least_squares)
{
    if (least_squares)
        return (real_logits - 1.0).pow(2).mean() + fake_logits.pow(2).mean();
    return F::softplus(-real_logits).mean() + F::softplus(fake_logits).mean();
}

LossReport RenderLosses::report() const
{
    LossReport r;
    r.add("L_R_GAN", adversarial.item<double>());
    r.add("L_FM", feature_matching.item<double>());
    r.add("L_VGG", perceptual.item<double>());
    r.add("L_L1", l1.item<double>());
    r.total = total.item<double>();
    return r;
}

namespace {

void check_sizes(const torch::Tensor& fake, const torch::Tensor& real, const torch::Tensor& stacked)
{
    if (fake.dim() != 4 || real.dim() != 4 || stacked.dim() != 4)
        throw Error(ErrorKind::shape_mismatch, "render losses expect [B, C, H, W] tensors");
    if (fake.sizes() != real.sizes())
        throw Error(ErrorKind::shape_mismatch, "generated and real frames differ in size");
    if (stacked.size(0) != real.size(0) || stacked.size(2) != real.size(2) || stacked.size(3) != real.size(3))
        throw Error(ErrorKind::shape_mismatch, "stacked input and frame differ in size");
}

} // namespace

RenderLosses loss_render(const torch::Tensor& fake, const torch::Tensor& real, const torch::Tensor& stacked,
                         MultiScaleDiscriminator& discriminator, FeatureExtractor& extractor,
                         const RenderNetConfig& config)
{
    check_sizes(fake, real, stacked);
    const auto fake_out = discriminator->forward(stacked, fake);
    std::vector<DiscriminatorOutput> real_out;
    {
        torch::NoGradGuard no_grad;
        real_out = discriminator->forward(stacked, real);
    }
    RenderLosses l;
    l.adversarial = torch::zeros({}, fake.options());
    l.feature_matching = torch::zeros({}, fake.options());
    for (std::size_t i = 0; i < fake_out.size(); ++i) {
        l.adversarial = l.adversarial + generator_adversarial(fake_out[i].logits, config.least_squares);
        l.feature_matching = l.feature_matching + feature_l1(fake_out[i].features, real_out[i].features);
    }
    std::vector<torch::Tensor> real_features;
    {
        torch::NoGradGuard no_grad;
        real_features = extractor.features(real);
    }
    l.perceptual = feature_l1(extractor.features(fake), real_features);
    l.l1 = (fake - real).abs().mean();
    l.total = l.adversarial + config.lambda_fm * l.feature_matching + config.lambda_vgg * l.perceptual
              + config.lambda_l1 * l.l1;
    return l;
}

torch::Tensor render_discriminator_loss(const torch::Tensor& fake, const torch::Tensor& real,
                                        const torch::Tensor& stacked, MultiScaleDiscriminator& discriminator,
                                        bool least_squares)
{
    check_sizes(fake, real, stacked);
    const auto real_out = discriminator->forward(stacked, real);
    const auto fake_out = discriminator->forward(stacked, fake.detach());
    torch::Tensor sum = torch::zeros({}, real.options());
    for (std::size_t i = 0; i < real_out.size(); ++i)
        sum = sum + discriminator_adversarial(real_out[i].logits, fake_out[i].logits, least_squares);
    return sum;
}

RenderNet::RenderNet(const RenderNetConfig& cfg) : config(cfg)
{
    nn::use_deterministic_runtime();
    torch::manual_seed(cfg.seed);
    generator = RenderGenerator(cfg);
    discriminator = MultiScaleDiscriminator(cfg);
}

namespace {

struct PairBatch {
    torch::Tensor input; // [B, 8N_w, H, W]
    torch::Tensor frame; // [B, 3, H, W]
};

PairBatch make_batch(const std::vector<TrainingPair>& pairs, const std::vector<std::size_t>& order,
                     std::size_t begin, std::size_t end)
{
    std::vector<torch::Tensor> x, y;
    for (std::size_t i = begin; i < end; ++i) {
        x.push_back(to_tensor(pairs[order[i]].input));
        y.push_back(to_tensor(pairs[order[i]].frame));
    }
    return {torch::stack(x), torch::stack(y)};
}

void check_pairs(const std::vector<TrainingPair>& pairs, const RenderNetConfig& config)
{
    for (const auto& p : pairs) {
        if (p.input.channels != config.input_channels())
            throw Error(ErrorKind::shape_mismatch, "stacked input has the wrong channel count for N_w");
        if (p.frame.channels != 3 || p.frame.width != p.input.width || p.frame.height != p.input.height)
            throw Error(ErrorKind::shape_mismatch, "training frame does not match its stacked input");
        if (p.frame.width != pairs.front().frame.width || p.frame.height != pairs.front().frame.height)
            throw Error(ErrorKind::shape_mismatch, "training pairs differ in resolution");
    }
}

void set_lr(torch::optim::Adam& opt, double lr)
{
    for (auto& group : opt.param_groups())
        static_cast<torch::optim::AdamOptions&>(group.options()).lr(lr);
}

void check_finite(double value, std::int64_t step)
{
    if (!std::isfinite(value))
        throw Error(ErrorKind::divergence, "non-finite render loss at step " + std::to_string(step));
}

} // namespace

std::vector<LossReport> train_render_net(RenderNet& net, const std::vector<TrainingPair>& pairs,
                                         FeatureExtractor& extractor)
{
    const auto& cfg = net.config;
    if (cfg.epochs <= 0)
        return {};
    if (pairs.empty())
        throw Error(ErrorKind::invalid_argument, "no training pairs");
    check_pairs(pairs, cfg);
    nn::use_deterministic_runtime();

    auto adam = [&](const std::vector<torch::Tensor>& params) {
        return torch::optim::Adam(params,
                                  torch::optim::AdamOptions(cfg.learning_rate).betas({cfg.beta1, cfg.beta2}));
    };
    auto opt_g = adam(net.generator->parameters());
    auto opt_d = adam(net.discriminator->parameters());
    net.generator->train();
    net.discriminator->train();

    std::vector<std::size_t> order(pairs.size());
    std::vector<LossReport> steps;
    int taken = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.max_steps > 0 && taken >= cfg.max_steps)
            break;
        const double lr = cfg.learning_rate * lr_factor(cfg, epoch);
        set_lr(opt_g, lr);
        set_lr(opt_d, lr);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(cfg.seed * 1000003ull + static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<LossReport> epoch_reports;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(cfg.batch)) {
            if (cfg.max_steps > 0 && taken >= cfg.max_steps)
                break;
            const auto end = std::min(order.size(), begin + static_cast<std::size_t>(cfg.batch));
            const PairBatch batch = make_batch(pairs, order, begin, end);

            torch::Tensor fake;
            {
                torch::NoGradGuard no_grad;
                fake = net.generator->forward(batch.input);
            }
            auto d_loss = render_discriminator_loss(fake, batch.frame, batch.input, net.discriminator,
                                                    cfg.least_squares);
            const double d_value = d_loss.item<double>();
            check_finite(d_value, net.step);
            opt_d.zero_grad();
            d_loss.backward();
            opt_d.step();

            fake = net.generator->forward(batch.input);
            auto losses = loss_render(fake, batch.frame, batch.input, net.discriminator, extractor, cfg);
            LossReport report = losses.report();
            check_finite(report.total, net.step);
            opt_g.zero_grad();
            losses.total.backward();
            opt_g.step();

            report.add("L_R_disc", d_value);
            epoch_reports.push_back(report);
            steps.push_back(report);
            ++net.step;
            ++taken;
        }
        if (!epoch_reports.empty())
            net.history.push_back(average(epoch_reports));
    }
    return steps;
}

double reconstruction_error(RenderNet& net, const std::vector<TrainingPair>& pairs)
{
    if (pairs.empty())
        throw Error(ErrorKind::invalid_argument, "no pairs to evaluate");
    check_pairs(pairs, net.config);
    torch::NoGradGuard no_grad;
    net.generator->eval();
    double sum = 0.0;
    for (const auto& p : pairs) {
        auto fake = net.generator->forward(to_tensor(p.input).unsqueeze(0)).clamp(0.0, 1.0);
        sum += (fake - to_tensor(p.frame).unsqueeze(0)).abs().to(torch::kFloat64).mean().item<double>();
    }
    return sum / static_cast<double>(pairs.size());
}

std::vector<face::Image> translate(RenderNet& net, const std::vector<RenderFrame>& frames)
{
    nn::use_deterministic_runtime();
    torch::NoGradGuard no_grad;
    net.generator->eval();
    std::vector<face::Image> out;
    out.reserve(frames.size());
    for (int t = 0; t < static_cast<int>(frames.size()); ++t) {
        const auto stacked = stack_window(frames, t, net.config.n_w);
        auto y = net.generator->forward(to_tensor(stacked).unsqueeze(0));
        out.push_back(to_image(y.squeeze(0)));
    }
    return out;
}

void save_render_checkpoint(const RenderNet& net, const fs::path& dir)
{
    fs::create_directories(dir);
    nlohmann::json params = nn::save_parameters(*net.generator, dir, "generator");
    for (auto& entry : nn::save_parameters(*net.discriminator, dir, "discriminator"))
        params.push_back(entry);
    nn::write_json({{"kind", "render_net"},
                    {"config", to_json(net.config)},
                    {"seed", net.config.seed},
                    {"step", net.step},
                    {"parameters", params},
                    {"history", history_to_json(net.history)}},
                   dir / "manifest.json");
}

RenderNet load_render_checkpoint(const fs::path& dir)
{
    const auto doc = nn::read_json(dir / "manifest.json");
    if (doc.value("kind", std::string()) != "render_net")
        throw Error(ErrorKind::bad_header, dir.string() + " is not a render_net checkpoint");
    RenderNet net(render_config_from_json(doc.at("config")));
    nn::load_parameters(*net.generator, dir, doc.at("parameters"), "generator");
    nn::load_parameters(*net.discriminator, dir, doc.at("parameters"), "discriminator");
    net.step = doc.at("step").get<std::int64_t>();
    net.history = history_from_json(doc.at("history"));
    return net;
}

} // namespace facial::render
