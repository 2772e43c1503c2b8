#include "facial/gan/facial_gan.hpp"

#include "facial/common/error.hpp"
#include "facial/nn/checkpoint.hpp"
#include "facial/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace facial::gan {

namespace fs = std::filesystem;

FacialGan::FacialGan(const FacialGanConfig& cfg) : config(cfg)
{
    nn::use_deterministic_runtime();
    torch::manual_seed(cfg.seed);
    generator = FacialGenerator(cfg);
    discriminator = FacialDiscriminator(cfg);
}

namespace {

struct Batch {
    torch::Tensor audio;   // [B, T, 29]
    torch::Tensor targets; // [B, T, 71]
    torch::Tensor initial; // [B, 71]
};

Batch make_batch(const std::vector<audio::WindowSample>& samples, const std::vector<std::size_t>& order,
                 std::size_t begin, std::size_t end)
{
    std::vector<torch::Tensor> a, t, s;
    for (std::size_t i = begin; i < end; ++i) {
        const auto& sample = samples[order[i]];
        a.push_back(nn::to_tensor(sample.audio));
        t.push_back(nn::to_tensor(sample.targets));
        s.push_back(nn::to_tensor(sample.initial_state));
    }
    return {torch::stack(a), torch::stack(t), torch::stack(s)};
}

torch::optim::Adam make_adam(const std::vector<torch::Tensor>& params, const FacialGanConfig& c)
{
    return torch::optim::Adam(params, torch::optim::AdamOptions(c.learning_rate).betas({c.beta1, c.beta2}));
}

void check_finite(double value, std::int64_t step)
{
    if (!std::isfinite(value))
        throw Error(ErrorKind::divergence, "non-finite loss at step " + std::to_string(step));
}

} // namespace

std::vector<LossReport> optimize(FacialGan& model, const std::vector<audio::WindowSample>& samples,
                                 const TrainSchedule& schedule)
{
    if (schedule.epochs <= 0)
        return {};
    if (samples.empty())
        throw Error(ErrorKind::invalid_argument, "no training windows");
    if (schedule.batch <= 0)
        throw Error(ErrorKind::invalid_argument, "batch size must be positive");
    nn::use_deterministic_runtime();

    const auto& cfg = model.config;
    const bool adversarial = cfg.weights.adversarial != 0.0;
    auto opt_g = make_adam(model.generator->parameters(), cfg);
    auto opt_d = make_adam(model.discriminator->parameters(), cfg);
    model.generator->train();
    model.discriminator->train();

    std::vector<std::size_t> order(samples.size());
    std::vector<LossReport> steps;
    int taken = 0;
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::mt19937_64 rng(schedule.order_seed * 1000003ull + static_cast<std::uint64_t>(epoch));
        std::shuffle(order.begin(), order.end(), rng);

        std::vector<LossReport> epoch_reports;
        for (std::size_t begin = 0; begin < order.size(); begin += static_cast<std::size_t>(schedule.batch)) {
            if (schedule.max_steps > 0 && taken >= schedule.max_steps)
                break;
            const auto end = std::min(order.size(), begin + static_cast<std::size_t>(schedule.batch));
            const Batch batch = make_batch(samples, order, begin, end);

            double disc_value = 0.0;
            if (adversarial) {
                torch::Tensor fake;
                {
                    torch::NoGradGuard no_grad;
                    fake = model.generator->forward(batch.audio, batch.initial);
                }
                auto d_loss = loss_fgan(model.discriminator->forward(batch.targets),
                                        model.discriminator->forward(fake))
                                  .discriminator;
                disc_value = d_loss.item<double>();
                check_finite(disc_value, model.step);
                opt_d.zero_grad();
                d_loss.backward();
                opt_d.step();
            }

            auto pred = model.generator->forward(batch.audio, batch.initial);
            auto reg = loss_reg(pred, batch.targets, batch.initial, cfg.weights);
            torch::Tensor d_fake = adversarial ? model.discriminator->forward(pred) : torch::Tensor();
            auto loss = loss_facial_total(reg, d_fake, cfg.weights);
            check_finite(loss.report.total, model.step);
            opt_g.zero_grad();
            loss.total.backward();
            opt_g.step();

            loss.report.add("L_fgan_disc", disc_value);
            epoch_reports.push_back(loss.report);
            steps.push_back(loss.report);
            ++model.step;
            ++taken;
        }
        if (!epoch_reports.empty())
            model.history.push_back(average(epoch_reports));
    }
    return steps;
}

std::vector<audio::WindowSample> manifest_windows(const io::DatasetManifest& manifest, int window, int stride)
{
    std::vector<audio::WindowSample> samples;
    for (const auto& entry : manifest.clips) {
        const auto clip = io::load_clip(entry);
        io::check_frame_counts(clip, entry.frame_count);
        auto windows = audio::slice_windows(clip.audio, clip.expression, clip.pose, clip.blink, window, stride,
                                            clip.clip_id);
        std::move(windows.begin(), windows.end(), std::back_inserter(samples));
    }
    return samples;
}

FacialGan train_facial_gan(const std::vector<audio::WindowSample>& samples, const FacialGanConfig& config)
{
    FacialGan model(config);
    optimize(model, samples, {config.general_epochs, config.general_batch, config.max_steps, config.seed});
    return model;
}

FacialGan train_facial_gan(const io::DatasetManifest& manifest, const FacialGanConfig& config)
{
    return train_facial_gan(manifest_windows(manifest, config.window, config.stride), config);
}

FacialGan finetune_facial_gan(const FacialGan& general, const std::vector<audio::WindowSample>& clip_samples,
                              const FacialGanConfig& config)
{
    FacialGanConfig merged = general.config;
    merged.weights = config.weights;
    merged.learning_rate = config.learning_rate;
    merged.beta1 = config.beta1;
    merged.beta2 = config.beta2;
    merged.finetune_epochs = config.finetune_epochs;
    merged.finetune_batch = config.finetune_batch;
    merged.max_steps = config.max_steps;

    FacialGan model(merged);
    nn::copy_parameters(*general.generator, *model.generator);
    nn::copy_parameters(*general.discriminator, *model.discriminator);
    model.step = general.step;
    model.history = general.history;
    optimize(model, clip_samples,
             {merged.finetune_epochs, merged.finetune_batch, merged.max_steps, config.seed + 1});
    return model;
}

LossReport evaluate_regression(FacialGan& model, const std::vector<audio::WindowSample>& samples)
{
    if (samples.empty())
        throw Error(ErrorKind::invalid_argument, "no windows to evaluate");
    torch::NoGradGuard no_grad;
    model.generator->eval();
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<LossReport> reports;
    std::vector<double> sizes;
    constexpr std::size_t chunk = 64;
    for (std::size_t begin = 0; begin < order.size(); begin += chunk) {
        const auto end = std::min(order.size(), begin + chunk);
        const Batch batch = make_batch(samples, order, begin, end);
        auto pred = model.generator->forward(batch.audio, batch.initial);
        auto reg = loss_reg(pred, batch.targets, batch.initial, model.config.weights);
        LossReport r = loss_facial_total(reg, torch::Tensor(), model.config.weights).report;
        // Weight each chunk by its size so the result is a per-window mean.
        for (auto& [name, value] : r.components)
            value *= static_cast<double>(end - begin);
        r.total *= static_cast<double>(end - begin);
        reports.push_back(r);
    }
    LossReport out = average(reports);
    const double scale = static_cast<double>(reports.size()) / static_cast<double>(samples.size());
    for (auto& [name, value] : out.components)
        value *= scale;
    out.total *= scale;
    return out;
}

void save_checkpoint(const FacialGan& model, const fs::path& dir)
{
    fs::create_directories(dir);
    nlohmann::json params = nn::save_parameters(*model.generator, dir, "generator");
    for (auto& entry : nn::save_parameters(*model.discriminator, dir, "discriminator"))
        params.push_back(entry);
    nn::write_json({{"kind", "facial_gan"},
                    {"config", to_json(model.config)},
                    {"seed", model.config.seed},
                    {"step", model.step},
                    {"parameters", params},
                    {"history", history_to_json(model.history)}},
                   dir / "manifest.json");
}

FacialGan load_checkpoint(const fs::path& dir)
{
    const auto doc = nn::read_json(dir / "manifest.json");
    if (doc.value("kind", std::string()) != "facial_gan")
        throw Error(ErrorKind::bad_header, dir.string() + " is not a facial_gan checkpoint");
    FacialGan model(facial_gan_config_from_json(doc.at("config")));
    nn::load_parameters(*model.generator, dir, doc.at("parameters"), "generator");
    nn::load_parameters(*model.discriminator, dir, doc.at("parameters"), "discriminator");
    model.step = doc.at("step").get<std::int64_t>();
    model.history = history_from_json(doc.at("history"));
    return model;
}

InferenceResult chain_windows(const MatrixXf& audio, const Eigen::VectorXf& initial_state, int window,
                              const WindowPredictor& predict)
{
    const int frames = static_cast<int>(audio.rows());
    if (frames < 1)
        throw Error(ErrorKind::invalid_argument, "cannot infer attributes for an empty clip");
    if (window < 2)
        throw Error(ErrorKind::invalid_argument, "inference window must span at least two frames");
    if (initial_state.size() != io::kAttributeDim)
        throw Error(ErrorKind::dim_mismatch, "initial state must have 71 entries");

    InferenceResult result;
    result.attributes.resize(frames, io::kAttributeDim);
    Eigen::VectorXf state = initial_state;
    int start = 0;
    while (true) {
        MatrixXf chunk(window, audio.cols());
        for (int k = 0; k < window; ++k)
            chunk.row(k) = audio.row(std::min(start + k, frames - 1));
        MatrixXf pred = predict(chunk, state);
        if (pred.rows() != window || pred.cols() != io::kAttributeDim)
            throw Error(ErrorKind::shape_mismatch, "window predictor returned the wrong shape");

        const int first = start == 0 ? 0 : 1;
        for (int k = first; k < window && start + k < frames; ++k)
            result.attributes.row(start + k) = pred.row(k);
        result.window_starts.push_back(start);
        result.initial_states.push_back(state);
        result.window_predictions.push_back(pred);

        if (start + window >= frames)
            break;
        state = pred.row(window - 1).transpose();
        start += window - 1;
    }
    return result;
}

InferenceResult infer_sequence(FacialGan& model, const MatrixXf& audio, const Eigen::VectorXf& initial_state)
{
    nn::use_deterministic_runtime();
    model.generator->eval();
    auto predict = [&](const MatrixXf& chunk, const Eigen::VectorXf& s) {
        torch::NoGradGuard no_grad;
        auto out = model.generator->forward(nn::to_tensor(chunk).unsqueeze(0), nn::to_tensor(s).unsqueeze(0));
        return nn::to_matrix(out.squeeze(0));
    };
    return chain_windows(audio, initial_state, model.config.window, predict);
}

Eigen::VectorXf mean_attribute_frame(const MatrixXf& attributes)
{
    if (attributes.rows() == 0)
        throw Error(ErrorKind::invalid_argument, "no frames to average");
    return attributes.cast<double>().colwise().mean().transpose().cast<float>();
}

} // namespace facial::gan
