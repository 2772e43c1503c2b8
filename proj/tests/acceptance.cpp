// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "support/gradcheck.hpp"
#include "support/loss_oracle.hpp"
#include "support/mini_pipeline.hpp"
#include "support/temp_dir.hpp"

#include "facial/audio/pipeline.hpp"
#include "facial/eye/attention.hpp"
#include "facial/face/model.hpp"
#include "facial/face/raster.hpp"
#include "facial/gan/facial_gan.hpp"
#include "facial/io/synthetic.hpp"
#include "facial/metrics/metrics.hpp"
#include "facial/metrics/personalization.hpp"
#include "facial/nn/checkpoint.hpp"
#include "facial/nn/tensor.hpp"
#include "facial/pipeline/frames.hpp"
#include "facial/render/render_net.hpp"

#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace facial;
using facial::testing::Seq;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
    return std::chrono::duration<double>(Clock::now() - start).count();
}

Seq random_seq(std::mt19937_64& rng, int frames, int dim)
{
    std::normal_distribution<double> n(0.0, 1.0);
    Seq s(static_cast<std::size_t>(frames), std::vector<double>(static_cast<std::size_t>(dim)));
    for (auto& row : s)
        for (auto& v : row)
            v = n(rng);
    return s;
}

torch::Tensor to_t(const std::vector<Seq>& batch)
{
    const auto b = static_cast<std::int64_t>(batch.size());
    const auto t = static_cast<std::int64_t>(batch[0].size());
    const auto d = static_cast<std::int64_t>(batch[0][0].size());
    auto out = torch::empty({b, t, d}, torch::kDouble);
    auto a = out.accessor<double, 3>();
    for (std::int64_t i = 0; i < b; ++i)
        for (std::int64_t j = 0; j < t; ++j)
            for (std::int64_t k = 0; k < d; ++k)
                a[i][j][k] = batch[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)][static_cast<std::size_t>(k)];
    return out;
}

double val(const torch::Tensor& t)
{
    return t.item<double>();
}

double flat_mean_abs_diff(const torch::Tensor& a, const torch::Tensor& b)
{
    const auto x = a.detach().to(torch::kDouble).contiguous(), y = b.detach().to(torch::kDouble).contiguous();
    const double* p = x.data_ptr<double>();
    const double* q = y.data_ptr<double>();
    double s = 0.0;
    for (std::int64_t i = 0; i < x.numel(); ++i)
        s += std::abs(p[i] - q[i]);
    return s / static_cast<double>(x.numel());
}

double mean_softplus_neg(const torch::Tensor& logits)
{
    const auto x = logits.detach().to(torch::kDouble).contiguous();
    const double* p = x.data_ptr<double>();
    double s = 0.0;
    for (std::int64_t i = 0; i < x.numel(); ++i)
        s += std::log1p(std::exp(-p[i]));
    return s / static_cast<double>(x.numel());
}

std::int64_t count_parameters(const torch::nn::Module& m)
{
    std::int64_t n = 0;
    for (const auto& p : m.parameters())
        n += p.numel();
    return n;
}

std::vector<audio::WindowSample> synthetic_samples(int count, int window, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<float> n(0.0f, 1.0f);
    const auto map = io::make_synthetic_map(seed);
    std::vector<audio::WindowSample> out;
    for (int i = 0; i < count; ++i) {
        MatrixXf a(window, 29);
        for (int k = 0; k < a.size(); ++k)
            a.data()[k] = n(rng);
        audio::WindowSample s;
        s.audio = a;
        s.targets = io::apply_synthetic_map(map, a, 2);
        s.initial_state = s.targets.row(0).transpose();
        s.clip_id = "c" + std::to_string(i);
        out.push_back(s);
    }
    return out;
}

gan::FacialGanConfig gan_config(int window, int dims)
{
    gan::FacialGanConfig c;
    c.window = window;
    c.stride = 4;
    c.d_z = c.temporal_hidden = c.d_c = dims;
    c.temporal_layers = 2;
    c.local_hidden = c.disc_hidden = dims < 8 ? dims : 8;
    c.seed = 7;
    return c;
}

face::Vertices mean_vertices(const face::FaceBasis& b)
{
    return face::synthesize_geometry(b, Eigen::VectorXd::Zero(b.id_basis.cols()),
                                     Eigen::VectorXd::Zero(b.exp_basis.cols()));
}

// ---------------------------------------------------------------------------

void loss_oracles(Outcome& o)
{
    const auto start = Clock::now();
    double worst = 0.0;
    auto track = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };

    // T=2 scalar: truth 1, 3 and pred 2, 2 give V = 2, U = 4.
    const auto truth2 = torch::tensor({1.0, 3.0}, torch::kDouble).view({1, 2, 1});
    const auto pred2 = torch::tensor({2.0, 2.0}, torch::kDouble).view({1, 2, 1});
    track(val(gan::motion_term(pred2, truth2)), 4.0);
    track(val(gan::sequence_loss(pred2, truth2, 10.0)), 42.0);

    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        const auto truth = random_seq(rng, 4, 1 + trial % 7), pred = random_seq(rng, 4, 1 + trial % 7);
        track(val(gan::sequence_loss(to_t({pred}), to_t({truth}), 10.0)), testing::oracle_sequence(truth, pred, 10.0));
    }

    const gan::LossWeights w;
    o.require(w.expression == 2.0 && w.pose == 1.0 && w.eye == 5.0 && w.initial_state == 10.0, "default weights");
    for (int frames : {2, 4}) {
        std::vector<Seq> truth, pred;
        std::vector<std::vector<double>> state;
        for (int b = 0; b < 3; ++b) {
            truth.push_back(random_seq(rng, frames, 71));
            pred.push_back(random_seq(rng, frames, 71));
            state.push_back(random_seq(rng, 1, 71)[0]);
        }
        auto s = torch::empty({3, 71}, torch::kDouble);
        for (int b = 0; b < 3; ++b)
            for (int k = 0; k < 71; ++k)
                s[b][k] = state[static_cast<std::size_t>(b)][static_cast<std::size_t>(k)];
        const auto reg = gan::loss_reg(to_t(pred), to_t(truth), s, w);
        testing::OracleReg mean;
        for (std::size_t b = 0; b < 3; ++b) {
            const auto r = testing::oracle_reg(truth[b], pred[b], state[b], 2, 1, 5, 10, 10);
            mean.exp += r.exp / 3;
            mean.pose += r.pose / 3;
            mean.eye += r.eye / 3;
            mean.s += r.s / 3;
            mean.total += r.total / 3;
        }
        track(val(reg.attributes.expression), mean.exp);
        track(val(reg.attributes.pose), mean.pose);
        track(val(reg.attributes.eye), mean.eye);
        track(val(reg.initial_state), mean.s);
        track(val(reg.total), mean.total);
    }

    render::RenderNetConfig cfg;
    cfg.resolution = 16;
    cfg.generator_base = 4;
    cfg.residual_blocks = 1;
    cfg.discriminator_base = 4;
    cfg.scales = 2;
    cfg.seed = 5;
    o.require(cfg.lambda_fm == 2.0 && cfg.lambda_vgg == 10.0 && cfg.lambda_l1 == 50.0, "render weights");
    render::RenderNet net(cfg);
    net.generator->to(torch::kDouble);
    net.discriminator->to(torch::kDouble);
    render::RandomConvExtractor vgg(3);
    torch::manual_seed(1);
    const auto x = torch::rand({1, cfg.input_channels(), 16, 16}, torch::kDouble);
    const auto real = torch::rand({1, 3, 16, 16}, torch::kDouble);
    const auto fake = net.generator->forward(x);
    const auto l = render::loss_render(fake, real, x, net.discriminator, vgg, cfg);
    const auto fo = net.discriminator->forward(x, fake), ro = net.discriminator->forward(x, real);
    double adv = 0.0, fm = 0.0;
    for (std::size_t i = 0; i < fo.size(); ++i) {
        adv += mean_softplus_neg(fo[i].logits);
        double layer_sum = 0.0;
        for (std::size_t k = 0; k < fo[i].features.size(); ++k)
            layer_sum += flat_mean_abs_diff(fo[i].features[k], ro[i].features[k]);
        fm += layer_sum / static_cast<double>(fo[i].features.size());
    }
    const auto ff = vgg.features(fake), rf = vgg.features(real);
    double perceptual = 0.0;
    for (std::size_t k = 0; k < ff.size(); ++k)
        perceptual += flat_mean_abs_diff(ff[k], rf[k]);
    perceptual /= static_cast<double>(ff.size());
    const double l1 = flat_mean_abs_diff(fake, real);
    track(val(l.total), adv + 2.0 * fm + 10.0 * perceptual + 50.0 * l1);

    const double elapsed = seconds_since(start);
    o.detail << "max |error| " << worst << ", " << elapsed << " s";
    o.require(worst <= 1e-9, "tolerance 1e-9");
    o.require(elapsed < 1.0, "under 1 s");
}

void gradient_suite(Outcome& o)
{
    const auto start = Clock::now();
    double worst = 0.0;
    auto check = [&](const testing::GradCheckResult& r, const std::string& what) {
        worst = std::max(worst, r.max_relative_error);
        o.require(r.max_relative_error <= 1e-4, what);
        o.require(r.kinks * 100 <= r.checked, what + " kinks");
    };

    auto g = gan_config(6, 4);
    g.local_hidden = g.disc_hidden = 4;
    g.seed = 3;
    gan::FacialGan m(g);
    m.generator->to(torch::kDouble);
    m.discriminator->to(torch::kDouble);
    o.require(count_parameters(*m.generator) <= 5000 && count_parameters(*m.discriminator) <= 5000, "gan size");
    torch::manual_seed(11);
    const auto audio = torch::randn({2, 6, 29}, torch::kDouble);
    const auto target = torch::randn({2, 6, 71}, torch::kDouble);
    const auto s = target.select(1, 0).clone();
    auto facial = [&] {
        auto pred = m.generator->forward(audio, s);
        auto reg = gan::loss_reg(pred, target, s, m.config.weights);
        return gan::loss_facial_total(reg, m.discriminator->forward(pred), m.config.weights).total;
    };
    const double scale = facial().item<double>();
    check(testing::check_gradients([&] { return facial() / scale; }, m.generator->parameters()), "L_facial");
    auto fgan = [&] {
        torch::Tensor fake;
        {
            torch::NoGradGuard ng;
            fake = m.generator->forward(audio, s);
        }
        return gan::loss_fgan(m.discriminator->forward(target), m.discriminator->forward(fake)).discriminator;
    };
    check(testing::check_gradients(fgan, m.discriminator->parameters()), "L_F-GAN");

    render::RenderNetConfig rc;
    rc.n_w = 1;
    rc.resolution = 8;
    rc.generator_base = 2;
    rc.residual_blocks = 1;
    rc.discriminator_base = 2;
    rc.scales = 2;
    rc.seed = 4;
    render::RenderNet net(rc);
    net.generator->to(torch::kDouble);
    net.discriminator->to(torch::kDouble);
    o.require(count_parameters(*net.generator) <= 5000 && count_parameters(*net.discriminator) <= 5000, "render size");
    render::RandomConvExtractor vgg(5);
    torch::manual_seed(13);
    const auto x = torch::rand({1, rc.input_channels(), 8, 8}, torch::kDouble);
    const auto real = torch::rand({1, 3, 8, 8}, torch::kDouble);
    check(testing::check_gradients(
              [&] { return render::loss_render(net.generator->forward(x), real, x, net.discriminator, vgg, rc).total; },
              net.generator->parameters()),
          "L_render");
    auto rgan = [&] {
        torch::Tensor fake;
        {
            torch::NoGradGuard ng;
            fake = net.generator->forward(x);
        }
        return render::render_discriminator_loss(fake, real, x, net.discriminator, false);
    };
    check(testing::check_gradients(rgan, net.discriminator->parameters()), "L_R-GAN");

    const double elapsed = seconds_since(start);
    o.detail << "max relative error " << worst << ", " << elapsed << " s";
    o.require(elapsed < 120.0, "under 2 min");
}

void motion_invariance(Outcome& o)
{
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> len(2, 40);
    std::normal_distribution<double> n(0.0, 5.0);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int frames = len(rng);
        const auto truth = to_t({random_seq(rng, frames, 71)});
        const auto pred = to_t({random_seq(rng, frames, 71)});
        auto offset = torch::empty({1, 1, 71}, torch::kDouble);
        for (int k = 0; k < 71; ++k)
            offset[0][0][k] = n(rng);
        const auto a = gan::split_attributes(pred), b = gan::split_attributes(pred + offset);
        const auto t = gan::split_attributes(truth);
        for (auto [x, y, z] : {std::tuple{a.expression, b.expression, t.expression}, std::tuple{a.pose, b.pose, t.pose},
                               std::tuple{a.blink, b.blink, t.blink}})
            worst = std::max(worst, std::abs(val(gan::motion_term(x, z)) - val(gan::motion_term(y, z))));
    }
    o.detail << "1000 sequences, max change " << worst;
    o.require(worst <= 1e-9, "tolerance 1e-9");
}

void overfit(Outcome& o)
{
    const auto start = Clock::now();

    auto cfg = gan_config(32, 64);
    cfg.weights.adversarial = 0.0;
    cfg.learning_rate = 3e-3;
    const auto samples = synthetic_samples(4, 32, 8);
    gan::FacialGan m(cfg);
    const double initial = gan::evaluate_regression(m, samples).get("L_reg");
    const auto steps = gan::optimize(m, samples, {500, 4, 500, 9});
    const double final_loss = gan::evaluate_regression(m, samples).get("L_reg");
    o.detail << "L_Reg at " << 100.0 * final_loss / initial << "% after " << steps.size() << " steps";
    o.require(steps.size() <= 500, "(a) step budget");
    o.require(final_loss < 0.01 * initial, "(a) below 1%");

    face::SyntheticFaceOptions fo;
    fo.grid = 33;
    fo.seed = 1;
    const auto basis = face::make_synthetic_basis(fo);
    pipeline::Appearance app;
    app.identity = Eigen::VectorXd::Zero(80);
    app.texture = Eigen::VectorXd::Zero(80);
    app.illumination.gamma[0] = app.illumination.gamma[9] = app.illumination.gamma[18] = 2.0 * std::sqrt(std::acos(-1.0));
    const pipeline::FrameRenderer renderer(basis, app, 0.004, 5.0, 64);
    std::vector<render::RenderFrame> frames;
    std::vector<face::Image> targets;
    for (int t = 0; t < 8; ++t) {
        std::vector<float> attr(71, 0.0f);
        attr[65] = 0.15f * std::sin(0.8f * static_cast<float>(t));
        attr[64] = 0.1f * std::cos(0.5f * static_cast<float>(t));
        attr[70] = t % 3 == 0 ? 4.0f : 0.0f;
        const auto out = renderer.render(attr.data());
        frames.push_back(out.frame);
        targets.push_back(pipeline::photo_transform(out.frame, out.visibility));
    }
    render::RenderNetConfig rc;
    rc.resolution = 64;
    rc.generator_base = 16;
    rc.residual_blocks = 2;
    rc.discriminator_base = 8;
    rc.scales = 2;
    rc.learning_rate = 1e-3;
    rc.epochs = 250;
    rc.decay_epochs = 50;
    rc.seed = 5;
    std::vector<render::TrainingPair> pairs;
    for (int t = 0; t < 8; ++t)
        pairs.push_back({render::stack_window(frames, t, rc.n_w), targets[static_cast<std::size_t>(t)]});
    render::RenderNet net(rc);
    auto vgg = render::make_feature_extractor(rc);
    const auto rsteps = render::train_render_net(net, pairs, *vgg);
    const double mae = render::reconstruction_error(net, pairs);
    const double elapsed = seconds_since(start);
    o.detail << "; render MAE " << mae << " after " << rsteps.size() << " steps; " << elapsed << " s";
    o.require(rsteps.size() <= 2000, "(b) step budget");
    o.require(mae < 0.05, "(b) MAE");
    o.require(elapsed < 900.0, "under 15 min");
}

void eye_mask(Outcome& o)
{
    face::SyntheticFaceOptions opt;
    opt.grid = 601;
    opt.id_dims = opt.exp_dims = opt.tex_dims = 1;
    const auto b = face::make_synthetic_basis(opt);
    const double th = 0.01;
    const int size = 512;
    const auto cam = face::OrthoCamera::fit(size, size);
    const auto region = eye::select_eye_vertices(b, th);
    const auto map = eye::render_attention_map(mean_vertices(b), b.triangles, region, 1.0, size, size, cam);
    int left = 0, right = 0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            if (map.at(x, y, 0) > 0.0f)
                ++(x < size / 2 ? left : right);
    const double analytic = 2.0 * std::acos(-1.0) * th * cam.scale * cam.scale;
    o.detail << "per-eye pixels " << left << "/" << right << " vs " << analytic;
    o.require(std::abs(left - analytic) <= 0.05 * analytic && std::abs(right - analytic) <= 0.05 * analytic,
              "within 5%");

    face::SyntheticFaceOptions small;
    small.grid = 65;
    small.id_dims = small.exp_dims = small.tex_dims = 1;
    const auto sb = face::make_synthetic_basis(small);
    const auto sregion = eye::select_eye_vertices(sb, 0.004);
    const auto scam = face::OrthoCamera::fit(96, 96);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ang(-0.4, 0.4);
    bool zero_ok = true, subset_ok = true;
    for (int trial = 0; trial < 5; ++trial) {
        face::PoseParams pose;
        pose.euler << ang(rng), ang(rng), ang(rng);
        const auto v = face::apply_pose(mean_vertices(sb), pose);
        for (float p : eye::render_attention_map(v, sb.triangles, sregion, 0.0, 96, 96, scam).pixels)
            zero_ok = zero_ok && p == 0.0f;
        const auto vis = face::rasterize_visibility(v, sb.triangles, 96, 96, scam);
        const auto lit = eye::render_attention_map(v, sb.triangles, sregion, 0.7, 96, 96, scam);
        for (std::size_t p = 0; p < lit.pixels.size(); ++p)
            if (lit.pixels[p] != 0.0f)
                subset_ok = subset_ok && vis.triangle[p] >= 0;
    }
    o.require(zero_ok, "au45=0 map is all zero");
    o.require(subset_ok, "mask inside face footprint");
}

void face_model(Outcome& o)
{
    face::SyntheticFaceOptions opt;
    opt.grid = 17;
    opt.seed = 3;
    const auto b = face::make_synthetic_basis(opt);
    const auto mean = face::synthesize_geometry(b, Eigen::VectorXd::Zero(80), Eigen::VectorXd::Zero(64));
    bool exact = true;
    for (int v = 0; v < b.vertex_count(); ++v)
        for (int c = 0; c < 3; ++c)
            exact = exact && mean(v, c) == b.mean_geometry[3 * v + c];
    o.require(exact, "mean reproduced exactly");

    std::mt19937_64 rng(11);
    std::normal_distribution<double> n(0.0, 1.0);
    auto rv = [&](Eigen::Index k) {
        Eigen::VectorXd v(k);
        for (auto& x : v)
            x = n(rng);
        return v;
    };
    const Eigen::VectorXd id = rv(80), ex = rv(64), did = rv(80), dex = rv(64);
    const face::Vertices s0 = face::synthesize_geometry(b, id, ex);
    const face::Vertices s1 = face::synthesize_geometry(b, id + did, ex + dex);
    const face::Vertices s2 = face::synthesize_geometry(b, id + 2 * did, ex + 2 * dex);
    const double second = (s2 - 2 * s1 + s0).cwiseAbs().maxCoeff();
    o.require(second <= 1e-6, "affine second difference");

    std::uniform_real_distribution<double> ang(-1.0, 1.0), tr(-2.0, 2.0);
    std::uniform_int_distribution<int> pick(0, b.vertex_count() - 1);
    double dist = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        face::PoseParams p;
        p.euler << ang(rng), ang(rng), ang(rng);
        p.translation << tr(rng), tr(rng), tr(rng);
        const face::Vertices q = face::apply_pose(mean, p);
        for (int k = 0; k < 200; ++k) {
            const int i = pick(rng), j = pick(rng);
            dist = std::max(dist, std::abs((q.row(i) - q.row(j)).norm() - (mean.row(i) - mean.row(j)).norm()));
        }
    }
    o.require(dist <= 1e-6, "pose keeps distances");

    face::Vertices normals(100, 3), texture(100, 3);
    for (int i = 0; i < 100; ++i) {
        normals.row(i) = rv(3).normalized().transpose();
        texture.row(i) << 0.5, 0.25, 1.0;
    }
    face::SHIllumination sh;
    sh.gamma[0] = 1.0;
    sh.gamma[9] = 2.0;
    sh.gamma[18] = 0.5;
    const auto shaded = face::shade_sh(normals, texture, sh);
    double spread = 0.0;
    for (int i = 0; i < 100; ++i)
        spread = std::max(spread, (shaded.row(i) - shaded.row(0)).cwiseAbs().maxCoeff());
    o.require(spread <= 1e-12, "DC shading constant");
    o.detail << "second difference " << second << ", distance change " << dist << ", shading spread " << spread;
}

void resampling(Outcome& o)
{
    MatrixXf r(50, 29);
    r.setRandom();
    const auto out = audio::resample_features(io::make_track(io::TrackKind::audio, 50.0, r), 30.0);
    o.require(out.frames() == 30 && out.fps == 30.0, "50 -> 30 frames");

    MatrixXf m(77, 29);
    for (int d = 0; d < 29; ++d)
        m.col(d).setConstant(0.1f * static_cast<float>(d) + 1.0f / 3.0f);
    const auto c = audio::resample_features(io::make_track(io::TrackKind::audio, 50.0, m), 30.0);
    bool bit_exact = true;
    for (int t = 0; t < c.frames(); ++t)
        bit_exact = bit_exact && std::memcmp(c.data.row(t).data(), m.row(0).data(), 29 * sizeof(float)) == 0;
    o.require(bit_exact, "constants bit-exact");

    std::mt19937_64 rng(42);
    std::uniform_int_distribution<int> len(128, 900);
    int agree = 0;
    for (int i = 0; i < 20; ++i) {
        const int frames = len(rng);
        MatrixXf a = MatrixXf::Zero(frames, 29);
        const auto track = [&](io::TrackKind k) { return io::make_track(k, 30.0, MatrixXf::Zero(frames, io::expected_dim(k))); };
        const auto w = audio::slice_windows(track(io::TrackKind::audio), track(io::TrackKind::expression),
                                            track(io::TrackKind::pose), track(io::TrackKind::blink_au), 128, 5, "c");
        const int expected = (frames - 128) / 5 + 1;
        agree += static_cast<int>(w.size()) == expected && audio::window_count(frames, 128, 5) == expected;
    }
    o.require(agree == 20, "window count formula");
    o.detail << "window counts agree on " << agree << "/20 lengths";
}

void window_chaining(Outcome& o)
{
    const int t = 16;
    gan::FacialGan m(gan_config(t, 16));
    MatrixXf audio = MatrixXf::Random(2 * t, 29);
    const Eigen::VectorXf s0 = Eigen::VectorXf::Random(71);
    const auto r = gan::infer_sequence(m, audio, s0);
    o.require(r.window_starts.size() >= 2, "two windows");
    if (r.window_starts.size() >= 2)
        o.require(r.initial_states[1] == r.window_predictions[0].row(t - 1).transpose(), "state carried over");

    const int frames = 2 * t;
    MatrixXf truth = MatrixXf::Random(frames, 71);
    MatrixXf idx(frames, 29);
    for (int i = 0; i < frames; ++i)
        idx.row(i).setConstant(static_cast<float>(i));
    auto teacher = [&](const MatrixXf& chunk, const Eigen::VectorXf&) {
        MatrixXf out(t, 71);
        for (int k = 0; k < t; ++k)
            out.row(k) = truth.row(std::min(static_cast<int>(chunk(k, 0)), frames - 1));
        return out;
    };
    const auto tf = gan::chain_windows(idx, truth.row(0).transpose(), t, teacher);
    double worst = 0.0;
    for (std::size_t w = 0; w < tf.window_starts.size(); ++w) {
        const auto p0 = nn::to_tensor(Eigen::VectorXf(tf.window_predictions[w].row(0).transpose())).unsqueeze(0);
        worst = std::max(worst, val(gan::loss_s(p0, nn::to_tensor(tf.initial_states[w]).unsqueeze(0))));
    }
    o.require(worst == 0.0, "teacher-forced L_s zero");
    o.detail << tf.window_starts.size() << " teacher-forced windows, max L_s " << worst;
}

std::vector<MatrixXf> identity_clips(int id, int clips, int frames, bool separable, std::mt19937_64& rng)
{
    std::normal_distribution<float> noise(0.0f, 0.2f);
    std::uniform_real_distribution<float> phase(0.0f, 6.2831853f);
    std::vector<MatrixXf> out;
    for (int c = 0; c < clips; ++c) {
        MatrixXf m(frames, 6);
        const float freq = separable ? 0.05f + 0.08f * static_cast<float>(id) : 0.1f;
        const float ph = phase(rng);
        const float offset = separable ? 1.5f * static_cast<float>(id) : 0.0f;
        for (int t = 0; t < frames; ++t)
            for (int d = 0; d < 6; ++d)
                m(t, d) = (d == 1 ? std::sin(freq * static_cast<float>(t) + ph) + offset : 0.0f) + noise(rng);
        out.push_back(m);
    }
    return out;
}

void metrics_checks(Outcome& o)
{
    std::vector<int> onsets;
    std::vector<float> au(600, 0.0f);
    for (int k = 0; k < 10; ++k) {
        onsets.push_back(15 + 60 * k);
        for (int j = 0; j < 6; ++j)
            au[static_cast<std::size_t>(15 + 60 * k + j)] = 1.0f;
    }
    const auto ev = metrics::detect_blinks(au, 30.0);
    bool exact = ev.size() == 10;
    for (std::size_t k = 0; exact && k < ev.size(); ++k)
        exact = ev[k].onset_frame == onsets[k] && ev[k].offset_frame == onsets[k] + 5;
    const auto st = metrics::blink_stats(ev, 20.0);
    o.require(exact && st.rate == 0.5, "blink train recovered");

    metrics::LandmarkTrack a{10, 8, {}};
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 80; ++i)
        a.xy.emplace_back(n(rng), n(rng));
    auto b = a;
    for (auto& p : b.xy)
        p += Eigen::Vector2d(3.0, 4.0);
    const double d = metrics::lmd(a, b);
    o.require(std::abs(d - 5.0) <= 1e-12 && metrics::lmd(a, a) == 0.0, "LMD displacement");

    std::mt19937_64 prng(21);
    std::vector<std::vector<MatrixXf>> distinct;
    for (int id = 0; id < 3; ++id)
        distinct.push_back(identity_clips(id, 4, 256, true, prng));
    const auto sep = metrics::personalization_score(distinct, metrics::PersonalAttribute::pose, 2);
    o.require(sep.accuracy >= 0.95, "separable >= 0.95");

    std::mt19937_64 irng(22);
    std::vector<std::vector<MatrixXf>> same;
    for (int id = 0; id < 4; ++id)
        same.push_back(identity_clips(id, 8, 256, false, irng));
    metrics::PersonalizationOptions po;
    po.stride = po.window;
    const auto iden = metrics::personalization_score(same, metrics::PersonalAttribute::pose, 2, po);
    const double sigma = std::sqrt(iden.chance * (1.0 - iden.chance) / iden.n_test_windows);
    o.require(std::abs(iden.accuracy - iden.chance) <= 3.0 * sigma, "identical at chance");
    o.detail << ev.size() << " blinks, rate " << st.rate << ", LMD " << d << ", personalization " << sep.accuracy
             << " separable, " << iden.accuracy << " identical (chance " << iden.chance << ")";
}

// Training also leaves logs beside the checkpoint; compare what save writes.
bool same_checkpoint(const std::filesystem::path& a, const std::filesystem::path& b)
{
    return nn::content_digest(a / "manifest.json") == nn::content_digest(b / "manifest.json")
           && nn::content_digest(a / "params") == nn::content_digest(b / "params");
}

void determinism(Outcome& o)
{
    testing::TempDir root;
    const auto config = testing::build_mini_pipeline(root.path());
    pipeline::SynthesizeOptions s;
    s.audio = root / "prep" / "clip_001" / "audio.facl";
    s.clip_id = "clip_000";
    s.export_attention = true;
    s.out = root / "run_a";
    pipeline::cmd_synthesize(config, s);
    s.out = root / "run_b";
    pipeline::cmd_synthesize(config, s);
    const auto da = nn::content_digest(root / "run_a"), db = nn::content_digest(root / "run_b");
    o.require(da == db, "synthesize bit-identical");

    const auto g = gan::load_checkpoint(config.paths.general);
    gan::save_checkpoint(g, root / "gan_copy");
    o.require(same_checkpoint(config.paths.general, root / "gan_copy"), "gan checkpoint");
    const auto r = render::load_render_checkpoint(config.paths.render);
    render::save_render_checkpoint(r, root / "render_copy");
    o.require(same_checkpoint(config.paths.render, root / "render_copy"), "render checkpoint");
    o.detail << "output digest " << da.substr(0, 16);
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria{
        {"loss oracles", loss_oracles},
        {"gradient suite", gradient_suite},
        {"motion invariance", motion_invariance},
        {"overfit", overfit},
        {"eye mask", eye_mask},
        {"3DMM", face_model},
        {"resampling and windows", resampling},
        {"window chaining", window_chaining},
        {"metrics", metrics_checks},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail.str() << std::endl;
    }
    return failures == 0 ? 0 : 1;
}
