#include "support/gradcheck.hpp"

#include "facial/gan/facial_gan.hpp"
#include "facial/render/render_net.hpp"

#include <doctest.h>

using namespace facial;
using facial::testing::check_gradients;

namespace {

constexpr double kTolerance = 1e-4;

std::int64_t count_parameters(const torch::nn::Module& m)
{
    std::int64_t n = 0;
    for (const auto& p : m.parameters())
        n += p.numel();
    return n;
}

void expect_ok(const facial::testing::GradCheckResult& r, const char* what)
{
    MESSAGE(std::string(what) << ": " << r.checked << " entries, max relative error " << r.max_relative_error
                               << " (raw " << r.max_relative_error_raw << ", " << r.kinks << " kinks)");
    INFO(r.worst);
    CHECK(r.checked > 0);
    CHECK(r.max_relative_error <= kTolerance);
    CHECK(r.kinks * 100 <= r.checked); // kink crossings must stay rare
}

torch::Tensor leaf(torch::Tensor t)
{
    return t.to(torch::kDouble).set_requires_grad(true);
}

gan::FacialGanConfig tiny_gan()
{
    gan::FacialGanConfig c;
    c.window = 6;
    c.d_z = 4;
    c.temporal_hidden = 4;
    c.temporal_layers = 2;
    c.d_c = 4;
    c.local_hidden = 4;
    c.disc_hidden = 4;
    c.seed = 3;
    return c;
}

render::RenderNetConfig tiny_render()
{
    render::RenderNetConfig c;
    c.n_w = 1;
    c.resolution = 8;
    c.generator_base = 2;
    c.residual_blocks = 1;
    c.discriminator_base = 2;
    c.scales = 2;
    c.seed = 4;
    return c;
}

} // namespace

TEST_CASE("attribute losses")
{
    torch::manual_seed(10);
    auto pred = leaf(torch::randn({2, 5, 71}));
    const auto target = torch::randn({2, 5, 71}, torch::kDouble);
    const auto s = torch::randn({2, 71}, torch::kDouble);

    expect_ok(check_gradients([&] { return gan::loss_s(pred.select(1, 0), s); }, {pred}), "L_s");
    expect_ok(check_gradients([&] { return gan::motion_term(pred, target); }, {pred}), "U");
    expect_ok(check_gradients([&] { return gan::sequence_loss(pred, target, 10.0); }, {pred}), "sequence");
    expect_ok(check_gradients([&] { return gan::loss_attr(pred, target, 10.0).pose; }, {pred}), "L_pose");
    expect_ok(check_gradients([&] { return gan::loss_reg(pred, target, s, gan::LossWeights{}).total; }, {pred}),
              "L_Reg");
}

TEST_CASE("adversarial attribute losses")
{
    auto real = leaf(torch::tensor({0.8, 0.3, 0.6}));
    auto fake = leaf(torch::tensor({0.2, 0.7, 0.45}));
    expect_ok(check_gradients([&] { return gan::loss_fgan(real, fake).generator; }, {fake}), "F-GAN generator");
    expect_ok(check_gradients([&] { return gan::loss_fgan(real, fake).discriminator; }, {real, fake}),
              "F-GAN discriminator");
}

TEST_CASE("full FACIAL-GAN objective through the networks")
{
    gan::FacialGan m(tiny_gan());
    m.generator->to(torch::kDouble);
    m.discriminator->to(torch::kDouble);
    const auto g_params = count_parameters(*m.generator), d_params = count_parameters(*m.discriminator);
    MESSAGE("generator " << g_params << " discriminator " << d_params << " parameters");
    REQUIRE(g_params <= 5000);
    REQUIRE(d_params <= 5000);

    torch::manual_seed(11);
    const auto audio = torch::randn({2, 6, 29}, torch::kDouble);
    const auto target = torch::randn({2, 6, 71}, torch::kDouble);
    const auto s = target.select(1, 0).clone();
    auto objective = [&] {
        auto pred = m.generator->forward(audio, s);
        auto reg = gan::loss_reg(pred, target, s, m.config.weights);
        return gan::loss_facial_total(reg, m.discriminator->forward(pred), m.config.weights).total;
    };
    // L_facial is in the thousands here; dividing by a constant keeps its
    // float64 rounding noise well below the finite-difference signal.
    const double scale = objective().item<double>();
    MESSAGE("L_facial " << scale);
    expect_ok(check_gradients([&] { return objective() / scale; }, m.generator->parameters()), "L_facial wrt G^f");

    auto disc = [&] {
        torch::Tensor fake;
        {
            torch::NoGradGuard ng;
            fake = m.generator->forward(audio, s);
        }
        return gan::loss_fgan(m.discriminator->forward(target), m.discriminator->forward(fake)).discriminator;
    };
    expect_ok(check_gradients(disc, m.discriminator->parameters()), "L_F-GAN wrt D^f");
}

TEST_CASE("render loss components")
{
    torch::manual_seed(12);
    auto a = leaf(torch::rand({1, 3, 8, 8}));
    const auto b = torch::rand({1, 3, 8, 8}, torch::kDouble);
    render::RandomConvExtractor vgg(2);
    expect_ok(check_gradients([&] { return render::perceptual_loss(vgg, a, b); }, {a}), "L_VGG");
    expect_ok(check_gradients([&] { return (a - b).abs().mean(); }, {a}), "L_1");

    auto logits = leaf(torch::randn({1, 1, 3, 3}));
    const auto other = torch::randn({1, 1, 3, 3}, torch::kDouble);
    for (bool ls : {false, true}) {
        expect_ok(check_gradients([&] { return render::generator_adversarial(logits, ls); }, {logits}),
                  ls ? "LSGAN generator" : "GAN generator");
        expect_ok(check_gradients([&] { return render::discriminator_adversarial(logits, other, ls); }, {logits}),
                  ls ? "LSGAN discriminator" : "GAN discriminator");
    }
}

TEST_CASE("full rendering objective through the networks")
{
    const auto cfg = tiny_render();
    render::RenderNet net(cfg);
    net.generator->to(torch::kDouble);
    net.discriminator->to(torch::kDouble);
    const auto g_params = count_parameters(*net.generator), d_params = count_parameters(*net.discriminator);
    MESSAGE("generator " << g_params << " discriminator " << d_params << " parameters");
    REQUIRE(g_params <= 5000);
    REQUIRE(d_params <= 5000);

    render::RandomConvExtractor vgg(5);
    torch::manual_seed(13);
    const auto x = torch::rand({1, cfg.input_channels(), 8, 8}, torch::kDouble);
    const auto real = torch::rand({1, 3, 8, 8}, torch::kDouble);
    auto objective = [&] {
        return render::loss_render(net.generator->forward(x), real, x, net.discriminator, vgg, cfg).total;
    };
    expect_ok(check_gradients(objective, net.generator->parameters()), "L_render wrt G^r");

    auto disc = [&] {
        torch::Tensor fake;
        {
            torch::NoGradGuard ng;
            fake = net.generator->forward(x);
        }
        return render::render_discriminator_loss(fake, real, x, net.discriminator, false);
    };
    expect_ok(check_gradients(disc, net.discriminator->parameters()), "L_R-GAN wrt D^r");
}
