#include "support/mini_pipeline.hpp"
#include "support/temp_dir.hpp"

#include "facial/common/error.hpp"
#include "facial/nn/checkpoint.hpp"
#include "facial/pipeline/commands.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

using namespace facial;
using namespace facial::pipeline;
namespace fs = std::filesystem;
using facial::testing::TempDir;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::io;
}

// Shared workspace, built on first use.
struct Workspace {
    TempDir dir;
    PipelineConfig config;
    Workspace() : config(facial::testing::build_mini_pipeline(dir.path())) {}
};

Workspace& workspace()
{
    static Workspace w;
    return w;
}

struct Run {
    int status;
    std::string err;
};

Run run_cli(const std::string& args, const fs::path& scratch)
{
    const auto err = scratch / "stderr.txt";
    const std::string cmd = std::string(FACIAL_CLI) + " " + args + " >/dev/null 2>" + err.string();
    const int raw = std::system(cmd.c_str());
    std::ifstream in(err);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, text};
}

} // namespace

TEST_CASE("config defaults carry the published hyperparameters")
{
    const PipelineConfig c;
    CHECK(c.facial_gan.window == 128);
    CHECK(c.facial_gan.weights.expression == 2.0);
    CHECK(c.render.lambda_l1 == 50.0);
    CHECK(c.audio.target_fps == 30.0);
    CHECK(c.eye.au_max == 5.0);
}

TEST_CASE("config JSON round trip")
{
    PipelineConfig c;
    c.seed = 99;
    c.facial_gan.d_z = 7;
    c.render.n_w = 3;
    c.eye.threshold = 0.01;
    c.metrics.k_fold = 4;
    c.paths.basis = "b";
    const auto j = to_json(c);
    CHECK(to_json(pipeline_config_from_json(j)) == j);
    CHECK_FALSE(j["facial_gan"].contains("seed"));
}

TEST_CASE("config rejects unknown keys, module seeds and bad values")
{
    CHECK(kind_of([] { pipeline_config_from_json({{"sed", 1}}); }) == ErrorKind::config);
    CHECK(kind_of([] { pipeline_config_from_json({{"facial_gan", {{"seed", 1}}}}); }) == ErrorKind::config);
    CHECK(kind_of([] { pipeline_config_from_json({{"render", {{"seed", 1}}}}); }) == ErrorKind::config);
    CHECK(kind_of([] { pipeline_config_from_json({{"eye", {{"threshold", -1.0}}}}); }) == ErrorKind::config);
    CHECK(kind_of([] { pipeline_config_from_json({{"metrics", {{"blink_hi", 0.2}, {"blink_lo", 0.3}}}}); })
          == ErrorKind::config);
}

TEST_CASE("overrides parse JSON values and fall back to strings")
{
    const auto doc = apply_overrides(nlohmann::json::object(),
                                     {"facial_gan.d_z=12", "paths.basis=some/dir", "render.least_squares=true",
                                      "seed=5"});
    CHECK(doc["facial_gan"]["d_z"] == 12);
    CHECK(doc["paths"]["basis"] == "some/dir");
    CHECK(doc["render"]["least_squares"] == true);
    const auto c = pipeline_config_from_json(doc);
    CHECK(c.seed == 5);
    CHECK(c.facial_gan.d_z == 12);
    CHECK(kind_of([] { apply_overrides({}, {"no_equals_sign"}); }) == ErrorKind::config);
}

TEST_CASE("module seeds fan out from the top-level seed")
{
    PipelineConfig c;
    c.seed = 42;
    CHECK(c.facial_gan_config().seed == module_seed(42, 0));
    CHECK(c.render_config().seed == module_seed(42, 1));
    CHECK(module_seed(42, 0) != module_seed(42, 1));
    CHECK(module_seed(42, 0) != module_seed(43, 0));
    CHECK(module_seed(42, 3) == module_seed(42, 3));
}

TEST_CASE("stage names")
{
    CHECK(stage_from_string("general") == Stage::general);
    CHECK(stage_from_string("render") == Stage::render);
    CHECK_THROWS_AS(stage_from_string("all"), Error);
}

TEST_CASE("fine-tuning before general training is a stage-order error")
{
    TempDir d;
    auto c = facial::testing::mini_config(d.path());
    c.paths.general = (d / "missing").string();
    c.paths.manifest = workspace().config.paths.manifest;
    CHECK(kind_of([&] { cmd_train(c, Stage::finetune, d / "ft"); }) == ErrorKind::stage_order);
}

TEST_CASE("prepare is idempotent")
{
    auto& w = workspace();
    TempDir d;
    cmd_prepare(w.config, w.dir / "data" / "manifest.json", d / "a");
    cmd_prepare(w.config, w.dir / "data" / "manifest.json", d / "b");
    for (const char* track : {"audio.facl", "expression.facl", "pose.facl", "blink_au.facl"})
        CHECK(nn::content_digest(d / "a" / "clip_000" / track) == nn::content_digest(d / "b" / "clip_000" / track));
    CHECK(nn::content_digest(d / "a" / "clip_001") == nn::content_digest(w.dir / "prep" / "clip_001"));
}

TEST_CASE("synthesize is deterministic and records its provenance")
{
    auto& w = workspace();
    TempDir d;
    SynthesizeOptions o;
    o.audio = w.dir / "prep" / "clip_001" / "audio.facl";
    o.clip_id = "clip_000";
    o.export_attention = true;
    o.out = d / "one";
    const int frames = cmd_synthesize(w.config, o);
    o.out = d / "two";
    CHECK(cmd_synthesize(w.config, o) == frames);
    CHECK(frames == io::read_track(o.audio).frames());
    CHECK(nn::content_digest(d / "one") == nn::content_digest(d / "two"));

    for (const char* f : {"expression.facl", "pose.facl", "blink_au.facl", "attention.facl", "landmarks.facl",
                          "landmarks.json", "provenance.json", "frames/frames.json", "frames/rgb_00000.png"})
        CHECK_MESSAGE(fs::exists(d / "one" / f), f);
    const auto prov = nn::read_json(d / "one" / "provenance.json");
    CHECK(prov.at("source") == "inference");
    CHECK(prov.at("seed") == w.config.seed);
    CHECK(prov.at("inputs").contains("facial_gan"));
    CHECK(prov.at("frames") == frames);

    const auto lm = read_landmarks(d / "one");
    CHECK(lm.mouth.frames == frames);
    CHECK(lm.left_eye.points == lm.right_eye.points);
}

TEST_CASE("translation needs a render checkpoint")
{
    auto& w = workspace();
    TempDir d;
    auto c = w.config;
    c.paths.render = (d / "nothing").string();
    SynthesizeOptions o;
    o.audio = w.dir / "prep" / "clip_000" / "audio.facl";
    o.out = d / "out";
    CHECK(kind_of([&] { cmd_synthesize(c, o); }) == ErrorKind::stage_order);
    o.translate = false;
    CHECK(cmd_synthesize(c, o) > 0);
}

TEST_CASE("evaluate reports every metric key")
{
    auto& w = workspace();
    TempDir d;
    SynthesizeOptions o;
    o.audio = w.dir / "prep" / "clip_000" / "audio.facl";
    o.clip_id = "clip_000";
    o.ground_truth = true;
    o.translate = false;
    o.out = d / "gt";
    cmd_synthesize(w.config, o);

    std::ofstream(d / "ext.json") << R"({"cpbd": 0.3, "av_offset": 1})";
    const auto r = cmd_evaluate(w.config, d / "gt", d / "gt", d / "report.json", d / "ext.json");
    for (const char* key : {"lmd", "blink", "reference_blink", "cpbd", "av_offset", "av_confidence", "personalization"})
        CHECK_MESSAGE(r.contains(key), key);
    CHECK(r["lmd"] == 0.0);
    CHECK(r["cpbd"] == 0.3);
    CHECK(r["av_confidence"].is_null());
    CHECK(r["blink"]["rate_per_s"].is_number());
    CHECK(fs::exists(d / "report.json"));
    CHECK(fs::exists(d / "report.blink_histogram.csv"));
}

TEST_CASE("landmark files round trip")
{
    TempDir d;
    LandmarkSet s;
    auto fill = [](metrics::LandmarkTrack& t, int points, double base) {
        t.frames = 3;
        t.points = points;
        for (int i = 0; i < 3 * points; ++i)
            t.xy.emplace_back(base + i, -base - 0.5 * i);
    };
    fill(s.mouth, 8, 0.25);
    fill(s.left_eye, 4, 1.0);
    fill(s.right_eye, 4, 2.0);
    write_landmarks(d.path(), s, 30.0);
    const auto r = read_landmarks(d.path());
    CHECK(r.mouth.points == 8);
    CHECK(metrics::lmd(r.mouth, s.mouth) <= 1e-6);
    CHECK(metrics::lmd(r.right_eye, s.right_eye) <= 1e-6);
}

TEST_CASE("CLI exit codes")
{
    TempDir d;
    std::ofstream(d / "bad.json") << R"({"facial_gan": {"not_a_key": 1}})";
    SUBCASE("show-config succeeds")
    {
        CHECK(run_cli("show-config", d.path()).status == 0);
    }
    SUBCASE("unknown config key")
    {
        const auto r = run_cli("--config " + (d / "bad.json").string() + " show-config", d.path());
        CHECK(r.status == 2);
        CHECK(r.err.find("error[config]") != std::string::npos);
    }
    SUBCASE("fine-tuning without a general checkpoint")
    {
        const auto r = run_cli("--set paths.manifest=" + workspace().config.paths.manifest
                                   + " train --stage finetune --out " + (d / "ft").string(),
                               d.path());
        CHECK(r.status == 2);
        CHECK(r.err.find("error[stage_order]") != std::string::npos);
    }
    SUBCASE("missing subcommand is a usage error")
    {
        CHECK(run_cli("", d.path()).status != 0);
    }
}
