// facial_cli: command-line front end for the talking-face pipeline.

#include "facial/common/error.hpp"
#include "facial/pipeline/commands.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace fs = std::filesystem;
using namespace facial;

int main(int argc, char** argv)
{
    CLI::App app{"Audio-driven talking-face pipeline"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string out;
    app.add_option("--config", config_path, "pipeline config JSON")->check(CLI::ExistingFile);
    app.add_option("--set", overrides, "override a config key, e.g. --set facial_gan.w1=2")->allow_extra_args(false);
    app.add_option("--seed", seed, "top-level seed");
    app.add_option("--out", out, "output directory (or report file for evaluate)");

    auto* gen_data = app.add_subcommand("generate-data", "write a synthetic audio/attribute dataset");
    int clips = 4, frames = 256;
    std::string basis_dir;
    gen_data->add_option("--clips", clips);
    gen_data->add_option("--frames", frames);
    gen_data->add_option("--basis", basis_dir, "also render target videos with this face basis");

    auto* gen_basis = app.add_subcommand("generate-basis", "write a synthetic face basis");
    int grid = 64;
    gen_basis->add_option("--grid", grid, "mesh vertices per side");

    auto* prepare = app.add_subcommand("prepare", "resample tracks and write a normalized manifest");
    std::string manifest_in;
    prepare->add_option("manifest", manifest_in)->required()->check(CLI::ExistingFile);

    auto* train = app.add_subcommand("train", "train one stage");
    std::string stage = "general", clip_id;
    train->add_option("--stage", stage)->check(CLI::IsMember({"general", "finetune", "render"}));
    train->add_option("--clip", clip_id, "clip used by the finetune and render stages");

    auto* synth = app.add_subcommand("synthesize", "generate attributes, renders and video frames");
    pipeline::SynthesizeOptions sopt;
    std::string attributes_dir;
    bool raw = false;
    synth->add_option("--audio", sopt.audio, "audio feature track");
    synth->add_option("--clip", sopt.clip_id, "reference clip (identity, texture, lighting)");
    synth->add_option("--attributes", attributes_dir, "skip inference and use these attribute tracks");
    synth->add_flag("--ground-truth", sopt.ground_truth, "use the reference clip's own attributes");
    synth->add_flag("--export-attention", sopt.export_attention, "also write the eye attention maps");
    synth->add_flag("--raw-render", raw, "write the 3D renders without the translation network");

    auto* evaluate = app.add_subcommand("evaluate", "compare a synthesis against a reference");
    std::string pred_dir, ref_dir, external;
    evaluate->add_option("pred", pred_dir)->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("ref", ref_dir)->required()->check(CLI::ExistingDirectory);
    evaluate->add_option("--external", external, "JSON with cpbd / av_offset / av_confidence")
        ->check(CLI::ExistingFile);

    auto* personalize = app.add_subcommand("personalize", "N-way identity classification on attribute tracks");
    std::vector<std::string> manifests;
    std::string attribute = "pose";
    personalize->add_option("manifests", manifests, "one dataset manifest per identity")->required();
    personalize->add_option("--attribute", attribute)->check(CLI::IsMember({"pose", "blink"}));

    auto* show = app.add_subcommand("show-config", "print the effective configuration");

    CLI11_PARSE(app, argc, argv);

    try {
        if (seed)
            overrides.push_back("seed=" + std::to_string(*seed));
        const auto config = pipeline::load_pipeline_config(config_path, overrides);
        auto need_out = [&]() -> fs::path {
            if (out.empty())
                throw Error(ErrorKind::invalid_argument, "--out is required");
            return out;
        };

        if (*show) {
            std::cout << pipeline::to_json(config).dump(2) << '\n';
        } else if (*gen_data) {
            std::optional<fs::path> basis;
            if (!basis_dir.empty())
                basis = basis_dir;
            const auto m = pipeline::cmd_generate_data(config, need_out(), clips, frames, basis);
            std::cout << "wrote " << m.clips.size() << " clips to " << out << '\n';
        } else if (*gen_basis) {
            pipeline::cmd_generate_basis(config, need_out(), grid);
            std::cout << "wrote basis to " << out << '\n';
        } else if (*prepare) {
            const auto m = pipeline::cmd_prepare(config, manifest_in, need_out());
            for (const auto& c : m.clips)
                std::cout << c.clip_id << ' ' << c.frame_count << '\n';
        } else if (*train) {
            pipeline::cmd_train(config, pipeline::stage_from_string(stage), need_out(), clip_id);
            std::cout << "wrote " << stage << " checkpoint to " << out << '\n';
        } else if (*synth) {
            sopt.out = need_out();
            sopt.translate = !raw;
            if (!attributes_dir.empty())
                sopt.attributes = fs::path(attributes_dir);
            const int n = pipeline::cmd_synthesize(config, sopt);
            std::cout << "wrote " << n << " frames to " << out << '\n';
        } else if (*evaluate) {
            std::optional<fs::path> ext;
            if (!external.empty())
                ext = external;
            const auto report = pipeline::cmd_evaluate(config, pred_dir, ref_dir, need_out(), ext);
            std::cout << report.dump(2) << '\n';
        } else if (*personalize) {
            std::vector<fs::path> paths(manifests.begin(), manifests.end());
            const auto r = pipeline::cmd_personalize(config, paths,
                                                     metrics::personal_attribute_from_string(attribute));
            std::cout << nlohmann::json{{"attribute", metrics::to_string(r.attribute)},
                                        {"accuracy", r.accuracy},
                                        {"chance", r.chance},
                                        {"n_identities", r.n_identities},
                                        {"n_test_windows", r.n_test_windows}}
                             .dump(2)
                      << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error[" << to_string(e.kind()) << "]: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error[internal]: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
