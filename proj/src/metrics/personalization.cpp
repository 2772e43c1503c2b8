#include "facial/metrics/personalization.hpp"

#include "facial/common/error.hpp"
#include "facial/nn/tensor.hpp"

#include <torch/torch.h>

namespace facial::metrics {

std::string to_string(PersonalAttribute a)
{
    return a == PersonalAttribute::pose ? "pose" : "blink";
}

PersonalAttribute personal_attribute_from_string(const std::string& s)
{
    if (s == "pose")
        return PersonalAttribute::pose;
    if (s == "blink")
        return PersonalAttribute::blink;
    throw Error(ErrorKind::invalid_argument, "unknown personalization attribute '" + s + "'");
}

namespace {

struct ClassifierImpl : torch::nn::Module {
    ClassifierImpl(int dim, int hidden, int kernel, int classes)
        : conv(register_module("conv", torch::nn::Conv1d(torch::nn::Conv1dOptions(dim, hidden, kernel)
                                                             .padding(kernel / 2)))),
          head(register_module("head", torch::nn::Linear(hidden, classes)))
    {}
    // x: [B, T, dim] -> logits [B, classes]
    torch::Tensor forward(const torch::Tensor& x)
    {
        return head(torch::relu(conv(x.transpose(1, 2))).mean(2));
    }
    torch::nn::Conv1d conv;
    torch::nn::Linear head;
};
TORCH_MODULE(Classifier);

struct Windows {
    std::vector<torch::Tensor> x;
    std::vector<std::int64_t> y;
};

void append_windows(Windows& w, const MatrixXf& clip, std::int64_t label, int window, int stride)
{
    const auto t = nn::to_tensor(clip);
    for (int start = 0; start + window <= clip.rows(); start += stride) {
        w.x.push_back(t.slice(0, start, start + window));
        w.y.push_back(label);
    }
}

} // namespace

PersonalizationResult personalization_score(const std::vector<std::vector<MatrixXf>>& tracks,
                                            PersonalAttribute attribute, int k_fold,
                                            const PersonalizationOptions& o)
{
    const int n = static_cast<int>(tracks.size());
    if (n < 2)
        throw Error(ErrorKind::invalid_argument, "personalization needs at least two identities");
    if (k_fold < 2)
        throw Error(ErrorKind::invalid_argument, "k_fold must be at least 2");
    if (o.window < 1 || o.stride < 1)
        throw Error(ErrorKind::invalid_argument, "window and stride must be positive");
    const int dim = attribute == PersonalAttribute::pose ? io::kPoseDim : io::kBlinkDim;
    for (const auto& clips : tracks) {
        if (clips.size() < 2)
            throw Error(ErrorKind::invalid_argument, "personalization needs at least two clips per identity");
        for (const auto& c : clips)
            if (c.cols() != dim)
                throw Error(ErrorKind::dim_mismatch, "track width does not match the attribute");
    }

    nn::use_deterministic_runtime();
    PersonalizationResult result;
    result.n_identities = n;
    result.attribute = attribute;
    result.chance = 1.0 / n;
    std::int64_t correct = 0, total = 0;

    for (int fold = 0; fold < k_fold; ++fold) {
        Windows train, test;
        for (int id = 0; id < n; ++id)
            for (std::size_t c = 0; c < tracks[id].size(); ++c)
                append_windows(static_cast<int>(c) % k_fold == fold ? test : train, tracks[id][c], id, o.window,
                               o.stride);
        if (test.x.empty())
            continue;
        if (train.x.empty())
            throw Error(ErrorKind::invalid_argument, "a fold has no training windows; clips are too short");

        auto x = torch::stack(train.x);
        auto y = torch::tensor(train.y, torch::kInt64);
        // Per-channel standardization with training statistics only.
        auto mean = x.mean({0, 1}, true);
        auto std = x.std({0, 1}, /*unbiased=*/false, true).clamp_min(1e-6);
        x = (x - mean) / std;
        auto xt = (torch::stack(test.x) - mean) / std;

        torch::manual_seed(o.seed * 7919ull + static_cast<std::uint64_t>(fold));
        Classifier model(dim, o.hidden, o.kernel, n);
        torch::optim::Adam opt(model->parameters(), torch::optim::AdamOptions(o.learning_rate));
        for (int e = 0; e < o.epochs; ++e) {
            auto loss = torch::nn::functional::cross_entropy(model->forward(x), y);
            opt.zero_grad();
            loss.backward();
            opt.step();
        }
        torch::NoGradGuard no_grad;
        auto pred = model->forward(xt).argmax(1);
        correct += pred.eq(torch::tensor(test.y, torch::kInt64)).sum().item<std::int64_t>();
        total += static_cast<std::int64_t>(test.y.size());
    }
    if (total == 0)
        throw Error(ErrorKind::invalid_argument, "clips are shorter than the classifier window");
    result.n_test_windows = static_cast<int>(total);
    result.accuracy = static_cast<double>(correct) / static_cast<double>(total);
    return result;
}

} // namespace facial::metrics
