#include "facial/gan/config.hpp"

#include "facial/common/error.hpp"

namespace facial::gan {

nlohmann::json to_json(const FacialGanConfig& c)
{
    return {
        {"window", c.window},
        {"stride", c.stride},
        {"d_z", c.d_z},
        {"temporal_hidden", c.temporal_hidden},
        {"temporal_layers", c.temporal_layers},
        {"temporal_kernel", c.temporal_kernel},
        {"d_c", c.d_c},
        {"local_hidden", c.local_hidden},
        {"disc_hidden", c.disc_hidden},
        {"w1", c.weights.expression},
        {"w2", c.weights.pose},
        {"w3", c.weights.eye},
        {"w4", c.weights.initial_state},
        {"w5", c.weights.motion},
        {"w6", c.weights.adversarial},
        {"learning_rate", c.learning_rate},
        {"beta1", c.beta1},
        {"beta2", c.beta2},
        {"general_epochs", c.general_epochs},
        {"general_batch", c.general_batch},
        {"finetune_epochs", c.finetune_epochs},
        {"finetune_batch", c.finetune_batch},
        {"max_steps", c.max_steps},
        {"seed", c.seed},
    };
}

FacialGanConfig facial_gan_config_from_json(const nlohmann::json& doc)
{
    FacialGanConfig c;
    const nlohmann::json defaults = to_json(c);
    for (const auto& [key, value] : doc.items())
        if (!defaults.contains(key))
            throw Error(ErrorKind::config, "unknown facial_gan key '" + key + "'");
    auto get = [&](const char* key, auto& field) {
        if (doc.contains(key))
            field = doc.at(key).get<std::decay_t<decltype(field)>>();
    };
    try {
        get("window", c.window);
        get("stride", c.stride);
        get("d_z", c.d_z);
        get("temporal_hidden", c.temporal_hidden);
        get("temporal_layers", c.temporal_layers);
        get("temporal_kernel", c.temporal_kernel);
        get("d_c", c.d_c);
        get("local_hidden", c.local_hidden);
        get("disc_hidden", c.disc_hidden);
        get("w1", c.weights.expression);
        get("w2", c.weights.pose);
        get("w3", c.weights.eye);
        get("w4", c.weights.initial_state);
        get("w5", c.weights.motion);
        get("w6", c.weights.adversarial);
        get("learning_rate", c.learning_rate);
        get("beta1", c.beta1);
        get("beta2", c.beta2);
        get("general_epochs", c.general_epochs);
        get("general_batch", c.general_batch);
        get("finetune_epochs", c.finetune_epochs);
        get("finetune_batch", c.finetune_batch);
        get("max_steps", c.max_steps);
        get("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::config, std::string("bad facial_gan config value: ") + e.what());
    }
    if (c.window < 2 || c.stride < 1 || c.d_z < 1 || c.d_c < 1 || c.temporal_layers < 1
        || c.temporal_kernel < 1 || c.temporal_kernel % 2 == 0)
        throw Error(ErrorKind::config, "facial_gan config out of range");
    return c;
}

} // namespace facial::gan
