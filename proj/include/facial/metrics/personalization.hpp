#pragma once

#include "facial/io/track.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace facial::metrics {

enum class PersonalAttribute { pose, blink };

std::string to_string(PersonalAttribute a);
PersonalAttribute personal_attribute_from_string(const std::string& s);

struct PersonalizationOptions {
    int window = 64;
    int stride = 32;
    int hidden = 16;
    int kernel = 5;
    int epochs = 200;
    double learning_rate = 1e-2;
    std::uint64_t seed = 0;
};

struct PersonalizationResult {
    double accuracy = 0.0;
    int n_identities = 0;
    PersonalAttribute attribute = PersonalAttribute::pose;
    int n_test_windows = 0; // summed over folds
    double chance = 0.0;    // 1 / n_identities
};

/// tracks[i][c] is clip c of identity i, frames x dim (6 for pose, 1 for
/// blink). Clip c belongs to fold c % k_fold; every fold trains a temporal
/// conv classifier on the other folds' windows and scores its own.
PersonalizationResult personalization_score(const std::vector<std::vector<MatrixXf>>& tracks,
                                            PersonalAttribute attribute, int k_fold,
                                            const PersonalizationOptions& options = {});

} // namespace facial::metrics
