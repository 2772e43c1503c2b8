#pragma once

#include "facial/eye/attention.hpp"
#include "facial/face/basis.hpp"
#include "facial/face/model.hpp"
#include "facial/face/raster.hpp"
#include "facial/io/manifest.hpp"
#include "facial/metrics/metrics.hpp"
#include "facial/render/render_net.hpp"

#include <Eigen/Core>

#include <vector>

namespace facial::pipeline {

/// Per-clip constants of the face: shape, albedo and lighting.
struct Appearance {
    Eigen::VectorXd identity;
    Eigen::VectorXd texture;
    face::SHIllumination illumination;
};

/// Takes the first row of the clip's identity / texture / illumination
/// tracks. Missing tracks give zero coefficients and white ambient light.
Appearance clip_appearance(const io::ClipTracks& clip, const face::FaceBasis& basis);

struct FrameRenderer {
    FrameRenderer(const face::FaceBasis& basis, const Appearance& appearance, double eye_threshold, double au_max,
                  int resolution);

    struct Output {
        render::RenderFrame frame;
        std::vector<Eigen::Vector2d> mouth, left_eye, right_eye; // model-unit x-y
        face::VisibilityBuffer visibility;
    };

    /// attributes: one 71-entry row (expression, pose, raw AU45).
    Output render(const float* attributes) const;

    const face::FaceBasis& basis;
    Appearance appearance;
    eye::EyeRegion region;
    std::vector<int> eye_tris;
    face::Vertices texture;
    double au_max;
    int resolution;
    face::OrthoCamera camera;
};

/// Landmarks of every frame, mouth first then both eyes.
struct LandmarkSet {
    metrics::LandmarkTrack mouth;
    metrics::LandmarkTrack left_eye;
    metrics::LandmarkTrack right_eye;
};

/// Stand-in for camera footage of a synthetic clip: the render after a
/// display gamma, with a background gradient and eyes darkened by the
/// attention map.
face::Image photo_transform(const render::RenderFrame& frame, const face::VisibilityBuffer& visibility);

} // namespace facial::pipeline
