#include "facial/pipeline/frames.hpp"

#include "facial/common/error.hpp"

#include <cmath>

namespace facial::pipeline {

namespace {

Eigen::VectorXd first_row(const std::optional<io::FeatureTrack>& track, int dims)
{
    if (!track || track->frames() == 0)
        return Eigen::VectorXd::Zero(dims);
    return track->data.row(0).transpose().cast<double>().head(std::min<int>(dims, track->dim()));
}

} // namespace

Appearance clip_appearance(const io::ClipTracks& clip, const face::FaceBasis& basis)
{
    Appearance a;
    a.identity = first_row(clip.identity, static_cast<int>(basis.id_basis.cols()));
    a.texture = first_row(clip.texture, static_cast<int>(basis.tex_basis.cols()));
    if (a.identity.size() != basis.id_basis.cols() || a.texture.size() != basis.tex_basis.cols())
        throw Error(ErrorKind::dim_mismatch, "clip identity/texture tracks do not match the face basis");
    if (clip.illumination && clip.illumination->frames() > 0) {
        const auto& row = clip.illumination->data;
        a.illumination = face::SHIllumination::from_row({row.data(), static_cast<std::size_t>(row.cols())});
    } else {
        // Y00 = 1 / (2 sqrt(pi)), so this DC term leaves the albedo unchanged.
        const double dc = 2.0 * std::sqrt(M_PI);
        for (int c = 0; c < 3; ++c)
            a.illumination.gamma[static_cast<std::size_t>(9 * c)] = dc;
    }
    return a;
}

FrameRenderer::FrameRenderer(const face::FaceBasis& b, const Appearance& app, double eye_threshold, double max_au,
                             int res)
    : basis(b),
      appearance(app),
      region(eye::select_eye_vertices(b, eye_threshold)),
      texture(face::synthesize_texture(b, app.texture)),
      au_max(max_au),
      resolution(res),
      camera(face::OrthoCamera::fit(res, res))
{
    eye_tris = eye::eye_triangles(region, b.triangles, b.vertex_count());
}

FrameRenderer::Output FrameRenderer::render(const float* attr) const
{
    const int exp_dims = static_cast<int>(basis.exp_basis.cols());
    if (exp_dims > io::kExpressionDim)
        throw Error(ErrorKind::dim_mismatch, "face basis has more expression components than the attribute track");
    Eigen::VectorXd f_exp(exp_dims);
    for (int i = 0; i < exp_dims; ++i)
        f_exp[i] = attr[i];
    const auto pose = face::PoseParams::from_row({attr + io::kExpressionDim, io::kPoseDim});
    const double au = attr[io::kExpressionDim + io::kPoseDim];

    const auto posed = face::apply_pose(face::synthesize_geometry(basis, appearance.identity, f_exp), pose);
    const auto normals = face::vertex_normals(posed, basis.triangles);
    const auto colors = face::shade_sh(normals, texture, appearance.illumination);

    Output out;
    out.visibility = face::rasterize_visibility(posed, basis.triangles, resolution, resolution, camera);
    out.frame.rgb = face::shade_visibility(out.visibility, colors, basis.triangles);
    out.frame.attention = eye::attention_from_visibility(out.visibility, eye_tris,
                                                         static_cast<int>(basis.triangles.rows()),
                                                         eye::normalize_au(au, au_max));
    out.mouth = face::project_landmarks(posed, basis.mouth_landmarks);
    out.left_eye = face::project_landmarks(posed, basis.left_eye_landmarks);
    out.right_eye = face::project_landmarks(posed, basis.right_eye_landmarks);
    return out;
}

face::Image photo_transform(const render::RenderFrame& frame, const face::VisibilityBuffer& vis)
{
    const auto& rgb = frame.rgb;
    face::Image out(rgb.width, rgb.height, 3);
    for (int y = 0; y < rgb.height; ++y)
        for (int x = 0; x < rgb.width; ++x) {
            const float att = frame.attention.at(x, y, 0);
            for (int c = 0; c < 3; ++c) {
                float v;
                if (vis.at(x, y) < 0)
                    v = 0.15f + 0.5f * static_cast<float>(y) / static_cast<float>(rgb.height) + 0.05f * c;
                else
                    v = std::pow(rgb.at(x, y, c), 1.0f / 2.2f) * (1.0f - 0.6f * att);
                out.at(x, y, c) = v;
            }
        }
    return out;
}

} // namespace facial::pipeline
