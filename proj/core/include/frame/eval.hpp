#pragma once

#include <array>
#include <vector>

#include "frame/teacher.hpp"
#include "frame/tensor.hpp"

namespace frame::eval {

struct LabelGrid {
    std::int64_t grid = 0; // side length; N = grid*grid cells
    std::vector<int> labels; // label per cell, 0 = background
};

struct SoftLabelGrid {
    std::int64_t grid = 0;
    std::int64_t classes = 0;
    std::vector<double> probs; // [N x classes], each row sums to 1

    std::vector<int> hard() const; // argmax per cell, ties toward lowest label
};

SoftLabelGrid one_hot(const LabelGrid& g, std::int64_t classes);

struct PropagationConfig {
    std::int64_t k = 5;
    double temperature = 0.1;
    std::int64_t context_frames = 1; // previous frames beyond the always-included first
    std::int64_t locality_radius = 12; // Chebyshev radius in patch cells
};

// Patchwise nearest-neighbor label propagation. Frame 0 is fixed to gt0;
// each later frame pulls soft labels from {frame 0, previous context_frames
// frames} restricted to cells within the locality radius, keeping the top-k
// cosine affinities per target cell and softmax-weighting them.
std::vector<SoftLabelGrid> propagate_labels(const std::vector<Tensor>& features,
                                            const LabelGrid& gt0, const PropagationConfig& cfg);

struct JFMetrics {
    double j_mean = 0.0;
    double f_mean = 0.0;
    double jf_mean = 0.0;
};

// Region Jaccard and boundary F over every nonzero label present in gt,
// per-frame averaged per object then averaged over objects. Boundary match
// tolerance is one cell (3x3 dilation); boundaries use 4-adjacency with the
// grid border counting as outside.
JFMetrics jaccard_and_boundary(const std::vector<LabelGrid>& pred,
                               const std::vector<LabelGrid>& gt);

// Classwise IoU from global intersection/union counts over all frames,
// averaged over the classes present in gt (others skipped).
double miou(const std::vector<LabelGrid>& pred, const std::vector<LabelGrid>& gt,
            const std::vector<int>& classes);

// Fraction of keypoints whose error is within threshold * max(bbox side).
std::vector<double> pck(const std::vector<std::array<double, 2>>& pred,
                        const std::vector<std::array<double, 2>>& gt,
                        const std::vector<std::array<std::int64_t, 4>>& bbox,
                        const std::vector<double>& thresholds);

// Keypoints become one-hot cell labels (collisions keep the lowest index);
// read back as the center of the most probable cell.
LabelGrid keypoints_to_grid(const std::vector<std::array<double, 2>>& points,
                            std::int64_t canvas, std::int64_t patch_size);
std::vector<std::array<double, 2>> grid_to_keypoints(const SoftLabelGrid& g,
                                                     std::int64_t point_count,
                                                     std::int64_t patch_size);

// Tracks each frame-0 region by matching its pooled feature to the most
// cosine-similar pooled proposal per frame (ties toward the lowest proposal
// index). A frame without proposals yields -1 assignments.
// proposals[t][r] is a patch mask of length N.
std::vector<std::vector<int>> track_regions(
    const std::vector<Tensor>& features,
    const std::vector<std::vector<std::vector<bool>>>& proposals);

// Mean of the per-frame projected CLS vectors, then argmax cosine
// similarity over label embeddings; ties toward the lowest index.
int zero_shot_classify(const std::vector<Tensor>& cls_sequence, const Tensor& label_embeddings);

struct LinearProbe {
    Tensor w; // [D x C]
    Tensor b; // [C]
    std::vector<int> classes; // original label of each column

    // Per-cell predicted original labels; zero-parameter probes predict
    // uniformly, which argmax resolves to the lowest class.
    std::vector<int> predict(const Tensor& features) const;
    std::vector<double> soft_predict(const Tensor& features) const; // [N x C]
};

// Per-patch softmax-linear classifier trained with cross-entropy and Adam
// from zero-initialized parameters. Labels absent from the training set get
// no output column.
LinearProbe fit_linear_head(const std::vector<Tensor>& features,
                            const std::vector<LabelGrid>& labels, std::int64_t epochs, double lr);

struct DriftRow {
    std::int64_t delta = 0;
    double semantic = 0.0; // mean cosine distance of class vectors
    double spatial = 0.0;  // mean patch-averaged cosine distance
};

DriftRow drift_at(const std::vector<TeacherTargets>& targets, std::int64_t delta);
std::vector<DriftRow> feature_drift_profile(const std::vector<TeacherTargets>& targets,
                                            std::int64_t max_delta);

} // namespace frame::eval
