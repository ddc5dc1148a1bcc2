#include "frame/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "frame/objectives.hpp"

namespace frame::eval {

namespace {

constexpr double kEps = 1e-12;

double dot_span(const double* a, const double* b, std::int64_t n) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) acc += a[i] * b[i];
    return acc;
}

double norm_span(const double* a, std::int64_t n) { return std::sqrt(dot_span(a, a, n)); }

double cosine(const double* a, const double* b, std::int64_t n) {
    return dot_span(a, b, n) / std::max(norm_span(a, n) * norm_span(b, n), kEps);
}

std::int64_t grid_side(std::int64_t cells) {
    const auto g = static_cast<std::int64_t>(std::llround(std::sqrt(static_cast<double>(cells))));
    if (g * g != cells) {
        throw ShapeError("cell count " + std::to_string(cells) + " is not a square grid");
    }
    return g;
}

} // namespace

std::vector<int> SoftLabelGrid::hard() const {
    const std::int64_t n = grid * grid;
    std::vector<int> out(static_cast<std::size_t>(n), 0);
    for (std::int64_t i = 0; i < n; ++i) {
        const double* row = probs.data() + i * classes;
        int best = 0;
        for (std::int64_t c = 1; c < classes; ++c) {
            if (row[c] > row[best]) best = static_cast<int>(c);
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

SoftLabelGrid one_hot(const LabelGrid& g, std::int64_t classes) {
    const std::int64_t n = g.grid * g.grid;
    if (static_cast<std::int64_t>(g.labels.size()) != n) {
        throw ShapeError("label grid: " + std::to_string(g.labels.size()) + " labels for side " +
                         std::to_string(g.grid));
    }
    SoftLabelGrid out;
    out.grid = g.grid;
    out.classes = classes;
    out.probs.assign(static_cast<std::size_t>(n * classes), 0.0);
    for (std::int64_t i = 0; i < n; ++i) {
        const int lab = g.labels[static_cast<std::size_t>(i)];
        if (lab < 0 || lab >= classes) {
            throw ContractError("label " + std::to_string(lab) + " outside 0.." +
                                std::to_string(classes - 1));
        }
        out.probs[static_cast<std::size_t>(i * classes + lab)] = 1.0;
    }
    return out;
}

std::vector<SoftLabelGrid> propagate_labels(const std::vector<Tensor>& features,
                                            const LabelGrid& gt0, const PropagationConfig& cfg) {
    if (features.empty()) throw ContractError("propagation: no frames");
    if (cfg.k <= 0 || cfg.temperature <= 0 || cfg.context_frames < 0 || cfg.locality_radius < 0) {
        throw ConfigError("propagation: invalid constants");
    }
    const std::int64_t n = features.front().rows();
    const std::int64_t d = features.front().cols();
    const std::int64_t g = grid_side(n);
    if (g != gt0.grid) {
        throw ShapeError("propagation: feature grid " + std::to_string(g) +
                         " vs label grid " + std::to_string(gt0.grid));
    }
    for (const auto& f : features) {
        if (f.shape() != features.front().shape()) {
            throw ShapeError("propagation: frame features " + shape_str(f.shape()) +
                             " differ from " + shape_str(features.front().shape()));
        }
    }

    int max_label = 0;
    for (int lab : gt0.labels) max_label = std::max(max_label, lab);
    const std::int64_t classes = max_label + 1;

    // Unit rows so cosine affinity reduces to a dot product.
    const auto t_count = static_cast<std::int64_t>(features.size());
    std::vector<std::vector<double>> unit(static_cast<std::size_t>(t_count));
    for (std::int64_t t = 0; t < t_count; ++t) {
        const auto& vals = features[static_cast<std::size_t>(t)].values();
        auto& u = unit[static_cast<std::size_t>(t)];
        u.resize(vals.size());
        for (std::int64_t i = 0; i < n; ++i) {
            const double nm = std::max(norm_span(vals.data() + i * d, d), kEps);
            for (std::int64_t j = 0; j < d; ++j) {
                u[static_cast<std::size_t>(i * d + j)] =
                    vals[static_cast<std::size_t>(i * d + j)] / nm;
            }
        }
    }

    std::vector<SoftLabelGrid> out;
    out.reserve(static_cast<std::size_t>(t_count));
    out.push_back(one_hot(gt0, classes));

    struct Candidate {
        double affinity;
        std::int64_t ctx;  // position in the context list
        std::int64_t cell;
    };

    for (std::int64_t t = 1; t < t_count; ++t) {
        std::vector<std::int64_t> context;
        context.push_back(0);
        for (std::int64_t f = std::max<std::int64_t>(1, t - cfg.context_frames); f < t; ++f) {
            context.push_back(f);
        }
        if (context.empty()) throw ContractError("propagation: empty context");

        SoftLabelGrid cur;
        cur.grid = g;
        cur.classes = classes;
        cur.probs.assign(static_cast<std::size_t>(n * classes), 0.0);

        std::vector<Candidate> cands;
        for (std::int64_t i = 0; i < n; ++i) {
            const std::int64_t ri = i / g, ci = i % g;
            cands.clear();
            for (std::size_t cx = 0; cx < context.size(); ++cx) {
                const auto f = static_cast<std::size_t>(context[cx]);
                const std::int64_t r0 = std::max<std::int64_t>(0, ri - cfg.locality_radius);
                const std::int64_t r1 = std::min<std::int64_t>(g - 1, ri + cfg.locality_radius);
                const std::int64_t c0 = std::max<std::int64_t>(0, ci - cfg.locality_radius);
                const std::int64_t c1 = std::min<std::int64_t>(g - 1, ci + cfg.locality_radius);
                for (std::int64_t rj = r0; rj <= r1; ++rj) {
                    for (std::int64_t cj = c0; cj <= c1; ++cj) {
                        const std::int64_t j = rj * g + cj;
                        const double aff =
                            dot_span(unit[static_cast<std::size_t>(t)].data() + i * d,
                                     unit[f].data() + j * d, d);
                        cands.push_back({aff, static_cast<std::int64_t>(cx), j});
                    }
                }
            }
            // Equal affinities keep enumeration order (earlier context frame,
            // then lower cell index).
            std::stable_sort(cands.begin(), cands.end(),
                             [](const Candidate& a, const Candidate& b) {
                                 return a.affinity > b.affinity;
                             });
            const auto keep = std::min<std::size_t>(static_cast<std::size_t>(cfg.k), cands.size());

            double amax = cands.front().affinity;
            double z = 0.0;
            std::vector<double> w(keep);
            for (std::size_t q = 0; q < keep; ++q) {
                w[q] = std::exp((cands[q].affinity - amax) / cfg.temperature);
                z += w[q];
            }
            double* row = cur.probs.data() + i * classes;
            for (std::size_t q = 0; q < keep; ++q) {
                const auto& cand = cands[q];
                const auto& src = out[static_cast<std::size_t>(context[static_cast<std::size_t>(cand.ctx)])];
                const double* srow = src.probs.data() + cand.cell * classes;
                const double wq = w[q] / z;
                for (std::int64_t c = 0; c < classes; ++c) row[c] += wq * srow[c];
            }
        }
        out.push_back(std::move(cur));
    }
    return out;
}

namespace {

std::vector<bool> label_mask(const LabelGrid& g, int label) {
    std::vector<bool> m(g.labels.size());
    for (std::size_t i = 0; i < g.labels.size(); ++i) m[i] = (g.labels[i] == label);
    return m;
}

std::vector<bool> boundary_cells(const std::vector<bool>& mask, std::int64_t g) {
    std::vector<bool> b(mask.size(), false);
    for (std::int64_t r = 0; r < g; ++r) {
        for (std::int64_t c = 0; c < g; ++c) {
            const auto i = static_cast<std::size_t>(r * g + c);
            if (!mask[i]) continue;
            const bool up = r > 0 && mask[static_cast<std::size_t>((r - 1) * g + c)];
            const bool dn = r + 1 < g && mask[static_cast<std::size_t>((r + 1) * g + c)];
            const bool lf = c > 0 && mask[static_cast<std::size_t>(r * g + c - 1)];
            const bool rt = c + 1 < g && mask[static_cast<std::size_t>(r * g + c + 1)];
            b[i] = !(up && dn && lf && rt);
        }
    }
    return b;
}

std::vector<bool> dilate3(const std::vector<bool>& mask, std::int64_t g) {
    std::vector<bool> d(mask.size(), false);
    for (std::int64_t r = 0; r < g; ++r) {
        for (std::int64_t c = 0; c < g; ++c) {
            bool any = false;
            for (std::int64_t dr = -1; dr <= 1 && !any; ++dr) {
                for (std::int64_t dc = -1; dc <= 1 && !any; ++dc) {
                    const std::int64_t rr = r + dr, cc = c + dc;
                    if (rr >= 0 && rr < g && cc >= 0 && cc < g &&
                        mask[static_cast<std::size_t>(rr * g + cc)]) {
                        any = true;
                    }
                }
            }
            d[static_cast<std::size_t>(r * g + c)] = any;
        }
    }
    return d;
}

double jaccard(const std::vector<bool>& a, const std::vector<bool>& b) {
    std::int64_t inter = 0, uni = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        inter += (a[i] && b[i]) ? 1 : 0;
        uni += (a[i] || b[i]) ? 1 : 0;
    }
    if (uni == 0) return 1.0;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

double boundary_f(const std::vector<bool>& pred, const std::vector<bool>& gt, std::int64_t g) {
    const auto pb = boundary_cells(pred, g);
    const auto gb = boundary_cells(gt, g);
    const auto pcount = std::count(pb.begin(), pb.end(), true);
    const auto gcount = std::count(gb.begin(), gb.end(), true);
    if (pcount == 0 && gcount == 0) return 1.0;
    if (pcount == 0 || gcount == 0) return 0.0;
    const auto pd = dilate3(pb, g);
    const auto gd = dilate3(gb, g);
    std::int64_t phit = 0, ghit = 0;
    for (std::size_t i = 0; i < pb.size(); ++i) {
        if (pb[i] && gd[i]) ++phit;
        if (gb[i] && pd[i]) ++ghit;
    }
    const double precision = static_cast<double>(phit) / static_cast<double>(pcount);
    const double recall = static_cast<double>(ghit) / static_cast<double>(gcount);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace

JFMetrics jaccard_and_boundary(const std::vector<LabelGrid>& pred,
                               const std::vector<LabelGrid>& gt) {
    if (pred.size() != gt.size() || pred.empty()) {
        throw ShapeError("jaccard: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
    }
    const std::int64_t g = gt.front().grid;

    std::set<int> object_labels;
    for (const auto& fr : gt) {
        if (fr.grid != g) throw ShapeError("jaccard: inconsistent ground-truth grids");
        for (int lab : fr.labels) {
            if (lab > 0) object_labels.insert(lab);
        }
    }
    for (const auto& fr : pred) {
        if (fr.grid != g) throw ShapeError("jaccard: inconsistent predicted grids");
        for (int lab : fr.labels) {
            if (lab != 0 && object_labels.count(lab) == 0) {
                throw DataError("jaccard: predicted label " + std::to_string(lab) +
                                " absent from ground truth");
            }
        }
    }
    if (object_labels.empty()) throw DataError("jaccard: ground truth has no objects");

    JFMetrics m;
    for (int lab : object_labels) {
        double jsum = 0.0, fsum = 0.0;
        for (std::size_t t = 0; t < gt.size(); ++t) {
            const auto pm = label_mask(pred[t], lab);
            const auto gm = label_mask(gt[t], lab);
            jsum += jaccard(pm, gm);
            fsum += boundary_f(pm, gm, g);
        }
        m.j_mean += jsum / static_cast<double>(gt.size());
        m.f_mean += fsum / static_cast<double>(gt.size());
    }
    m.j_mean /= static_cast<double>(object_labels.size());
    m.f_mean /= static_cast<double>(object_labels.size());
    m.jf_mean = 0.5 * (m.j_mean + m.f_mean);
    return m;
}

double miou(const std::vector<LabelGrid>& pred, const std::vector<LabelGrid>& gt,
            const std::vector<int>& classes) {
    if (pred.size() != gt.size() || pred.empty()) {
        throw ShapeError("miou: " + std::to_string(pred.size()) + " predicted frames vs " +
                         std::to_string(gt.size()) + " ground-truth frames");
    }
    double total = 0.0;
    std::int64_t counted = 0;
    for (int cls : classes) {
        std::int64_t inter = 0, uni = 0;
        bool present = false;
        for (std::size_t t = 0; t < gt.size(); ++t) {
            for (std::size_t i = 0; i < gt[t].labels.size(); ++i) {
                const bool p = pred[t].labels[i] == cls;
                const bool q = gt[t].labels[i] == cls;
                present = present || q;
                inter += (p && q) ? 1 : 0;
                uni += (p || q) ? 1 : 0;
            }
        }
        if (!present) continue;
        total += static_cast<double>(inter) / static_cast<double>(uni);
        ++counted;
    }
    if (counted == 0) throw DataError("miou: no listed class present in ground truth");
    return total / static_cast<double>(counted);
}

std::vector<double> pck(const std::vector<std::array<double, 2>>& pred,
                        const std::vector<std::array<double, 2>>& gt,
                        const std::vector<std::array<std::int64_t, 4>>& bbox,
                        const std::vector<double>& thresholds) {
    if (pred.size() != gt.size() || pred.size() != bbox.size()) {
        throw ShapeError("pck: mismatched list lengths " + std::to_string(pred.size()) + "/" +
                         std::to_string(gt.size()) + "/" + std::to_string(bbox.size()));
    }
    std::vector<double> out(thresholds.size(), 0.0);
    if (pred.empty()) return out;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double dx = pred[i][0] - gt[i][0];
        const double dy = pred[i][1] - gt[i][1];
        const double err = std::sqrt(dx * dx + dy * dy);
        const double side = static_cast<double>(
            std::max(bbox[i][2] - bbox[i][0] + 1, bbox[i][3] - bbox[i][1] + 1));
        for (std::size_t q = 0; q < thresholds.size(); ++q) {
            if (err <= thresholds[q] * side) out[q] += 1.0;
        }
    }
    for (auto& v : out) v /= static_cast<double>(pred.size());
    return out;
}

LabelGrid keypoints_to_grid(const std::vector<std::array<double, 2>>& points,
                            std::int64_t canvas, std::int64_t patch_size) {
    if (patch_size <= 0 || canvas % patch_size != 0) {
        throw ConfigError("keypoints: canvas " + std::to_string(canvas) +
                          " not divisible by patch size " + std::to_string(patch_size));
    }
    const std::int64_t g = canvas / patch_size;
    LabelGrid grid;
    grid.grid = g;
    grid.labels.assign(static_cast<std::size_t>(g * g), 0);
    for (std::size_t k = 0; k < points.size(); ++k) {
        const auto cx = static_cast<std::int64_t>(std::floor(points[k][0] / static_cast<double>(patch_size)));
        const auto cy = static_cast<std::int64_t>(std::floor(points[k][1] / static_cast<double>(patch_size)));
        const std::int64_t col = std::clamp<std::int64_t>(cx, 0, g - 1);
        const std::int64_t row = std::clamp<std::int64_t>(cy, 0, g - 1);
        auto& slot = grid.labels[static_cast<std::size_t>(row * g + col)];
        if (slot == 0) slot = static_cast<int>(k) + 1;
    }
    return grid;
}

std::vector<std::array<double, 2>> grid_to_keypoints(const SoftLabelGrid& g,
                                                     std::int64_t point_count,
                                                     std::int64_t patch_size) {
    std::vector<std::array<double, 2>> out(static_cast<std::size_t>(point_count), {-1.0, -1.0});
    const std::int64_t n = g.grid * g.grid;
    for (std::int64_t k = 1; k <= point_count; ++k) {
        if (k >= g.classes) continue;
        std::int64_t best = 0;
        for (std::int64_t i = 1; i < n; ++i) {
            if (g.probs[static_cast<std::size_t>(i * g.classes + k)] >
                g.probs[static_cast<std::size_t>(best * g.classes + k)]) {
                best = i;
            }
        }
        const std::int64_t row = best / g.grid, col = best % g.grid;
        out[static_cast<std::size_t>(k - 1)] = {
            (static_cast<double>(col) + 0.5) * static_cast<double>(patch_size),
            (static_cast<double>(row) + 0.5) * static_cast<double>(patch_size)};
    }
    return out;
}

namespace {

std::vector<double> pool_region(const Tensor& features, const std::vector<bool>& mask) {
    const std::int64_t n = features.rows(), d = features.cols();
    if (static_cast<std::int64_t>(mask.size()) != n) {
        throw ShapeError("region mask of " + std::to_string(mask.size()) + " cells for features " +
                         shape_str(features.shape()));
    }
    std::vector<double> pooled(static_cast<std::size_t>(d), 0.0);
    std::int64_t count = 0;
    const auto& vals = features.values();
    for (std::int64_t i = 0; i < n; ++i) {
        if (!mask[static_cast<std::size_t>(i)]) continue;
        ++count;
        for (std::int64_t j = 0; j < d; ++j) {
            pooled[static_cast<std::size_t>(j)] += vals[static_cast<std::size_t>(i * d + j)];
        }
    }
    if (count > 0) {
        for (auto& v : pooled) v /= static_cast<double>(count);
    }
    return pooled;
}

} // namespace

std::vector<std::vector<int>> track_regions(
    const std::vector<Tensor>& features,
    const std::vector<std::vector<std::vector<bool>>>& proposals) {
    if (features.empty() || features.size() != proposals.size()) {
        throw ShapeError("tracking: " + std::to_string(features.size()) + " feature frames vs " +
                         std::to_string(proposals.size()) + " proposal frames");
    }
    const std::int64_t d = features.front().cols();

    std::vector<std::vector<double>> anchors;
    for (const auto& mask : proposals.front()) {
        anchors.push_back(pool_region(features.front(), mask));
    }

    std::vector<std::vector<int>> out;
    out.reserve(features.size());
    for (std::size_t t = 0; t < features.size(); ++t) {
        std::vector<int> row(anchors.size(), -1);
        if (t == 0) {
            for (std::size_t a = 0; a < anchors.size(); ++a) row[a] = static_cast<int>(a);
        } else if (!proposals[t].empty()) {
            std::vector<std::vector<double>> pooled;
            pooled.reserve(proposals[t].size());
            for (const auto& mask : proposals[t]) {
                pooled.push_back(pool_region(features[t], mask));
            }
            for (std::size_t a = 0; a < anchors.size(); ++a) {
                int best = 0;
                double best_sim = cosine(anchors[a].data(), pooled[0].data(), d);
                for (std::size_t p = 1; p < pooled.size(); ++p) {
                    const double sim = cosine(anchors[a].data(), pooled[p].data(), d);
                    if (sim > best_sim) {
                        best_sim = sim;
                        best = static_cast<int>(p);
                    }
                }
                row[a] = best;
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

int zero_shot_classify(const std::vector<Tensor>& cls_sequence, const Tensor& label_embeddings) {
    if (cls_sequence.empty()) throw ContractError("zero-shot: no frames");
    const std::int64_t d = cls_sequence.front().numel();
    std::vector<double> mean(static_cast<std::size_t>(d), 0.0);
    for (const auto& v : cls_sequence) {
        if (v.numel() != d) {
            throw ShapeError("zero-shot: projection " + shape_str(v.shape()) + " differs from " +
                             shape_str(cls_sequence.front().shape()));
        }
        const auto& vals = v.values();
        for (std::int64_t j = 0; j < d; ++j) mean[static_cast<std::size_t>(j)] += vals[static_cast<std::size_t>(j)];
    }
    for (auto& v : mean) v /= static_cast<double>(cls_sequence.size());
    if (norm_span(mean.data(), d) == 0.0) throw DataError("zero-shot: zero-norm video vector");

    if (label_embeddings.cols() != d) {
        throw ShapeError("zero-shot: label embeddings " + shape_str(label_embeddings.shape()) +
                         " vs projection width " + std::to_string(d));
    }
    const std::int64_t labels = label_embeddings.rows();
    if (labels == 0) throw DataError("zero-shot: no label embeddings");
    const auto& emb = label_embeddings.values();
    for (std::int64_t l = 0; l < labels; ++l) {
        if (norm_span(emb.data() + l * d, d) == 0.0) {
            throw DataError("zero-shot: zero-norm label embedding " + std::to_string(l));
        }
    }
    int best = 0;
    double best_sim = cosine(mean.data(), emb.data(), d);
    for (std::int64_t l = 1; l < labels; ++l) {
        const double sim = cosine(mean.data(), emb.data() + l * d, d);
        if (sim > best_sim) {
            best_sim = sim;
            best = static_cast<int>(l);
        }
    }
    return best;
}

std::vector<int> LinearProbe::predict(const Tensor& features) const {
    const auto soft = soft_predict(features);
    const auto c = static_cast<std::int64_t>(classes.size());
    const std::int64_t n = features.rows();
    std::vector<int> out(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        std::int64_t best = 0;
        for (std::int64_t j = 1; j < c; ++j) {
            if (soft[static_cast<std::size_t>(i * c + j)] >
                soft[static_cast<std::size_t>(i * c + best)]) {
                best = j;
            }
        }
        out[static_cast<std::size_t>(i)] = classes[static_cast<std::size_t>(best)];
    }
    return out;
}

std::vector<double> LinearProbe::soft_predict(const Tensor& features) const {
    NoGradScope ng;
    Tensor logits = ops::softmax(ops::linear(features, w, b), 1);
    return logits.values();
}

LinearProbe fit_linear_head(const std::vector<Tensor>& features,
                            const std::vector<LabelGrid>& labels, std::int64_t epochs, double lr) {
    if (features.empty() || features.size() != labels.size()) {
        throw ShapeError("probe: " + std::to_string(features.size()) + " feature frames vs " +
                         std::to_string(labels.size()) + " label frames");
    }
    const std::int64_t d = features.front().cols();

    std::set<int> present;
    for (const auto& g : labels) {
        for (int lab : g.labels) present.insert(lab);
    }
    std::vector<int> class_list(present.begin(), present.end());
    const auto c = static_cast<std::int64_t>(class_list.size());

    std::int64_t rows = 0;
    for (const auto& f : features) rows += f.rows();
    Tensor x = Tensor::zeros({rows, d});
    std::vector<int> y;
    y.reserve(static_cast<std::size_t>(rows));
    {
        auto& xv = x.ptr()->values;
        std::size_t off = 0;
        for (std::size_t t = 0; t < features.size(); ++t) {
            const auto& fv = features[t].values();
            if (features[t].cols() != d ||
                features[t].rows() != static_cast<std::int64_t>(labels[t].labels.size())) {
                throw ShapeError("probe: features " + shape_str(features[t].shape()) +
                                 " do not match " + std::to_string(labels[t].labels.size()) +
                                 " labels");
            }
            std::copy(fv.begin(), fv.end(), xv.begin() + static_cast<std::ptrdiff_t>(off));
            off += fv.size();
            for (int lab : labels[t].labels) {
                const auto it = std::lower_bound(class_list.begin(), class_list.end(), lab);
                y.push_back(static_cast<int>(it - class_list.begin()));
            }
        }
    }

    ParamStore ps;
    ps.create("probe.w", {d, c});
    ps.create("probe.b", {c});
    AdamW opt;
    for (std::int64_t e = 0; e < epochs; ++e) {
        ps.zero_grad();
        Tensor loss = ops::cross_entropy(ops::linear(x, ps.get("probe.w"), ps.get("probe.b")), y);
        backward(loss);
        opt.step(ps, lr, 0.0);
    }

    LinearProbe probe;
    probe.w = ps.get("probe.w").clone();
    probe.b = ps.get("probe.b").clone();
    probe.w.set_requires_grad(false);
    probe.b.set_requires_grad(false);
    probe.classes = std::move(class_list);
    return probe;
}

DriftRow drift_at(const std::vector<TeacherTargets>& targets, std::int64_t delta) {
    if (delta < 0) throw ContractError("drift: negative delta");
    DriftRow row;
    row.delta = delta;
    if (delta == 0) return row;
    const auto t_count = static_cast<std::int64_t>(targets.size());
    if (t_count <= delta) {
        throw ContractError("drift: video of " + std::to_string(t_count) +
                            " frames too short for delta " + std::to_string(delta));
    }
    const std::int64_t dc = targets.front().c_cls.numel();
    const std::int64_t n = targets.front().d_patch.rows();
    const std::int64_t dd = targets.front().d_patch.cols();
    double sem = 0.0, spa = 0.0;
    for (std::int64_t t = 0; t + delta < t_count; ++t) {
        const auto& a = targets[static_cast<std::size_t>(t)];
        const auto& b = targets[static_cast<std::size_t>(t + delta)];
        sem += 1.0 - cosine(a.c_cls.values().data(), b.c_cls.values().data(), dc);
        double patch_acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            patch_acc += 1.0 - cosine(a.d_patch.values().data() + i * dd,
                                      b.d_patch.values().data() + i * dd, dd);
        }
        spa += patch_acc / static_cast<double>(n);
    }
    const auto pairs = static_cast<double>(t_count - delta);
    row.semantic = sem / pairs;
    row.spatial = spa / pairs;
    return row;
}

std::vector<DriftRow> feature_drift_profile(const std::vector<TeacherTargets>& targets,
                                            std::int64_t max_delta) {
    std::vector<DriftRow> rows;
    rows.reserve(static_cast<std::size_t>(max_delta));
    for (std::int64_t k = 1; k <= max_delta; ++k) rows.push_back(drift_at(targets, k));
    return rows;
}

} // namespace frame::eval
