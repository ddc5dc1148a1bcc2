#include "frame/ops.hpp"

#include <cmath>
#include <initializer_list>

namespace frame::ops {

namespace {

using Data = std::shared_ptr<TensorData>;

bool track(std::initializer_list<const Tensor*> inputs) {
    if (!grad_enabled()) return false;
    for (const auto* t : inputs) {
        if (t->requires_grad()) return true;
    }
    return false;
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!same_shape(a.shape(), b.shape())) {
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
}

void accumulate(TensorData& t, const std::vector<double>& delta) {
    t.ensure_grad();
    const Precision p = precision();
    for (std::size_t i = 0; i < delta.size(); ++i) {
        t.grad[i] = quantize(t.grad[i] + delta[i], p);
    }
}

// Elementwise op with value-level forward and derivative d(out)/d(in).
template <typename Fwd, typename Drv>
Tensor unary_elementwise(const char* name, const Tensor& a, Fwd fwd, Drv drv) {
    Tensor out = Tensor::zeros(a.shape());
    Data A = a.ptr(), O = out.ptr();
    auto compute = [A, O, fwd]() {
        const Precision p = precision();
        for (std::size_t i = 0; i < O->values.size(); ++i) {
            O->values[i] = quantize(fwd(A->values[i]), p);
        }
    };
    compute();
    if (track({&a})) {
        out.set_requires_grad(true);
        detail::record_node({name, {A}, O, compute, [A, O, drv]() {
            A->ensure_grad();
            const Precision p = precision();
            for (std::size_t i = 0; i < O->grad.size(); ++i) {
                A->grad[i] = quantize(A->grad[i] + O->grad[i] * drv(A->values[i], O->values[i]), p);
            }
        }});
    }
    return out;
}

template <typename Fwd, typename DA, typename DB>
Tensor binary_elementwise(const char* name, const Tensor& a, const Tensor& b,
                          Fwd fwd, DA da, DB db) {
    check_same_shape(name, a, b);
    Tensor out = Tensor::zeros(a.shape());
    Data A = a.ptr(), B = b.ptr(), O = out.ptr();
    auto compute = [A, B, O, fwd]() {
        const Precision p = precision();
        for (std::size_t i = 0; i < O->values.size(); ++i) {
            O->values[i] = quantize(fwd(A->values[i], B->values[i]), p);
        }
    };
    compute();
    if (track({&a, &b})) {
        out.set_requires_grad(true);
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        detail::record_node({name, {A, B}, O, compute, [A, B, O, da, db, ga, gb]() {
            const Precision p = precision();
            if (ga) {
                A->ensure_grad();
                for (std::size_t i = 0; i < O->grad.size(); ++i) {
                    A->grad[i] = quantize(A->grad[i] + O->grad[i] * da(A->values[i], B->values[i]), p);
                }
            }
            if (gb) {
                B->ensure_grad();
                for (std::size_t i = 0; i < O->grad.size(); ++i) {
                    B->grad[i] = quantize(B->grad[i] + O->grad[i] * db(A->values[i], B->values[i]), p);
                }
            }
        }});
    }
    return out;
}

} // namespace

Tensor add(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "add", a, b, [](double x, double y) { return x + y; },
        [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "sub", a, b, [](double x, double y) { return x - y; },
        [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "mul", a, b, [](double x, double y) { return x * y; },
        [](double, double y) { return y; }, [](double x, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
    return binary_elementwise(
        "div", a, b, [](double x, double y) { return x / y; },
        [](double, double y) { return 1.0 / y; },
        [](double x, double y) { return -x / (y * y); });
}

Tensor add_scalar(const Tensor& a, double c) {
    return unary_elementwise(
        "add_scalar", a, [c](double x) { return x + c; },
        [](double, double) { return 1.0; });
}

Tensor scale(const Tensor& a, double c) {
    return unary_elementwise(
        "scale", a, [c](double x) { return c * x; },
        [c](double, double) { return c; });
}

Tensor sqrt_(const Tensor& a) {
    return unary_elementwise(
        "sqrt", a, [](double x) { return std::sqrt(x); },
        [](double, double y) { return 0.5 / y; });
}

Tensor gelu(const Tensor& a) {
    constexpr double inv_sqrt2 = 0.7071067811865475244;
    constexpr double inv_sqrt2pi = 0.3989422804014326779;
    return unary_elementwise(
        "gelu", a,
        [](double x) { return 0.5 * x * (1.0 + std::erf(x * inv_sqrt2)); },
        [](double x, double) {
            const double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
            const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
            return cdf + x * pdf;
        });
}

Tensor sum(const Tensor& a) {
    Tensor out = Tensor::zeros({1});
    Data A = a.ptr(), O = out.ptr();
    auto compute = [A, O]() {
        double acc = 0.0;
        for (double v : A->values) acc += v;
        O->values[0] = quantize(acc);
    };
    compute();
    if (track({&a})) {
        out.set_requires_grad(true);
        detail::record_node({"sum", {A}, O, compute, [A, O]() {
            A->ensure_grad();
            const Precision p = precision();
            const double g = O->grad[0];
            for (auto& gi : A->grad) gi = quantize(gi + g, p);
        }});
    }
    return out;
}

Tensor mean(const Tensor& a) {
    const double inv = 1.0 / static_cast<double>(a.numel());
    Tensor out = Tensor::zeros({1});
    Data A = a.ptr(), O = out.ptr();
    auto compute = [A, O, inv]() {
        double acc = 0.0;
        for (double v : A->values) acc += v;
        O->values[0] = quantize(acc * inv);
    };
    compute();
    if (track({&a})) {
        out.set_requires_grad(true);
        detail::record_node({"mean", {A}, O, compute, [A, O, inv]() {
            A->ensure_grad();
            const Precision p = precision();
            const double g = O->grad[0] * inv;
            for (auto& gi : A->grad) gi = quantize(gi + g, p);
        }});
    }
    return out;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
    if (a.shape().size() != 2 || b.shape().size() != 2 || a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions disagree: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
    }
    const std::int64_t m = a.rows(), k = a.cols(), n = b.cols();
    Tensor out = Tensor::zeros({m, n});
    Data A = a.ptr(), B = b.ptr(), O = out.ptr();
    auto compute = [A, B, O, m, k, n]() {
        const Precision p = precision();
        const double* av = A->values.data();
        const double* bv = B->values.data();
        double* ov = O->values.data();
        std::fill(O->values.begin(), O->values.end(), 0.0);
        for (std::int64_t i = 0; i < m; ++i) {
            for (std::int64_t t = 0; t < k; ++t) {
                const double aik = av[i * k + t];
                const double* brow = bv + t * n;
                double* orow = ov + i * n;
                for (std::int64_t j = 0; j < n; ++j) orow[j] += aik * brow[j];
            }
            if (p == Precision::f32) {
                double* orow = ov + i * n;
                for (std::int64_t j = 0; j < n; ++j) orow[j] = quantize(orow[j], p);
            }
        }
    };
    compute();
    if (track({&a, &b})) {
        out.set_requires_grad(true);
        const bool ga = a.requires_grad(), gb = b.requires_grad();
        detail::record_node({"matmul", {A, B}, O, compute, [A, B, O, m, k, n, ga, gb]() {
            const double* g = O->grad.data();
            if (ga) { // dA = G * B^T
                std::vector<double> da(static_cast<std::size_t>(m * k), 0.0);
                const double* bv = B->values.data();
                for (std::int64_t i = 0; i < m; ++i) {
                    for (std::int64_t j = 0; j < n; ++j) {
                        const double gij = g[i * n + j];
                        for (std::int64_t t = 0; t < k; ++t) {
                            da[i * k + t] += gij * bv[t * n + j];
                        }
                    }
                }
                accumulate(*A, da);
            }
            if (gb) { // dB = A^T * G
                std::vector<double> dbv(static_cast<std::size_t>(k * n), 0.0);
                const double* av = A->values.data();
                for (std::int64_t i = 0; i < m; ++i) {
                    for (std::int64_t t = 0; t < k; ++t) {
                        const double ait = av[i * k + t];
                        const double* grow = g + i * n;
                        double* drow = dbv.data() + t * n;
                        for (std::int64_t j = 0; j < n; ++j) drow[j] += ait * grow[j];
                    }
                }
                accumulate(*B, dbv);
            }
        }});
    }
    return out;
}

Tensor transpose(const Tensor& a) {
    const std::int64_t r = a.rows(), c = a.cols();
    Tensor out = Tensor::zeros({c, r});
    Data A = a.ptr(), O = out.ptr();
    auto compute = [A, O, r, c]() {
        for (std::int64_t i = 0; i < r; ++i) {
            for (std::int64_t j = 0; j < c; ++j) {
                O->values[static_cast<std::size_t>(j * r + i)] =
                    A->values[static_cast<std::size_t>(i * c + j)];
            }
        }
    };
    compute();
    if (track({&a})) {
        out.set_requires_grad(true);
        detail::record_node({"transpose", {A}, O, compute, [A, O, r, c]() {
            A->ensure_grad();
            const Precision p = precision();
            for (std::int64_t i = 0; i < r; ++i) {
                for (std::int64_t j = 0; j < c; ++j) {
                    auto& slot = A->grad[static_cast<std::size_t>(i * c + j)];
                    slot = quantize(slot + O->grad[static_cast<std::size_t>(j * r + i)], p);
                }
            }
        }});
    }
    return out;
}

Tensor add_rowwise(const Tensor& x, const Tensor& bias) {
    if (x.shape().size() != 2 || bias.shape().size() != 1 || bias.shape()[0] != x.cols()) {
        throw ShapeError("add_rowwise: shape mismatch " + shape_str(x.shape()) + " vs " +
                         shape_str(bias.shape()));
    }
    const std::int64_t r = x.rows(), c = x.cols();
    Tensor out = Tensor::zeros(x.shape());
    Data X = x.ptr(), B = bias.ptr(), O = out.ptr();
    auto compute = [X, B, O, r, c]() {
        const Precision p = precision();
        for (std::int64_t i = 0; i < r; ++i) {
            for (std::int64_t j = 0; j < c; ++j) {
                const auto idx = static_cast<std::size_t>(i * c + j);
                O->values[idx] = quantize(X->values[idx] + B->values[static_cast<std::size_t>(j)], p);
            }
        }
    };
    compute();
    if (track({&x, &bias})) {
        out.set_requires_grad(true);
        const bool gx = x.requires_grad(), gb = bias.requires_grad();
        detail::record_node({"add_rowwise", {X, B}, O, compute, [X, B, O, r, c, gx, gb]() {
            const Precision p = precision();
            if (gx) accumulate(*X, O->grad);
            if (gb) {
                B->ensure_grad();
                for (std::int64_t j = 0; j < c; ++j) {
                    double acc = 0.0;
                    for (std::int64_t i = 0; i < r; ++i) {
                        acc += O->grad[static_cast<std::size_t>(i * c + j)];
                    }
                    auto& slot = B->grad[static_cast<std::size_t>(j)];
                    slot = quantize(slot + acc, p);
                }
            }
        }});
    }
    return out;
}

namespace {

void softmax_rows(const double* in, double* out, std::int64_t rows, std::int64_t cols,
                  std::int64_t rstride, std::int64_t cstride, Precision p) {
    for (std::int64_t i = 0; i < rows; ++i) {
        const double* xi = in + i * rstride;
        double* yi = out + i * rstride;
        double mx = xi[0];
        for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, xi[j * cstride]);
        double z = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) z += std::exp(xi[j * cstride] - mx);
        const double inv_z = 1.0 / z;
        for (std::int64_t j = 0; j < cols; ++j) {
            yi[j * cstride] = quantize(std::exp(xi[j * cstride] - mx) * inv_z, p);
        }
    }
}

} // namespace

Tensor softmax(const Tensor& x, int axis) {
    const auto& s = x.shape();
    if (s.size() != 1 && s.size() != 2) {
        throw ShapeError("softmax: expects a 1-D or 2-D tensor, got " + shape_str(s));
    }
    const int ndim = static_cast<int>(s.size());
    if (axis < 0) axis += ndim;
    if (axis < 0 || axis >= ndim) {
        throw ShapeError("softmax: invalid axis for shape " + shape_str(s));
    }
    // Reduce along `axis`; express both layouts as strided row iteration.
    std::int64_t groups, width, rstride, cstride;
    if (ndim == 1) {
        groups = 1, width = s[0], rstride = s[0], cstride = 1;
    } else if (axis == 1) {
        groups = s[0], width = s[1], rstride = s[1], cstride = 1;
    } else {
        groups = s[1], width = s[0], rstride = 1, cstride = s[1];
    }
    Tensor out = Tensor::zeros(s);
    Data X = x.ptr(), O = out.ptr();
    auto compute = [X, O, groups, width, rstride, cstride]() {
        softmax_rows(X->values.data(), O->values.data(), groups, width, rstride, cstride,
                     precision());
    };
    compute();
    if (track({&x})) {
        out.set_requires_grad(true);
        detail::record_node({"softmax", {X}, O, compute, [X, O, groups, width, rstride, cstride]() {
            X->ensure_grad();
            const Precision p = precision();
            for (std::int64_t i = 0; i < groups; ++i) {
                const double* y = O->values.data() + i * rstride;
                const double* g = O->grad.data() + i * rstride;
                double dotgy = 0.0;
                for (std::int64_t j = 0; j < width; ++j) {
                    dotgy += g[j * cstride] * y[j * cstride];
                }
                double* gx = X->grad.data() + i * rstride;
                for (std::int64_t j = 0; j < width; ++j) {
                    const auto k = j * cstride;
                    gx[k] = quantize(gx[k] + y[k] * (g[k] - dotgy), p);
                }
            }
        }});
    }
    return out;
}

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps) {
    const auto& s = x.shape();
    const std::int64_t d = s.back();
    const std::int64_t r = (s.size() == 2) ? s[0] : 1;
    if ((s.size() != 1 && s.size() != 2) || gain.shape() != Shape{d} || bias.shape() != Shape{d}) {
        throw ShapeError("layer_norm: shape mismatch " + shape_str(s) + " with gain " +
                         shape_str(gain.shape()) + ", bias " + shape_str(bias.shape()));
    }
    Tensor out = Tensor::zeros(s);
    Data X = x.ptr(), G = gain.ptr(), B = bias.ptr(), O = out.ptr();
    auto compute = [X, G, B, O, r, d, eps]() {
        const Precision p = precision();
        for (std::int64_t i = 0; i < r; ++i) {
            const double* xi = X->values.data() + i * d;
            double* yi = O->values.data() + i * d;
            double m = 0.0;
            for (std::int64_t j = 0; j < d; ++j) m += xi[j];
            m /= static_cast<double>(d);
            double v = 0.0;
            for (std::int64_t j = 0; j < d; ++j) v += (xi[j] - m) * (xi[j] - m);
            v /= static_cast<double>(d);
            const double rstd = 1.0 / std::sqrt(v + eps);
            for (std::int64_t j = 0; j < d; ++j) {
                const double xhat = (xi[j] - m) * rstd;
                yi[j] = quantize(xhat * G->values[static_cast<std::size_t>(j)] +
                                     B->values[static_cast<std::size_t>(j)],
                                 p);
            }
        }
    };
    compute();
    if (track({&x, &gain, &bias})) {
        out.set_requires_grad(true);
        const bool gx = x.requires_grad(), gg = gain.requires_grad(), gb = bias.requires_grad();
        detail::record_node({"layer_norm", {X, G, B}, O, compute,
                             [X, G, B, O, r, d, eps, gx, gg, gb]() {
            const Precision p = precision();
            if (gx) X->ensure_grad();
            if (gg) G->ensure_grad();
            if (gb) B->ensure_grad();
            const double invd = 1.0 / static_cast<double>(d);
            for (std::int64_t i = 0; i < r; ++i) {
                const double* xi = X->values.data() + i * d;
                const double* gy = O->grad.data() + i * d;
                double m = 0.0;
                for (std::int64_t j = 0; j < d; ++j) m += xi[j];
                m *= invd;
                double v = 0.0;
                for (std::int64_t j = 0; j < d; ++j) v += (xi[j] - m) * (xi[j] - m);
                v *= invd;
                const double rstd = 1.0 / std::sqrt(v + eps);
                double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
                for (std::int64_t j = 0; j < d; ++j) {
                    const double xhat = (xi[j] - m) * rstd;
                    const double dxhat = gy[j] * G->values[static_cast<std::size_t>(j)];
                    mean_dxhat += dxhat;
                    mean_dxhat_xhat += dxhat * xhat;
                }
                mean_dxhat *= invd;
                mean_dxhat_xhat *= invd;
                for (std::int64_t j = 0; j < d; ++j) {
                    const double xhat = (xi[j] - m) * rstd;
                    if (gx) {
                        const double dxhat = gy[j] * G->values[static_cast<std::size_t>(j)];
                        auto& slot = X->grad[static_cast<std::size_t>(i * d + j)];
                        slot = quantize(slot + rstd * (dxhat - mean_dxhat - xhat * mean_dxhat_xhat), p);
                    }
                    if (gg) {
                        auto& slot = G->grad[static_cast<std::size_t>(j)];
                        slot = quantize(slot + gy[j] * xhat, p);
                    }
                    if (gb) {
                        auto& slot = B->grad[static_cast<std::size_t>(j)];
                        slot = quantize(slot + gy[j], p);
                    }
                }
            }
        }});
    }
    return out;
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_rows: no inputs");
    const std::int64_t c = parts.front().cols();
    std::int64_t total = 0;
    bool any_grad = false;
    for (const auto& t : parts) {
        if (t.cols() != c) {
            throw ShapeError("concat_rows: column mismatch " + shape_str(t.shape()) + " vs " +
                             shape_str(parts.front().shape()));
        }
        total += t.rows();
        any_grad = any_grad || t.requires_grad();
    }
    Tensor out = Tensor::zeros({total, c});
    std::vector<Data> ins;
    ins.reserve(parts.size());
    for (const auto& t : parts) ins.push_back(t.ptr());
    Data O = out.ptr();
    auto compute = [ins, O]() {
        std::size_t off = 0;
        for (const auto& t : ins) {
            std::copy(t->values.begin(), t->values.end(), O->values.begin() + off);
            off += t->values.size();
        }
    };
    compute();
    if (grad_enabled() && any_grad) {
        out.set_requires_grad(true);
        detail::record_node({"concat_rows", ins, O, compute, [ins, O]() {
            const Precision p = precision();
            std::size_t off = 0;
            for (const auto& t : ins) {
                if (t->requires_grad) {
                    t->ensure_grad();
                    for (std::size_t i = 0; i < t->values.size(); ++i) {
                        t->grad[i] = quantize(t->grad[i] + O->grad[off + i], p);
                    }
                }
                off += t->values.size();
            }
        }});
    }
    return out;
}

Tensor slice_rows(const Tensor& x, std::int64_t start, std::int64_t count) {
    const std::int64_t r = x.rows(), c = x.cols();
    if (start < 0 || count <= 0 || start + count > r) {
        throw ShapeError("slice_rows: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of " + shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros({count, c});
    Data X = x.ptr(), O = out.ptr();
    auto compute = [X, O, start, c]() {
        std::copy(X->values.begin() + start * c,
                  X->values.begin() + start * c + static_cast<std::int64_t>(O->values.size()),
                  O->values.begin());
    };
    compute();
    if (track({&x})) {
        out.set_requires_grad(true);
        detail::record_node({"slice_rows", {X}, O, compute, [X, O, start, c]() {
            X->ensure_grad();
            const Precision p = precision();
            const std::size_t base = static_cast<std::size_t>(start * c);
            for (std::size_t i = 0; i < O->grad.size(); ++i) {
                X->grad[base + i] = quantize(X->grad[base + i] + O->grad[i], p);
            }
        }});
    }
    return out;
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw ShapeError("concat_cols: no inputs");
    const std::int64_t r = parts.front().rows();
    std::int64_t total = 0;
    bool any_grad = false;
    for (const auto& t : parts) {
        if (t.rows() != r) {
            throw ShapeError("concat_cols: row mismatch " + shape_str(t.shape()) + " vs " +
                             shape_str(parts.front().shape()));
        }
        total += t.cols();
        any_grad = any_grad || t.requires_grad();
    }
    Tensor out = Tensor::zeros({r, total});
    std::vector<Data> ins;
    ins.reserve(parts.size());
    for (const auto& t : parts) ins.push_back(t.ptr());
    Data O = out.ptr();
    auto compute = [ins, O, r, total]() {
        std::int64_t off = 0;
        for (const auto& t : ins) {
            const std::int64_t c = static_cast<std::int64_t>(t->values.size()) / r;
            for (std::int64_t i = 0; i < r; ++i) {
                std::copy(t->values.begin() + i * c, t->values.begin() + (i + 1) * c,
                          O->values.begin() + i * total + off);
            }
            off += c;
        }
    };
    compute();
    if (grad_enabled() && any_grad) {
        out.set_requires_grad(true);
        detail::record_node({"concat_cols", ins, O, compute, [ins, O, r, total]() {
            const Precision p = precision();
            std::int64_t off = 0;
            for (const auto& t : ins) {
                const std::int64_t c = static_cast<std::int64_t>(t->values.size()) / r;
                if (t->requires_grad) {
                    t->ensure_grad();
                    for (std::int64_t i = 0; i < r; ++i) {
                        for (std::int64_t j = 0; j < c; ++j) {
                            auto& slot = t->grad[static_cast<std::size_t>(i * c + j)];
                            slot = quantize(slot + O->grad[static_cast<std::size_t>(i * total + off + j)], p);
                        }
                    }
                }
                off += c;
            }
        }});
    }
    return out;
}

Tensor slice_cols(const Tensor& x, std::int64_t start, std::int64_t count) {
    const std::int64_t r = x.rows(), c = x.cols();
    if (start < 0 || count <= 0 || start + count > c) {
        throw ShapeError("slice_cols: range [" + std::to_string(start) + ", " +
                         std::to_string(start + count) + ") out of " + shape_str(x.shape()));
    }
    Tensor out = Tensor::zeros({r, count});
    Data X = x.ptr(), O = out.ptr();
    auto compute = [X, O, r, c, start, count]() {
        for (std::int64_t i = 0; i < r; ++i) {
            std::copy(X->values.begin() + i * c + start, X->values.begin() + i * c + start + count,
                      O->values.begin() + i * count);
        }
    };
    compute();
    if (track({&x})) {
        out.set_requires_grad(true);
        detail::record_node({"slice_cols", {X}, O, compute, [X, O, r, c, start, count]() {
            X->ensure_grad();
            const Precision p = precision();
            for (std::int64_t i = 0; i < r; ++i) {
                for (std::int64_t j = 0; j < count; ++j) {
                    auto& slot = X->grad[static_cast<std::size_t>(i * c + start + j)];
                    slot = quantize(slot + O->grad[static_cast<std::size_t>(i * count + j)], p);
                }
            }
        }});
    }
    return out;
}

Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets) {
    const std::int64_t m = logits.rows(), c = logits.cols();
    if (static_cast<std::int64_t>(targets.size()) != m) {
        throw ShapeError("cross_entropy: " + std::to_string(targets.size()) +
                         " targets for logits " + shape_str(logits.shape()));
    }
    for (int t : targets) {
        if (t < 0 || t >= c) throw ContractError("cross_entropy: target class out of range");
    }
    Tensor out = Tensor::zeros({1});
    Data X = logits.ptr(), O = out.ptr();
    auto compute = [X, O, m, c, targets]() {
        double loss = 0.0;
        for (std::int64_t i = 0; i < m; ++i) {
            const double* xi = X->values.data() + i * c;
            double mx = xi[0];
            for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
            double z = 0.0;
            for (std::int64_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
            loss += std::log(z) + mx - xi[targets[static_cast<std::size_t>(i)]];
        }
        O->values[0] = quantize(loss / static_cast<double>(m));
    };
    compute();
    if (track({&logits})) {
        out.set_requires_grad(true);
        detail::record_node({"cross_entropy", {X}, O, compute, [X, O, m, c, targets]() {
            X->ensure_grad();
            const Precision p = precision();
            const double g = O->grad[0] / static_cast<double>(m);
            for (std::int64_t i = 0; i < m; ++i) {
                const double* xi = X->values.data() + i * c;
                double mx = xi[0];
                for (std::int64_t j = 1; j < c; ++j) mx = std::max(mx, xi[j]);
                double z = 0.0;
                for (std::int64_t j = 0; j < c; ++j) z += std::exp(xi[j] - mx);
                for (std::int64_t j = 0; j < c; ++j) {
                    double soft = std::exp(xi[j] - mx) / z;
                    if (j == targets[static_cast<std::size_t>(i)]) soft -= 1.0;
                    auto& slot = X->grad[static_cast<std::size_t>(i * c + j)];
                    slot = quantize(slot + g * soft, p);
                }
            }
        }});
    }
    return out;
}

Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
    return add_rowwise(matmul(x, w), b);
}

Tensor dot(const Tensor& a, const Tensor& b) { return sum(mul(a, b)); }

Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps) {
    check_same_shape("cosine_similarity", a, b);
    Tensor num = dot(a, b);
    Tensor na = sqrt_(add_scalar(dot(a, a), eps));
    Tensor nb = sqrt_(add_scalar(dot(b, b), eps));
    return div(num, mul(na, nb));
}

Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            int heads, const AttentionParams& params) {
    const std::int64_t inner = params.wq.cols();
    if (heads <= 0 || inner % heads != 0) {
        throw ConfigError("attention: inner dimension " + std::to_string(inner) +
                          " not divisible by " + std::to_string(heads) + " heads");
    }
    if (params.wk.cols() != inner || params.wv.cols() != inner || params.wo.rows() != inner) {
        throw ShapeError("attention: projection widths disagree: wq " + shape_str(params.wq.shape()) +
                         ", wk " + shape_str(params.wk.shape()) + ", wv " +
                         shape_str(params.wv.shape()) + ", wo " + shape_str(params.wo.shape()));
    }
    if (k.rows() != v.rows()) {
        throw ShapeError("attention: keys " + shape_str(k.shape()) + " and values " +
                         shape_str(v.shape()) + " must share their length");
    }
    const std::int64_t dh = inner / heads;
    const double scl = 1.0 / std::sqrt(static_cast<double>(dh));

    Tensor qp = linear(q, params.wq, params.bq);
    Tensor kp = linear(k, params.wk, params.bk);
    Tensor vp = linear(v, params.wv, params.bv);

    std::vector<Tensor> head_outs;
    head_outs.reserve(static_cast<std::size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        Tensor qh = slice_cols(qp, h * dh, dh);
        Tensor kh = slice_cols(kp, h * dh, dh);
        Tensor vh = slice_cols(vp, h * dh, dh);
        Tensor scores = scale(matmul(qh, transpose(kh)), scl);
        Tensor weights = softmax(scores, 1);
        head_outs.push_back(matmul(weights, vh));
    }
    Tensor merged = heads == 1 ? head_outs.front() : concat_cols(head_outs);
    return linear(merged, params.wo, params.bo);
}

} // namespace frame::ops
