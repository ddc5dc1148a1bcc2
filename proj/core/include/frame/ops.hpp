#pragma once

#include "frame/tensor.hpp"

#include <vector>

namespace frame::ops {

// Elementwise; operands must have identical shapes (no broadcasting).
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor div(const Tensor& a, const Tensor& b);

Tensor add_scalar(const Tensor& a, double c);
Tensor scale(const Tensor& a, double c);
Tensor sqrt_(const Tensor& a);
Tensor gelu(const Tensor& a);

Tensor sum(const Tensor& a);  // scalar
Tensor mean(const Tensor& a); // scalar

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);

// x: [R x C], bias: [C]; adds bias to every row (the only broadcast form).
Tensor add_rowwise(const Tensor& x, const Tensor& bias);

// 1-D tensors use axis 0; 2-D tensors accept axis 0 or 1 (or -1 for last).
Tensor softmax(const Tensor& x, int axis = -1);

// x: [R x D] or [D]; gain/bias: [D]. Normalizes each row to zero mean and
// unit variance before the affine map.
Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& x, std::int64_t start, std::int64_t count);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_cols(const Tensor& x, std::int64_t start, std::int64_t count);

// logits: [M x C]; targets: class index per row. Mean negative log likelihood.
Tensor cross_entropy(const Tensor& logits, const std::vector<int>& targets);

// Composites built from the primitives above.
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b);
Tensor dot(const Tensor& a, const Tensor& b); // scalar
Tensor cosine_similarity(const Tensor& a, const Tensor& b, double eps = 1e-12);

struct AttentionParams {
    Tensor wq, bq; // [Dq x A], [A]
    Tensor wk, bk; // [Dk x A], [A]
    Tensor wv, bv; // [Dv x A], [A]
    Tensor wo, bo; // [A x Do], [Do]
};

// Scaled dot-product attention with `heads` heads. Queries may differ from
// keys in both length and width; keys and values share their length.
Tensor multi_head_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                            int heads, const AttentionParams& params);

} // namespace frame::ops
