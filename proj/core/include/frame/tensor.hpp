#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace frame {

// Scalar precision is a single global switch. Values are held as double;
// in f32 mode every op output and gradient accumulation is rounded through
// IEEE single precision, so a run at f32 behaves like a 32-bit pipeline
// while the same binary can run tests at full 64-bit.
enum class Precision { f32, f64 };

void set_precision(Precision p);
Precision precision();

inline double quantize(double v, Precision p) {
    return p == Precision::f32 ? static_cast<double>(static_cast<float>(v)) : v;
}
double quantize(double v);

struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Shape = std::vector<std::int64_t>;

std::int64_t shape_numel(const Shape& s);
std::string shape_str(const Shape& s);
bool same_shape(const Shape& a, const Shape& b);

struct TensorData {
    Shape shape;
    std::vector<double> values;
    std::vector<double> grad; // empty until backward touches it
    bool requires_grad = false;

    void ensure_grad();
};

// Value-semantics handle over shared storage. Tensors are treated as
// immutable once they have entered a forward computation; leaf values may
// be mutated between steps (optimizer updates, finite-difference probes).
class Tensor {
public:
    Tensor() = default;
    Tensor(Shape shape, std::vector<double> values, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);

    bool defined() const { return static_cast<bool>(data_); }
    const Shape& shape() const;
    std::int64_t numel() const;
    std::int64_t rows() const; // 2-D only
    std::int64_t cols() const; // 2-D only

    std::vector<double>& values();
    const std::vector<double>& values() const;
    double at(std::int64_t r, std::int64_t c) const;
    double item() const; // scalar tensors only

    bool requires_grad() const;
    Tensor& set_requires_grad(bool flag);

    bool has_grad() const;
    const std::vector<double>& grad() const; // throws if absent
    void zero_grad();

    Tensor clone() const; // deep copy of values, grad dropped

    const std::shared_ptr<TensorData>& ptr() const { return data_; }

private:
    std::shared_ptr<TensorData> data_;
};

// One recorded operation: enough to replay the forward computation and to
// push gradients from the output back to the inputs.
struct TapeNode {
    const char* op = "";
    std::vector<std::shared_ptr<TensorData>> inputs;
    std::shared_ptr<TensorData> output;
    std::function<void()> replay;
    std::function<void()> backward;
};

// Ordered list of operation nodes, inputs always preceding their consumers.
// Confined to one training thread.
class ComputationRecord {
public:
    void push(TapeNode node) { nodes_.push_back(std::move(node)); }
    std::size_t size() const { return nodes_.size(); }
    bool empty() const { return nodes_.empty(); }
    void clear() { nodes_.clear(); }

    // Recomputes every recorded output from the current input values, in
    // recording order. Bit-identical to the original forward pass under the
    // same precision when inputs are unchanged.
    void replay() const;

    const std::vector<TapeNode>& nodes() const { return nodes_; }

private:
    std::vector<TapeNode> nodes_;
};

ComputationRecord& active_record(); // thread-local tape
bool grad_enabled();

class NoGradScope {
public:
    NoGradScope();
    ~NoGradScope();
    NoGradScope(const NoGradScope&) = delete;
    NoGradScope& operator=(const NoGradScope&) = delete;

private:
    bool saved_;
};

// Reverse-mode sweep from a scalar loss. Accumulates gradients into every
// requires_grad leaf reachable from the loss, then clears the record.
void backward(const Tensor& loss);

namespace detail {
void set_grad_enabled(bool flag);
void record_node(TapeNode node);
} // namespace detail

} // namespace frame
