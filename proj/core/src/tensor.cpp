#include "frame/tensor.hpp"

#include <atomic>
#include <sstream>

namespace frame {

namespace {
std::atomic<Precision> g_precision{Precision::f64};
thread_local bool t_grad_enabled = true;
thread_local ComputationRecord t_record;
} // namespace

void set_precision(Precision p) { g_precision.store(p); }
Precision precision() { return g_precision.load(); }
double quantize(double v) { return quantize(v, g_precision.load()); }

std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (auto d : s) n *= d;
    return n;
}

std::string shape_str(const Shape& s) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i) os << "x";
        os << s[i];
    }
    os << "]";
    return os.str();
}

bool same_shape(const Shape& a, const Shape& b) { return a == b; }

void TensorData::ensure_grad() {
    if (grad.empty()) grad.assign(values.size(), 0.0);
}

Tensor::Tensor(Shape shape, std::vector<double> values, bool requires_grad) {
    for (auto d : shape) {
        if (d <= 0) throw ShapeError("tensor dimensions must be positive, got " + shape_str(shape));
    }
    if (static_cast<std::int64_t>(values.size()) != shape_numel(shape)) {
        throw ShapeError("data length " + std::to_string(values.size()) +
                         " does not match shape " + shape_str(shape));
    }
    data_ = std::make_shared<TensorData>();
    data_->shape = std::move(shape);
    data_->values = std::move(values);
    data_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    auto n = shape_numel(shape);
    return Tensor(std::move(shape), std::vector<double>(static_cast<std::size_t>(n), value), requires_grad);
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor(Shape{1}, std::vector<double>{value}, requires_grad);
}

const Shape& Tensor::shape() const {
    if (!data_) throw ContractError("use of undefined tensor");
    return data_->shape;
}

std::int64_t Tensor::numel() const { return shape_numel(shape()); }

std::int64_t Tensor::rows() const {
    const auto& s = shape();
    if (s.size() != 2) throw ShapeError("rows() requires a 2-D tensor, got " + shape_str(s));
    return s[0];
}

std::int64_t Tensor::cols() const {
    const auto& s = shape();
    if (s.size() != 2) throw ShapeError("cols() requires a 2-D tensor, got " + shape_str(s));
    return s[1];
}

std::vector<double>& Tensor::values() {
    if (!data_) throw ContractError("use of undefined tensor");
    return data_->values;
}

const std::vector<double>& Tensor::values() const {
    if (!data_) throw ContractError("use of undefined tensor");
    return data_->values;
}

double Tensor::at(std::int64_t r, std::int64_t c) const {
    return values()[static_cast<std::size_t>(r * cols() + c)];
}

double Tensor::item() const {
    if (numel() != 1) throw ContractError("item() requires a scalar tensor, got " + shape_str(shape()));
    return values()[0];
}

bool Tensor::requires_grad() const { return data_ && data_->requires_grad; }

Tensor& Tensor::set_requires_grad(bool flag) {
    if (!data_) throw ContractError("use of undefined tensor");
    data_->requires_grad = flag;
    return *this;
}

bool Tensor::has_grad() const { return data_ && !data_->grad.empty(); }

const std::vector<double>& Tensor::grad() const {
    if (!has_grad()) throw ContractError("tensor has no gradient");
    return data_->grad;
}

void Tensor::zero_grad() {
    if (data_) data_->grad.clear();
}

Tensor Tensor::clone() const {
    return Tensor(shape(), values(), requires_grad());
}

void ComputationRecord::replay() const {
    for (const auto& node : nodes_) {
        if (node.replay) node.replay();
    }
}

ComputationRecord& active_record() { return t_record; }
bool grad_enabled() { return t_grad_enabled; }

NoGradScope::NoGradScope() : saved_(t_grad_enabled) { t_grad_enabled = false; }
NoGradScope::~NoGradScope() { t_grad_enabled = saved_; }

void detail::set_grad_enabled(bool flag) { t_grad_enabled = flag; }

void detail::record_node(TapeNode node) { t_record.push(std::move(node)); }

void backward(const Tensor& loss) {
    if (!loss.defined() || loss.numel() != 1) {
        throw ContractError("backward requires a scalar loss, got " +
                            (loss.defined() ? shape_str(loss.shape()) : std::string("<undefined>")));
    }
    if (!loss.requires_grad()) {
        throw ContractError("backward requires a loss produced through recorded operations");
    }
    auto& record = t_record;
    loss.ptr()->ensure_grad();
    loss.ptr()->grad[0] = quantize(1.0);
    const auto& nodes = record.nodes();
    for (auto it = nodes.rbegin(); it != nodes.rend(); ++it) {
        // Nodes whose output never received a gradient are not ancestors of
        // the loss; skipping them keeps side computations out of the sweep.
        if (it->output->grad.empty()) continue;
        if (it->backward) it->backward();
    }
    record.clear();
}

} // namespace frame
