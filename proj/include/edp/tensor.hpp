#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

#include "edp/common.hpp"

namespace edp {

using Shape = std::vector<int>;

inline std::int64_t shape_numel(const Shape& s) {
    std::int64_t n = 1;
    for (int d : s) n *= d;
    return n;
}

struct TensorImpl {
    Shape shape;
    std::vector<double> val;
    std::vector<double> grad;  // allocated on first accumulation
    bool requires_grad = false;
};

// Shared-storage handle; copies alias the same values and gradient.
class Tensor {
  public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false)
        : impl_(std::make_shared<TensorImpl>()) {
        impl_->shape = std::move(shape);
        impl_->val.assign(static_cast<size_t>(shape_numel(impl_->shape)), 0.0);
        impl_->requires_grad = requires_grad;
    }
    static Tensor from(Shape shape, std::vector<double> values) {
        Tensor t(std::move(shape));
        if (static_cast<std::int64_t>(values.size()) != t.size())
            throw std::invalid_argument("Tensor::from: value count does not match shape");
        t.impl_->val = std::move(values);
        return t;
    }

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int dim(int i) const { return impl_->shape[static_cast<size_t>(i)]; }
    int ndim() const { return static_cast<int>(impl_->shape.size()); }
    std::int64_t size() const { return static_cast<std::int64_t>(impl_->val.size()); }

    double* data() { return impl_->val.data(); }
    const double* data() const { return impl_->val.data(); }
    std::vector<double>& values() { return impl_->val; }
    const std::vector<double>& values() const { return impl_->val; }

    bool has_grad() const { return !impl_->grad.empty(); }
    std::vector<double>& grad() {
        if (impl_->grad.empty()) impl_->grad.assign(impl_->val.size(), 0.0);
        return impl_->grad;
    }
    void zero_grad() {
        if (!impl_->grad.empty()) std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
    }
    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool v) { impl_->requires_grad = v; }

    double item() const {
        if (size() != 1) throw std::invalid_argument("Tensor::item: not a scalar");
        return impl_->val[0];
    }

    bool same_storage(const Tensor& o) const { return impl_ == o.impl_; }

  private:
    std::shared_ptr<TensorImpl> impl_;
};

// Ordered record of executed primitives. backward() replays adjoints in exact
// reverse order and consumes the record; a second backward on the same record
// is an error.
class Tape {
  public:
    void record(std::function<void()> backward_fn) {
        nodes_.push_back(std::move(backward_fn));
    }

    void backward(Tensor loss) {
        if (consumed_) throw std::logic_error("Tape::backward called twice on the same record");
        if (loss.size() != 1) throw std::invalid_argument("Tape::backward: loss must be scalar");
        loss.grad()[0] += 1.0;
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) (*it)();
        consumed_ = true;
        nodes_.clear();
    }

    bool consumed() const { return consumed_; }
    size_t num_nodes() const { return nodes_.size(); }

    void clear() {
        nodes_.clear();
        consumed_ = false;
    }

  private:
    std::vector<std::function<void()>> nodes_;
    bool consumed_ = false;
};

}  // namespace edp
