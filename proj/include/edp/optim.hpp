#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "edp/tensor.hpp"

namespace edp {

// Named trainable tensors, iterated in insertion order everywhere (updates,
// checkpoints, initialization) so runs are reproducible.
struct ParamSet {
    std::vector<std::pair<std::string, Tensor>> items;

    Tensor& add(const std::string& name, Tensor t) {
        t.set_requires_grad(true);
        items.emplace_back(name, std::move(t));
        return items.back().second;
    }
    Tensor* find(const std::string& name) {
        for (auto& [n, t] : items)
            if (n == name) return &t;
        return nullptr;
    }
    void zero_grad() {
        for (auto& [n, t] : items) t.zero_grad();
    }
    std::int64_t count() const {
        std::int64_t c = 0;
        for (auto& [n, t] : items) c += t.size();
        return c;
    }
};

// Adam with bias correction, eps fixed at 1e-8.
class Adam {
  public:
    Adam(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999)
        : lr_(lr), beta1_(beta1), beta2_(beta2) {}

    void step(ParamSet& params) {
        if (m_.empty()) {
            for (auto& [n, t] : params.items) {
                m_.emplace_back(t.size(), 0.0);
                v_.emplace_back(t.size(), 0.0);
            }
        }
        ++t_;
        const double bc1 = 1.0 - std::pow(beta1_, t_);
        const double bc2 = 1.0 - std::pow(beta2_, t_);
        for (size_t pi = 0; pi < params.items.size(); ++pi) {
            Tensor& p = params.items[pi].second;
            std::vector<double>& g = p.grad();
            std::vector<double>& m = m_[pi];
            std::vector<double>& v = v_[pi];
            double* w = p.data();
            for (size_t i = 0; i < g.size(); ++i) {
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * g[i];
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i];
                w[i] -= lr_ * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + kEps);
            }
        }
    }

    long t() const { return t_; }
    static constexpr double kEps = 1e-8;

    // Exposed for checkpointing the optimizer alongside parameters.
    std::vector<std::vector<double>>& moment1() { return m_; }
    std::vector<std::vector<double>>& moment2() { return v_; }
    void set_t(long t) { t_ = t; }

  private:
    double lr_, beta1_, beta2_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

// Max over coordinates of |analytic - numeric| / max(|analytic|,|numeric|,1e-8),
// central differences with step h. f must be deterministic and scalar-valued.
double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor x, double h);

// Fan-in scaled uniform init, +-sqrt(6/fan_in).
void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng);

}  // namespace edp
