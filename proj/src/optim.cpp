#include "edp/optim.hpp"

#include <cmath>

namespace edp {

double grad_check(const std::function<Tensor(Tape&, Tensor&)>& f, Tensor x, double h) {
    Tape tape;
    x.set_requires_grad(true);
    x.zero_grad();
    Tensor loss = f(tape, x);
    tape.backward(loss);
    std::vector<double> analytic = x.grad();

    double max_rel = 0.0;
    for (std::int64_t i = 0; i < x.size(); ++i) {
        double orig = x.data()[i];
        Tape t1, t2;
        x.data()[i] = orig + h;
        double fp = f(t1, x).item();
        x.data()[i] = orig - h;
        double fm = f(t2, x).item();
        x.data()[i] = orig;
        double numeric = (fp - fm) / (2.0 * h);
        double a = analytic[static_cast<size_t>(i)];
        double rel = std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
    }
    return max_rel;
}

void init_uniform_fanin(Tensor& t, int fan_in, Rng& rng) {
    double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (std::int64_t i = 0; i < t.size(); ++i) t.data()[i] = dist(rng);
}

}  // namespace edp
