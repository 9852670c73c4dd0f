#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace vpnf::training {

struct AdamOptions {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Adam with bias correction. One instance per parameter vector.
class Adam {
public:
    Adam() = default;
    Adam(Eigen::Index n, AdamOptions opt = {}) : opt_(opt), m_(Eigen::VectorXd::Zero(n)), v_(Eigen::VectorXd::Zero(n)) {}

    void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::Ref<const Eigen::VectorXd>& grad, double lr) {
        ++t_;
        m_ = opt_.beta1 * m_ + (1.0 - opt_.beta1) * grad;
        v_ = opt_.beta2 * v_ + (1.0 - opt_.beta2) * grad.cwiseAbs2();
        const double bc1 = 1.0 - std::pow(opt_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(opt_.beta2, static_cast<double>(t_));
        params.array() -= lr * (m_.array() / bc1) / ((v_.array() / bc2).sqrt() + opt_.eps);
    }
    long steps() const { return t_; }

private:
    AdamOptions opt_;
    Eigen::VectorXd m_, v_;
    long t_ = 0;
};

// Cosine annealing from lr0 at iteration 0 to lr_min at `total`.
inline double cosine_lr(long iteration, long total, double lr0, double lr_min) {
    if (total <= 0) return lr0;
    const double phase = std::min(1.0, static_cast<double>(iteration) / static_cast<double>(total));
    return lr_min + 0.5 * (lr0 - lr_min) * (1.0 + std::cos(std::numbers::pi * phase));
}

}  // namespace vpnf::training
