#include "inferact/prob.hpp"

#include <cmath>
#include <numbers>

namespace inferact {

double kl_divergence(const Vector& q, const Vector& p) {
    if (q.size() != p.size()) throw std::invalid_argument("kl_divergence: length mismatch");
    double kl = 0.0;
    for (Eigen::Index i = 0; i < q.size(); ++i) {
        if (q[i] == 0.0) continue;
        if (p[i] <= 0.0)
            throw std::invalid_argument("kl_divergence: support violation (q > 0 where p = 0)");
        kl += q[i] * (std::log(q[i]) - std::log(p[i]));
    }
    // Exact-equality inputs can land a hair below zero in floating point.
    return (kl < 0.0 && kl > -1e-9) ? 0.0 : kl;
}

Vector joint_outer(const std::vector<Vector>& factors) {
    if (factors.empty()) throw std::invalid_argument("joint_outer: empty factor list");
    Vector acc = Vector::Ones(1);
    for (const Vector& f : factors) {
        Vector next(acc.size() * f.size());
        for (Eigen::Index i = 0; i < acc.size(); ++i)
            next.segment(i * f.size(), f.size()) = acc[i] * f;
        acc = std::move(next);
    }
    return acc;
}

DenseTensor outer_product(const Vector& o, const std::vector<Vector>& factors) {
    if (factors.empty()) throw std::invalid_argument("outer_product: empty factor list");
    DenseTensor t;
    t.shape.push_back(static_cast<int>(o.size()));
    for (const Vector& f : factors) t.shape.push_back(static_cast<int>(f.size()));
    const Vector joint = joint_outer(factors);
    t.data.resize(o.size() * joint.size());
    for (Eigen::Index i = 0; i < o.size(); ++i)
        t.data.segment(i * joint.size(), joint.size()) = o[i] * joint;
    return t;
}

Vector normalized(const Vector& v) {
    const double s = v.sum();
    if (!(s > 0.0)) throw std::invalid_argument("normalized: non-positive total mass");
    return v / s;
}

Vector renormalized(const Vector& v) {
    const double s = v.sum();
    if (std::abs(s - 1.0) > kDriftError)
        throw std::logic_error("renormalized: probability mass drifted beyond tolerance");
    return v / s;
}

bool is_categorical(const Vector& v, double tol) {
    if (v.size() == 0) return false;
    if ((v.array() < 0.0).any()) return false;
    return std::abs(v.sum() - 1.0) <= tol;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

uint64_t mix_seed(uint64_t seed, uint64_t stream) { return splitmix64(seed ^ splitmix64(stream)); }

double rnorm(std::mt19937_64& rng) {
    const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;  // (0, 1]
    const double u2 = runif(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

int sample_categorical(const Vector& probs, std::mt19937_64& rng) {
    if (probs.size() == 0) throw std::invalid_argument("sample_categorical: empty distribution");
    const double u = runif(rng);
    double cum = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        cum += probs[i];
        if (u < cum) return static_cast<int>(i);
    }
    return static_cast<int>(probs.size() - 1);
}

}  // namespace inferact
