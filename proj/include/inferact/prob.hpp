#pragma once

#include "inferact/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace inferact {

/// Floor applied to every log() argument so degenerate (zero) probabilities in
/// learned matrices produce large finite penalties instead of -inf.
inline constexpr double kLogFloor = 1e-16;

/// Drift thresholds for vectors that are supposed to be normalized already:
/// below kDriftRenorm the vector is accepted as-is (then renormalized anyway),
/// above kDriftError the caller has a genuine bug.
inline constexpr double kDriftRenorm = 1e-9;
inline constexpr double kDriftError = 1e-6;

inline double safe_log(double x) { return std::log(x < kLogFloor ? kLogFloor : x); }

/// x * log(y) with the convention 0 * log(0) = 0; y is floored otherwise.
inline double xlogy(double x, double y) { return x == 0.0 ? 0.0 : x * safe_log(y); }

/// Numerically stable softmax (max-subtraction). Throws on empty or non-finite input.
template <typename Derived>
Vector softmax(const Eigen::MatrixBase<Derived>& values) {
    if (values.size() == 0) throw std::invalid_argument("softmax: empty input");
    Vector v = values;
    if (!v.allFinite()) throw std::invalid_argument("softmax: non-finite entry");
    const double shift = v.maxCoeff();
    Vector e = (v.array() - shift).exp();
    return e / e.sum();
}

/// Exact ln(softmax(values)): values - logsumexp(values). Unlike
/// log(softmax(...)) this cannot underflow for strongly negative logits.
template <typename Derived>
Vector log_softmax(const Eigen::MatrixBase<Derived>& values) {
    if (values.size() == 0) throw std::invalid_argument("log_softmax: empty input");
    Vector v = values;
    if (!v.allFinite()) throw std::invalid_argument("log_softmax: non-finite entry");
    const double shift = v.maxCoeff();
    const double lse = shift + std::log((v.array() - shift).exp().sum());
    return (v.array() - lse).matrix();
}

/// KL divergence D[q||p] in nats. Requires equal lengths and absolute
/// continuity (q_i > 0 implies p_i > 0); violations throw.
double kl_divergence(const Vector& q, const Vector& p);

/// Shannon entropy in nats, with 0*ln(0) = 0.
template <typename Derived>
double entropy(const Eigen::MatrixBase<Derived>& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) {
        const double pi = p(i);
        if (pi > 0.0) h -= pi * std::log(pi);
    }
    return h < 0.0 ? 0.0 : h;
}

/// Flattened product distribution over a list of factors, row-major
/// (first factor varies slowest). Length = product of factor lengths.
Vector joint_outer(const std::vector<Vector>& factors);

/// Outer product of an observation distribution with per-factor posteriors:
/// shape [len(o), len(f0), len(f1), ...], total mass = product of input masses.
DenseTensor outer_product(const Vector& o, const std::vector<Vector>& factors);

/// Divide by the sum. Throws if the sum is not positive.
Vector normalized(const Vector& v);

/// Renormalize a vector that should already sum to 1; drift beyond
/// kDriftError throws std::logic_error.
Vector renormalized(const Vector& v);

/// True iff entries are non-negative and sum to 1 within tol.
bool is_categorical(const Vector& v, double tol = kDriftRenorm);

// -- Seeded randomness -------------------------------------------------------
// Draws are built directly on mt19937_64 output so sequences are identical
// across standard libraries.

uint64_t splitmix64(uint64_t x);
uint64_t mix_seed(uint64_t seed, uint64_t stream);

/// Uniform double in [0, 1).
inline double runif(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (two uniforms per call, no caching).
double rnorm(std::mt19937_64& rng);

/// Index draw from a categorical distribution.
int sample_categorical(const Vector& probs, std::mt19937_64& rng);

}  // namespace inferact
