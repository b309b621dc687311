#pragma once

#include "inferact/types.hpp"

#include <nlohmann/json_fwd.hpp>

#include <string>
#include <utility>
#include <vector>

namespace inferact {

/// Likelihood mapping for one observation modality. Columns enumerate the
/// joint states of the factors in `deps` (row-major, first dep slowest);
/// every column is a categorical distribution over observation indices.
struct LikelihoodTensor {
    Matrix values;               // num_obs x prod(dep_cards)
    std::vector<int> deps;       // state-factor indices this modality depends on
    std::vector<int> dep_cards;  // cardinality of each dep, same order

    int num_obs() const { return static_cast<int>(values.rows()); }
    Eigen::Index num_joint_states() const { return values.cols(); }
};

/// Transition model for one state factor: one column-stochastic matrix per
/// control, column j = distribution over next states given previous state j.
struct TransitionTensor {
    std::vector<Matrix> controls;

    int card() const { return controls.empty() ? 0 : static_cast<int>(controls[0].rows()); }
    int num_controls() const { return static_cast<int>(controls.size()); }
};

struct GenerativeModel {
    std::vector<int> factor_cards;
    std::vector<LikelihoodTensor> A;  // one per modality
    std::vector<TransitionTensor> B;  // one per factor
    std::vector<Vector> C;            // log-preferences, one per modality
    std::vector<Vector> D;            // initial state priors, one per factor

    int num_factors() const { return static_cast<int>(factor_cards.size()); }
    int num_modalities() const { return static_cast<int>(A.size()); }
};

/// Dirichlet concentrations over A (and B), plus the learning masks fixed at
/// construction from the initial support: entries with mask 0 never update.
struct DirichletState {
    std::vector<Matrix> pA;
    std::vector<std::vector<Matrix>> pB;
    std::vector<Matrix> pA_mask;
    std::vector<std::vector<Matrix>> pB_mask;

    /// Derives masks from the current (initial) support of pA/pB.
    void reset_masks();

    double total_pA() const;
};

struct ModelDims {
    int prompts = 33;
    int searches = 11;
    int info_levels = 3;
    int quality_levels = 11;
};

/// Paper-model factor layout.
inline constexpr int kPromptFactor = 0;
inline constexpr int kSearchFactor = 1;
inline constexpr int kInfoFactor = 2;
inline constexpr int kNumFactors = 3;
inline constexpr int kNumModalities = 7;
inline constexpr int kInfoModality = 6;

/// Every normalization / shape / dependency violation, with tensor
/// coordinates in the message. Empty result means the model is valid.
std::vector<std::string> validate_model(const GenerativeModel& model);

/// The 33/11/3 research-agent model (or a dims override): uniform A and D,
/// quadratic quality preferences anchored at -16, structured info preferences,
/// all-ones pA, and pB with 0.1 biases for prompt persistence, search decay
/// and info forward progression. Prompt/search transitions use deterministic
/// one-hot columns for explicit controls and the normalized biased prior for
/// control 0; the info factor's single control starts at its prior mean.
std::pair<GenerativeModel, DirichletState> build_paper_model(const ModelDims& dims = {});

/// Column-normalized Dirichlet means, congruent to pA / pB.
struct NormalizedDirichlet {
    std::vector<Matrix> A;
    std::vector<std::vector<Matrix>> B;
};
NormalizedDirichlet normalize_dirichlet(const DirichletState& d);

/// Log-preference vector for the quality modalities: -16 at level 0, then
/// quadratically increasing, scaled so the top level scores 20.
Vector quality_preferences(int quality_levels);

// -- Serialization (schema "inferact-model/1") --------------------------------

nlohmann::ordered_json model_to_json(const GenerativeModel& model,
                                     const DirichletState* dirichlet = nullptr);
std::pair<GenerativeModel, DirichletState> model_from_json(const nlohmann::json& j);

/// One CSV per likelihood matrix: rows = observation index, columns =
/// flattened state index. Files are named <prefix>A<m>.csv.
void write_model_csv(const GenerativeModel& model, const std::string& prefix);

std::string matrix_to_csv(const Matrix& m);

}  // namespace inferact
