#include "inferact/model.hpp"

#include "inferact/prob.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace inferact {

namespace {

Eigen::Index product_of(const std::vector<int>& cards) {
    Eigen::Index p = 1;
    for (int c : cards) p *= c;
    return p;
}

bool column_is_categorical(const Eigen::Ref<const Vector>& col) {
    return (col.array() >= 0.0).all() && std::abs(col.sum() - 1.0) <= kDriftRenorm;
}

}  // namespace

void DirichletState::reset_masks() {
    pA_mask.clear();
    pB_mask.clear();
    for (const Matrix& m : pA) pA_mask.push_back((m.array() > 0.0).cast<double>());
    for (const auto& factor : pB) {
        std::vector<Matrix> masks;
        for (const Matrix& m : factor) masks.push_back((m.array() > 0.0).cast<double>());
        pB_mask.push_back(std::move(masks));
    }
}

double DirichletState::total_pA() const {
    double t = 0.0;
    for (const Matrix& m : pA) t += m.sum();
    return t;
}

std::vector<std::string> validate_model(const GenerativeModel& model) {
    std::vector<std::string> out;
    auto add = [&out](const std::string& msg) { out.push_back(msg); };

    const int F = model.num_factors();
    const int M = model.num_modalities();
    if (static_cast<int>(model.C.size()) != M)
        add("C has " + std::to_string(model.C.size()) + " modalities, A has " + std::to_string(M));
    if (static_cast<int>(model.B.size()) != F)
        add("B has " + std::to_string(model.B.size()) + " factors, expected " + std::to_string(F));
    if (static_cast<int>(model.D.size()) != F)
        add("D has " + std::to_string(model.D.size()) + " factors, expected " + std::to_string(F));

    for (int m = 0; m < M; ++m) {
        const LikelihoodTensor& a = model.A[m];
        const std::string tag = "A[" + std::to_string(m) + "]";
        if (a.deps.empty()) {
            add(tag + " has no factor dependencies");
            continue;
        }
        if (a.deps.size() != a.dep_cards.size()) {
            add(tag + " deps/dep_cards length mismatch");
            continue;
        }
        bool deps_ok = true;
        for (std::size_t k = 0; k < a.deps.size(); ++k) {
            const int f = a.deps[k];
            if (f < 0 || f >= F) {
                add(tag + " deps[" + std::to_string(k) + "] references factor " + std::to_string(f) +
                    " of a " + std::to_string(F) + "-factor model");
                deps_ok = false;
            } else if (a.dep_cards[k] != model.factor_cards[static_cast<std::size_t>(f)]) {
                add(tag + " dep_cards[" + std::to_string(k) + "] = " + std::to_string(a.dep_cards[k]) +
                    " but factor " + std::to_string(f) + " has cardinality " +
                    std::to_string(model.factor_cards[static_cast<std::size_t>(f)]));
                deps_ok = false;
            }
        }
        if (!deps_ok) continue;
        if (a.values.cols() != product_of(a.dep_cards)) {
            add(tag + " has " + std::to_string(a.values.cols()) + " columns, expected " +
                std::to_string(product_of(a.dep_cards)));
            continue;
        }
        if (m < static_cast<int>(model.C.size())) {
            if (model.C[m].size() != a.values.rows())
                add("C[" + std::to_string(m) + "] length " + std::to_string(model.C[m].size()) +
                    " does not match " + tag + " rows " + std::to_string(a.values.rows()));
            if (!model.C[m].allFinite()) add("C[" + std::to_string(m) + "] has non-finite entries");
        }
        for (Eigen::Index c = 0; c < a.values.cols(); ++c) {
            if (!column_is_categorical(a.values.col(c)))
                add(tag + " column " + std::to_string(c) + " sums to " +
                    std::to_string(a.values.col(c).sum()) + " (expected 1)");
        }
    }

    for (int f = 0; f < F && f < static_cast<int>(model.B.size()); ++f) {
        const TransitionTensor& b = model.B[f];
        const int card = model.factor_cards[static_cast<std::size_t>(f)];
        const std::string tag = "B[" + std::to_string(f) + "]";
        if (b.controls.empty()) {
            add(tag + " has no controls");
            continue;
        }
        for (int u = 0; u < b.num_controls(); ++u) {
            const Matrix& mat = b.controls[static_cast<std::size_t>(u)];
            if (mat.rows() != card || mat.cols() != card) {
                add(tag + " control " + std::to_string(u) + " has shape " + std::to_string(mat.rows()) +
                    "x" + std::to_string(mat.cols()) + ", expected " + std::to_string(card) + "x" +
                    std::to_string(card));
                continue;
            }
            for (Eigen::Index c = 0; c < mat.cols(); ++c) {
                if (!column_is_categorical(mat.col(c)))
                    add(tag + " control " + std::to_string(u) + " column " + std::to_string(c) +
                        " sums to " + std::to_string(mat.col(c).sum()) + " (expected 1)");
            }
        }
    }

    for (int f = 0; f < F && f < static_cast<int>(model.D.size()); ++f) {
        const int card = model.factor_cards[static_cast<std::size_t>(f)];
        if (model.D[f].size() != card)
            add("D[" + std::to_string(f) + "] length " + std::to_string(model.D[f].size()) +
                ", expected " + std::to_string(card));
        else if (!is_categorical(model.D[f]))
            add("D[" + std::to_string(f) + "] is not a distribution (sum " +
                std::to_string(model.D[f].sum()) + ")");
    }

    return out;
}

Vector quality_preferences(int quality_levels) {
    Vector c(quality_levels);
    c[0] = -16.0;
    const double top = static_cast<double>(quality_levels - 1);
    for (int q = 1; q < quality_levels; ++q) {
        const double x = static_cast<double>(q) / top;
        c[q] = 2.0 * x * x * 10.0;
    }
    return c;
}

std::pair<GenerativeModel, DirichletState> build_paper_model(const ModelDims& dims) {
    if (dims.prompts < 2 || dims.searches < 2 || dims.info_levels < 2 || dims.quality_levels < 2)
        throw std::invalid_argument("build_paper_model: all dims must be >= 2");

    const int P = dims.prompts;
    const int S = dims.searches;
    const int I = dims.info_levels;
    const int Q = dims.quality_levels;

    GenerativeModel model;
    model.factor_cards = {P, S, I};

    // Seven modalities: three prompt-quality, three search-quality, one info.
    for (int m = 0; m < kNumModalities; ++m) {
        LikelihoodTensor a;
        if (m < 3) {
            a.deps = {kPromptFactor};
            a.dep_cards = {P};
            a.values = Matrix::Constant(Q, P, 1.0 / Q);
        } else if (m < 6) {
            a.deps = {kSearchFactor};
            a.dep_cards = {S};
            a.values = Matrix::Constant(Q, S, 1.0 / Q);
        } else {
            a.deps = {kInfoFactor};
            a.dep_cards = {I};
            a.values = Matrix::Constant(I, I, 1.0 / I);
        }
        model.A.push_back(std::move(a));
    }

    for (int m = 0; m < 6; ++m) model.C.push_back(quality_preferences(Q));
    if (I == 3) {
        model.C.push_back((Vector(3) << -32.0, 8.0, 64.0).finished());
    } else {
        model.C.push_back(Vector::LinSpaced(I, -32.0, 64.0));
    }

    for (int card : model.factor_cards)
        model.D.push_back(Vector::Constant(card, 1.0 / card));

    DirichletState d;
    for (const LikelihoodTensor& a : model.A)
        d.pA.push_back(Matrix::Ones(a.values.rows(), a.values.cols()));

    // pB priors: base 1.0 plus 0.1 biases (prompt persistence and search decay
    // under no-action, info forward progression).
    std::vector<Matrix> pb_prompt(static_cast<std::size_t>(P) + 1, Matrix::Ones(P, P));
    pb_prompt[0] += 0.1 * Matrix::Identity(P, P);
    std::vector<Matrix> pb_search(static_cast<std::size_t>(S) + 1, Matrix::Ones(S, S));
    pb_search[0].row(0).array() += 0.1;
    std::vector<Matrix> pb_info(1, Matrix::Ones(I, I));
    for (int j = 0; j < I; ++j) pb_info[0](std::min(j + 1, I - 1), j) += 0.1;
    d.pB = {pb_prompt, pb_search, pb_info};
    d.reset_masks();

    // Agent transitions. Explicit prompt/search controls relocate the factor
    // deterministically. Under no-action the prompt state persists exactly,
    // while the search state follows the normalized decay-biased prior.
    TransitionTensor b_prompt;
    b_prompt.controls.push_back(Matrix::Identity(P, P));
    for (int p = 1; p <= P; ++p) {
        Matrix det = Matrix::Zero(P, P);
        det.row(p - 1).setOnes();
        b_prompt.controls.push_back(std::move(det));
    }
    TransitionTensor b_search;
    b_search.controls.push_back(pb_search[0] / pb_search[0].col(0).sum());
    for (int s = 1; s <= S; ++s) {
        Matrix det = Matrix::Zero(S, S);
        det.row(s - 1).setOnes();
        b_search.controls.push_back(std::move(det));
    }
    TransitionTensor b_info;
    Matrix info0 = pb_info[0];
    for (Eigen::Index c = 0; c < info0.cols(); ++c) info0.col(c) /= info0.col(c).sum();
    b_info.controls.push_back(std::move(info0));
    model.B = {std::move(b_prompt), std::move(b_search), std::move(b_info)};

    return {std::move(model), std::move(d)};
}

namespace {

Matrix column_normalized(const Matrix& m, const std::string& tag) {
    Matrix out(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double s = m.col(c).sum();
        if (!(s > 0.0))
            throw std::invalid_argument("normalize_dirichlet: zero-total column " +
                                        std::to_string(c) + " in " + tag);
        out.col(c) = m.col(c) / s;
    }
    return out;
}

}  // namespace

NormalizedDirichlet normalize_dirichlet(const DirichletState& d) {
    NormalizedDirichlet n;
    for (std::size_t m = 0; m < d.pA.size(); ++m)
        n.A.push_back(column_normalized(d.pA[m], "pA[" + std::to_string(m) + "]"));
    for (std::size_t f = 0; f < d.pB.size(); ++f) {
        std::vector<Matrix> controls;
        for (std::size_t u = 0; u < d.pB[f].size(); ++u)
            controls.push_back(column_normalized(
                d.pB[f][u], "pB[" + std::to_string(f) + "][" + std::to_string(u) + "]"));
        n.B.push_back(std::move(controls));
    }
    return n;
}

// -- Serialization ------------------------------------------------------------

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<double> flat_row_major(const Matrix& m) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back(m(r, c));
    return out;
}

Matrix matrix_from_flat(const nlohmann::json& data, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw std::invalid_argument("model_from_json: data length does not match shape");
    Matrix m(rows, cols);
    Eigen::Index i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[static_cast<std::size_t>(i++)];
    return m;
}

ordered_json likelihood_json(const Matrix& values, const std::vector<int>* deps) {
    ordered_json j;
    j["shape"] = {values.rows(), values.cols()};
    if (deps) j["deps"] = *deps;
    j["data"] = flat_row_major(values);
    return j;
}

// B tensors serialize with shape [card, card, num_controls], row-major.
ordered_json transition_json(const std::vector<Matrix>& controls) {
    const Eigen::Index card = controls[0].rows();
    const Eigen::Index K = static_cast<Eigen::Index>(controls.size());
    ordered_json j;
    j["shape"] = {card, card, K};
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(card * card * K));
    for (Eigen::Index next = 0; next < card; ++next)
        for (Eigen::Index prev = 0; prev < card; ++prev)
            for (Eigen::Index u = 0; u < K; ++u)
                data.push_back(controls[static_cast<std::size_t>(u)](next, prev));
    j["data"] = data;
    return j;
}

std::vector<Matrix> transition_from_json(const nlohmann::json& j) {
    const auto& shape = j.at("shape");
    const Eigen::Index card = shape.at(0);
    const Eigen::Index K = shape.at(2);
    const auto& data = j.at("data");
    if (static_cast<Eigen::Index>(data.size()) != card * card * K)
        throw std::invalid_argument("model_from_json: B data length does not match shape");
    std::vector<Matrix> controls(static_cast<std::size_t>(K), Matrix(card, card));
    std::size_t i = 0;
    for (Eigen::Index next = 0; next < card; ++next)
        for (Eigen::Index prev = 0; prev < card; ++prev)
            for (Eigen::Index u = 0; u < K; ++u)
                controls[static_cast<std::size_t>(u)](next, prev) = data[i++];
    return controls;
}

}  // namespace

ordered_json model_to_json(const GenerativeModel& model, const DirichletState* dirichlet) {
    ordered_json j;
    j["version"] = "inferact-model/1";
    j["factor_cards"] = model.factor_cards;
    j["A"] = ordered_json::array();
    for (const LikelihoodTensor& a : model.A) j["A"].push_back(likelihood_json(a.values, &a.deps));
    j["B"] = ordered_json::array();
    for (const TransitionTensor& b : model.B) j["B"].push_back(transition_json(b.controls));
    j["C"] = ordered_json::array();
    for (const Vector& c : model.C)
        j["C"].push_back(std::vector<double>(c.data(), c.data() + c.size()));
    j["D"] = ordered_json::array();
    for (const Vector& d : model.D)
        j["D"].push_back(std::vector<double>(d.data(), d.data() + d.size()));
    if (dirichlet) {
        j["pA"] = ordered_json::array();
        for (const Matrix& m : dirichlet->pA) j["pA"].push_back(likelihood_json(m, nullptr));
        j["pB"] = ordered_json::array();
        for (const auto& f : dirichlet->pB) j["pB"].push_back(transition_json(f));
    }
    return j;
}

std::pair<GenerativeModel, DirichletState> model_from_json(const nlohmann::json& j) {
    if (j.at("version").get<std::string>() != "inferact-model/1")
        throw std::invalid_argument("model_from_json: unsupported version");
    GenerativeModel model;
    model.factor_cards = j.at("factor_cards").get<std::vector<int>>();
    for (const auto& ja : j.at("A")) {
        LikelihoodTensor a;
        a.deps = ja.at("deps").get<std::vector<int>>();
        for (int f : a.deps) {
            if (f < 0 || f >= static_cast<int>(model.factor_cards.size()))
                throw std::invalid_argument("model_from_json: A dep out of range");
            a.dep_cards.push_back(model.factor_cards[static_cast<std::size_t>(f)]);
        }
        a.values = matrix_from_flat(ja.at("data"), ja.at("shape").at(0), ja.at("shape").at(1));
        model.A.push_back(std::move(a));
    }
    for (const auto& jb : j.at("B")) {
        TransitionTensor b;
        b.controls = transition_from_json(jb);
        model.B.push_back(std::move(b));
    }
    for (const auto& jc : j.at("C")) {
        const auto v = jc.get<std::vector<double>>();
        model.C.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    for (const auto& jd : j.at("D")) {
        const auto v = jd.get<std::vector<double>>();
        model.D.push_back(Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())));
    }

    DirichletState d;
    if (j.contains("pA")) {
        for (const auto& ja : j.at("pA"))
            d.pA.push_back(matrix_from_flat(ja.at("data"), ja.at("shape").at(0), ja.at("shape").at(1)));
        for (const auto& jb : j.at("pB")) d.pB.push_back(transition_from_json(jb));
        d.reset_masks();
    }
    return {std::move(model), std::move(d)};
}

std::string matrix_to_csv(const Matrix& m) {
    std::ostringstream os;
    os.precision(17);
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            if (c) os << ',';
            os << m(r, c);
        }
        os << '\n';
    }
    return os.str();
}

void write_model_csv(const GenerativeModel& model, const std::string& prefix) {
    for (int m = 0; m < model.num_modalities(); ++m) {
        std::ofstream out(prefix + "A" + std::to_string(m) + ".csv");
        if (!out) throw std::runtime_error("write_model_csv: cannot open output file");
        out << matrix_to_csv(model.A[static_cast<std::size_t>(m)].values);
    }
}

}  // namespace inferact
