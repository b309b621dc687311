#include "inferact/model.hpp"

#include "inferact/prob.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>

using namespace inferact;

TEST_CASE("build_paper_model default shapes and values") {
    auto [model, d] = build_paper_model();

    CHECK(model.factor_cards == std::vector<int>{33, 11, 3});
    CHECK(model.A[0].values.rows() == 11);
    CHECK(model.A[0].values.cols() == 33);
    CHECK(model.A[3].values.rows() == 11);
    CHECK(model.A[3].values.cols() == 11);
    CHECK(model.A[6].values.rows() == 3);
    CHECK(model.B[1].card() == 11);
    CHECK(model.B[1].num_controls() == 12);
    CHECK(model.B[0].num_controls() == 34);
    CHECK(model.B[2].num_controls() == 1);

    CHECK(model.C[6][0] == doctest::Approx(-32.0));
    CHECK(model.C[6][1] == doctest::Approx(8.0));
    CHECK(model.C[6][2] == doctest::Approx(64.0));

    // Quality preferences: -16 anchor, then strictly increasing quadratic.
    CHECK(model.C[0][0] == doctest::Approx(-16.0));
    CHECK(model.C[0][5] == doctest::Approx(5.0));
    CHECK(model.C[0][10] == doctest::Approx(20.0));
    for (int m = 0; m < 6; ++m)
        for (int q = 2; q <= 10; ++q) CHECK(model.C[m][q] > model.C[m][q - 1]);

    for (int f = 0; f < 3; ++f) {
        CHECK(model.D[f].size() == model.factor_cards[f]);
        CHECK(model.D[f][0] == doctest::Approx(1.0 / model.factor_cards[f]));
        CHECK(model.D[f].maxCoeff() == doctest::Approx(model.D[f].minCoeff()));
    }

    // A starts uniform; pA starts at base concentration 1.
    CHECK(model.A[0].values.minCoeff() == doctest::Approx(1.0 / 11));
    CHECK(model.A[0].values.maxCoeff() == doctest::Approx(1.0 / 11));
    for (const Matrix& pa : d.pA) {
        CHECK(pa.minCoeff() == 1.0);
        CHECK(pa.maxCoeff() == 1.0);
    }

    // pB biases: prompt persistence, search decay, info forward progression.
    CHECK(d.pB[0][0](4, 4) == doctest::Approx(1.1));
    CHECK(d.pB[0][0](4, 5) == doctest::Approx(1.0));
    CHECK(d.pB[1][0](0, 7) == doctest::Approx(1.1));
    CHECK(d.pB[2][0](1, 0) == doctest::Approx(1.1));
    CHECK(d.pB[2][0](2, 2) == doctest::Approx(1.1));

    // Explicit controls are deterministic one-hot columns.
    CHECK(model.B[0].controls[5](4, 17) == doctest::Approx(1.0));
    CHECK(model.B[0].controls[5].col(17).sum() == doctest::Approx(1.0));
    CHECK(model.B[1].controls[3](2, 9) == doctest::Approx(1.0));

    CHECK(validate_model(model).empty());
}

TEST_CASE("build_paper_model is deterministic and accepts dim overrides") {
    auto [m1, d1] = build_paper_model();
    auto [m2, d2] = build_paper_model();
    for (int m = 0; m < 7; ++m) CHECK(m1.A[m].values == m2.A[m].values);
    for (int f = 0; f < 3; ++f)
        for (int u = 0; u < m1.B[f].num_controls(); ++u)
            CHECK(m1.B[f].controls[u] == m2.B[f].controls[u]);
    for (std::size_t m = 0; m < d1.pA.size(); ++m) CHECK(d1.pA[m] == d2.pA[m]);

    auto [small, ds] = build_paper_model({5, 3, 3, 11});
    CHECK(small.A[0].values.rows() == 11);
    CHECK(small.A[0].values.cols() == 5);
    CHECK(validate_model(small).empty());

    CHECK_THROWS_AS(build_paper_model({1, 3, 3, 11}), std::invalid_argument);
}

TEST_CASE("validate_model reports coordinates") {
    auto [model, d] = build_paper_model({5, 3, 3, 11});

    SUBCASE("broken normalization names modality and column") {
        model.A[0].values(0, 2) -= 0.1;
        const auto violations = validate_model(model);
        REQUIRE(violations.size() == 1);
        CHECK(violations[0].find("A[0]") != std::string::npos);
        CHECK(violations[0].find("column 2") != std::string::npos);
    }
    SUBCASE("bad dependency index is flagged") {
        model.A[0].deps[0] = 5;
        const auto violations = validate_model(model);
        REQUIRE(!violations.empty());
        CHECK(violations[0].find("references factor 5") != std::string::npos);
    }
    SUBCASE("bad transition column is flagged") {
        model.B[1].controls[0](0, 1) += 0.5;
        const auto violations = validate_model(model);
        REQUIRE(!violations.empty());
        CHECK(violations[0].find("B[1]") != std::string::npos);
    }
}

TEST_CASE("normalize_dirichlet") {
    DirichletState d;
    d.pA.push_back((Matrix(2, 2) << 1.0, 3.0, 1.0, 1.0).finished());
    d.pB.push_back({(Matrix(2, 2) << 1.1, 1.1, 1.0, 1.0).finished()});
    d.reset_masks();

    const NormalizedDirichlet n = normalize_dirichlet(d);
    CHECK(n.A[0](0, 0) == doctest::Approx(0.5));
    CHECK(n.A[0](0, 1) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(n.A[0](1, 1) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(n.B[0][0](0, 0) == doctest::Approx(1.1 / 2.1).epsilon(1e-12));
    CHECK(n.B[0][0](1, 0) == doctest::Approx(1.0 / 2.1).epsilon(1e-12));

    d.pA[0].col(0).setZero();
    CHECK_THROWS_AS(normalize_dirichlet(d), std::invalid_argument);
}

TEST_CASE("normalized Dirichlet means round-trip through validate_model") {
    std::mt19937_64 rng(5);
    auto [model, d] = build_paper_model({4, 3, 3, 6});
    for (Matrix& pa : d.pA)
        pa = pa.unaryExpr([&rng](double) { return 0.5 + 10.0 * runif(rng); });
    const NormalizedDirichlet n = normalize_dirichlet(d);
    GenerativeModel learned = model;
    for (std::size_t m = 0; m < n.A.size(); ++m) learned.A[m].values = n.A[m];
    learned.B[2].controls = n.B[2];
    CHECK(validate_model(learned).empty());
}

TEST_CASE("model JSON round-trip") {
    auto [model, d] = build_paper_model({4, 3, 3, 5});
    const auto j = model_to_json(model, &d);
    CHECK(j.at("version") == "inferact-model/1");

    auto [back, dback] = model_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.factor_cards == model.factor_cards);
    for (int m = 0; m < model.num_modalities(); ++m) {
        CHECK(back.A[m].deps == model.A[m].deps);
        CHECK((back.A[m].values - model.A[m].values).cwiseAbs().maxCoeff() == 0.0);
        CHECK((back.C[m] - model.C[m]).cwiseAbs().maxCoeff() == 0.0);
    }
    for (int f = 0; f < model.num_factors(); ++f) {
        CHECK(back.B[f].num_controls() == model.B[f].num_controls());
        for (int u = 0; u < model.B[f].num_controls(); ++u)
            CHECK((back.B[f].controls[u] - model.B[f].controls[u]).cwiseAbs().maxCoeff() == 0.0);
    }
    REQUIRE(dback.pA.size() == d.pA.size());
    for (std::size_t m = 0; m < d.pA.size(); ++m)
        CHECK((dback.pA[m] - d.pA[m]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(validate_model(back).empty());
}

TEST_CASE("CSV export") {
    const Matrix m = (Matrix(2, 2) << 1.0, 0.25, 0.0, 0.75).finished();
    CHECK(matrix_to_csv(m) == "1,0.25\n0,0.75\n");

    auto [model, d] = build_paper_model({3, 2, 2, 4});
    const std::string prefix = "model_csv_test_";
    write_model_csv(model, prefix);
    std::ifstream in(prefix + "A0.csv");
    REQUIRE(in.good());
    std::string line;
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 4);  // one row per observation level
    for (int mm = 0; mm < model.num_modalities(); ++mm)
        std::remove((prefix + "A" + std::to_string(mm) + ".csv").c_str());
}
