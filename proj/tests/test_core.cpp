#include "qwalk/core.hpp"

#include <doctest.h>

using namespace qwalk;

TEST_CASE("config validation") {
    CHECK_THROWS_AS((CycleConfig{1, 0.0}).validate(), DomainError);
    CHECK_THROWS_AS((CycleConfig{3, -0.5}).validate(), DomainError);
    CHECK_NOTHROW((CycleConfig{2, 0.0}).validate());
    CHECK_THROWS_AS((HyperCycleConfig{{3, 0.1}, 0}).validate(), DomainError);
    CHECK((HyperCycleConfig{{3, 0.1}, 3}).vertex_count() == 27);
}

TEST_CASE("multi-index encoding") {
    const HyperCycleConfig config{{3, 0.0}, 3};
    CHECK(encode_multi_index(std::vector<int>{0, 0, 0}, config) == 0);
    CHECK(encode_multi_index(std::vector<int>{1, 1, 1}, config) == 13);
    CHECK(encode_multi_index(std::vector<int>{2, 2, 2}, config) == 26);
    CHECK(decode_multi_index(0, config) == MultiIndex{0, 0, 0});
    CHECK(decode_multi_index(13, config) == MultiIndex{1, 1, 1});
    CHECK(decode_multi_index(26, config) == MultiIndex{2, 2, 2});

    CHECK_THROWS_AS(encode_multi_index(std::vector<int>{0, 0, 3}, config), DomainError);
    CHECK_THROWS_AS(encode_multi_index(std::vector<int>{0, 0}, config), DomainError);
    CHECK_THROWS_AS(decode_multi_index(27, config), DomainError);
    CHECK_THROWS_AS(decode_multi_index(-1, config), DomainError);
}

TEST_CASE("encode/decode round-trips exhaustively") {
    // every (N, n) with N^n <= 10^4 in a small family
    for (const auto& [size, dims] : {std::pair{3, 3}, {2, 10}, {10, 4}, {7, 4}}) {
        const HyperCycleConfig config{{size, 0.0}, dims};
        REQUIRE(config.vertex_count() <= 10000);
        for (Index flat = 0; flat < config.vertex_count(); ++flat)
            CHECK(encode_multi_index(decode_multi_index(flat, config), config) == flat);
    }
}

TEST_CASE("vectorization layout puts the row index major") {
    CMatrix rho(2, 2);
    rho << Complex(1, 0), Complex(2, 0), Complex(3, 0), Complex(4, 0);
    const CVector v = vectorize_density(rho);
    CHECK(v(0) == Complex(1, 0));
    CHECK(v(1) == Complex(2, 0));  // position a*dim+b with (a,b) = (0,1)
    CHECK(v(2) == Complex(3, 0));
    CHECK((unvectorize_density(v, 2) - rho).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kron matches the nested-loop definition") {
    CMatrix a(2, 2), b(2, 2);
    a << Complex(1, 1), Complex(0, 2), Complex(3, 0), Complex(1, -1);
    b << Complex(2, 0), Complex(0, 1), Complex(1, 0), Complex(0, 0);
    const CMatrix k = kron(a, b);
    REQUIRE(k.rows() == 4);
    for (Index i = 0; i < 4; ++i)
        for (Index j = 0; j < 4; ++j)
            CHECK(k(i, j) == a(i / 2, j / 2) * b(i % 2, j % 2));
}

TEST_CASE("density validation report") {
    SUBCASE("maximally mixed state passes") {
        const CMatrix rho = CMatrix::Identity(3, 3) / 3.0;
        const DensityReport report = validate_density_matrix(rho);
        CHECK(report.passed);
        CHECK(report.trace_deviation == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(report.hermiticity_violation == 0.0);
        CHECK(report.min_eigenvalue == doctest::Approx(1.0 / 3).epsilon(1e-12));
    }
    SUBCASE("localized projector passes") {
        CMatrix rho = CMatrix::Zero(4, 4);
        rho(0, 0) = 1.0;
        CHECK(validate_density_matrix(rho).passed);
    }
    SUBCASE("constructed hermiticity violation fails") {
        CMatrix rho = CMatrix::Zero(2, 2);
        rho(0, 0) = 1.0;
        rho(0, 1) = 1.0;  // no mirrored entry
        const DensityReport report = validate_density_matrix(rho);
        CHECK_FALSE(report.passed);
        CHECK(report.hermiticity_violation == doctest::Approx(1.0));
    }
    SUBCASE("non-square input is a domain error") {
        CHECK_THROWS_AS(validate_density_matrix(CMatrix::Zero(2, 3)), DomainError);
    }
}

TEST_CASE("probability clamping") {
    RVector p(3);
    p << -5e-13, 0.5, 1.0 + 5e-13;
    CHECK(clamp_probabilities(p) == 2);
    CHECK(p(0) == 0.0);
    CHECK(p(2) == 1.0);

    RVector bad(1);
    bad << -1e-9;
    CHECK_THROWS_AS(clamp_probabilities(bad), NumericError);
}
