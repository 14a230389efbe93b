#include <cmath>
#include <random>

#include "doctest.h"
#include "onda/graph.hpp"

using onda::Matrix;
using onda::Vector;

namespace {

// Random connected graph via a random averaged signal.
onda::EigenBasis random_basis(int m, std::mt19937_64& rng, Matrix* lap = nullptr) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector avg(m);
  for (int i = 0; i < m; ++i) avg(i) = gauss(rng);
  const Matrix l = onda::laplacian(onda::build_adjacency(avg, 1.5));
  if (lap != nullptr) *lap = l;
  return onda::eigendecompose(l);
}

}  // namespace

TEST_CASE("build_adjacency matches direct evaluation") {
  Vector constant(3);
  constant << 4.2, 4.2, 4.2;
  const auto adj = onda::build_adjacency(constant, 1.0);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(adj.weights(i, j) == doctest::Approx(i == j ? 0.0 : 1.0));
    }
  }

  Vector two(2);
  two << 0.0, 1.0;
  CHECK(onda::build_adjacency(two, 1.0).weights(0, 1) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));

  two << 0.0, 2.0;
  CHECK(onda::build_adjacency(two, 4.0).weights(1, 0) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
}

TEST_CASE("build_adjacency rejects bad input") {
  Vector two(2);
  two << 0.0, 1.0;
  CHECK_THROWS_AS(onda::build_adjacency(two, 0.0), onda::ParameterError);
  CHECK_THROWS_AS(onda::build_adjacency(two, -1.0), onda::ParameterError);
  CHECK_THROWS_AS(onda::build_adjacency(Vector::Ones(1), 1.0),
                  onda::ParameterError);
  two(1) = std::nan("");
  CHECK_THROWS_AS(onda::build_adjacency(two, 1.0), onda::DataError);
}

TEST_CASE("adjacency symmetry and range for random sigma") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 2.0);
  std::uniform_real_distribution<double> sig(0.01, 50.0);
  for (int rep = 0; rep < 10; ++rep) {
    Vector avg(12);
    for (int i = 0; i < 12; ++i) avg(i) = gauss(rng);
    const auto adj = onda::build_adjacency(avg, sig(rng));
    CHECK((adj.weights - adj.weights.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(adj.weights.minCoeff() >= 0.0);
    CHECK(adj.weights.maxCoeff() <= 1.0);
    CHECK(adj.weights.diagonal().cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("laplacian on small graphs") {
  onda::AdjacencyMatrix two;
  two.weights.resize(2, 2);
  two.weights << 0, 1, 1, 0;
  Matrix l = onda::laplacian(two);
  CHECK(l(0, 0) == 1.0);
  CHECK(l(0, 1) == -1.0);
  CHECK(l(1, 0) == -1.0);
  CHECK(l(1, 1) == 1.0);

  onda::AdjacencyMatrix zeros;
  zeros.weights = Matrix::Zero(3, 3);
  CHECK(onda::laplacian(zeros).cwiseAbs().maxCoeff() == 0.0);

  onda::AdjacencyMatrix complete;
  complete.weights = Matrix::Ones(3, 3) - Matrix::Identity(3, 3);
  l = onda::laplacian(complete);
  for (int i = 0; i < 3; ++i) {
    CHECK(l(i, i) == doctest::Approx(2.0));
    for (int j = 0; j < 3; ++j) {
      if (i != j) CHECK(l(i, j) == doctest::Approx(-1.0));
    }
  }
}

TEST_CASE("eigendecompose analytic two-vertex case") {
  Matrix l(2, 2);
  l << 1, -1, -1, 1;
  const auto basis = onda::eigendecompose(l);
  CHECK(basis.values(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(basis.values(1) == doctest::Approx(2.0).epsilon(1e-12));
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(basis.vectors(0, 0)) == doctest::Approx(inv_sqrt2));
  CHECK(std::abs(basis.vectors(1, 0)) == doctest::Approx(inv_sqrt2));
  CHECK(basis.vectors(0, 0) * basis.vectors(1, 0) > 0.0);  // same sign
}

TEST_CASE("eigendecompose of the zero matrix") {
  const auto basis = onda::eigendecompose(Matrix::Zero(4, 4));
  CHECK(basis.values.cwiseAbs().maxCoeff() == 0.0);
  const Matrix gram =
      basis.vectors.transpose() * basis.vectors - Matrix::Identity(4, 4);
  CHECK(gram.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("eigendecompose rejects asymmetric input") {
  Matrix l(2, 2);
  l << 1, -1, -0.5, 1;
  CHECK_THROWS_AS(onda::eigendecompose(l), onda::DataError);
}

TEST_CASE("spectral identities on random graphs") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> size(2, 40);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    const int m = size(rng);
    Matrix l;
    const auto basis = random_basis(m, rng, &l);

    // Row sums of L vanish, eigenvalues ascending and nonnegative.
    CHECK(l.rowwise().sum().cwiseAbs().maxCoeff() < 1e-10);
    CHECK(basis.values(0) >= -1e-10);
    for (int i = 1; i < m; ++i) CHECK(basis.values(i) >= basis.values(i - 1));

    // Factorization reconstructs L.
    const Matrix recon =
        basis.vectors * basis.values.asDiagonal() * basis.vectors.transpose();
    CHECK((recon - l).norm() / l.norm() < 1e-8);

    // Round trip and Parseval on a random signal.
    Vector s(m);
    for (int i = 0; i < m; ++i) s(i) = gauss(rng);
    const Vector coeffs = onda::gft(basis, s);
    CHECK((onda::inverse_gft(basis, coeffs) - s).norm() < 1e-10);
    CHECK(std::abs(coeffs.norm() - s.norm()) < 1e-10);
  }
}

TEST_CASE("gft of a constant signal concentrates on the null frequency") {
  std::mt19937_64 rng(3);
  const int m = 15;
  const auto basis = random_basis(m, rng);
  const double c = 2.5;
  const Vector coeffs = onda::gft(basis, Vector::Constant(m, c));
  CHECK(std::abs(coeffs(0)) == doctest::Approx(c * std::sqrt(double(m))));
  CHECK(coeffs.tail(m - 1).cwiseAbs().maxCoeff() < 1e-9);

  CHECK(onda::gft(basis, Vector::Zero(m)).cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(onda::gft(basis, Vector::Zero(m + 1)), onda::DataError);
}

TEST_CASE("truncate_features") {
  Vector coeffs(4);
  coeffs << 3, 1, 0, 0;
  CHECK(onda::truncate_features(coeffs, 4).coeffs == coeffs);
  const auto two = onda::truncate_features(coeffs, 2);
  CHECK(two.dim() == 2);
  CHECK(two.coeffs(0) == 3.0);
  CHECK(two.coeffs(1) == 1.0);
  CHECK_THROWS_AS(onda::truncate_features(coeffs, 0), onda::ParameterError);
  CHECK_THROWS_AS(onda::truncate_features(coeffs, 5), onda::ParameterError);
}

TEST_CASE("reconstruct_error limits and monotonicity") {
  std::mt19937_64 rng(5);
  const int m = 30;
  const auto basis = random_basis(m, rng);

  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int rep = 0; rep < 20; ++rep) {
    Vector s(m);
    for (int i = 0; i < m; ++i) s(i) = gauss(rng);
    CHECK(onda::reconstruct_error(basis, s, m) < 1e-10);
    double prev = 2.0;
    for (int d = 1; d <= m; ++d) {
      const double err = onda::reconstruct_error(basis, s, d);
      CHECK(err <= prev + 1e-12);
      prev = err;
    }
  }

  // A constant signal needs one coefficient on a connected graph.
  CHECK(onda::reconstruct_error(basis, Vector::Constant(m, 3.0), 1) < 1e-10);
  CHECK_THROWS_AS(onda::reconstruct_error(basis, Vector::Zero(m), 2),
                  onda::DataError);
}

TEST_CASE("default_sigma degenerates to 1 on constant signals") {
  CHECK(onda::default_sigma(Vector::Constant(10, 2.0)) == 1.0);
  std::mt19937_64 rng(9);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vector avg(50);
  for (int i = 0; i < 50; ++i) avg(i) = gauss(rng);
  const double sigma = onda::default_sigma(avg);
  CHECK(sigma > 0.0);
  CHECK(onda::default_sigma(avg) == sigma);  // deterministic
}

TEST_CASE("average_signal and gft_features") {
  Matrix signals(4, 3);
  signals << 1, 2, 3, 3, 2, 1, 5, 5, 5, 7, 7, 7;
  const Vector avg = onda::average_signal(signals, 2);
  CHECK(avg(0) == doctest::Approx(2.0));
  CHECK(avg(1) == doctest::Approx(2.0));
  CHECK(avg(2) == doctest::Approx(2.0));
  CHECK_THROWS_AS(onda::average_signal(signals, 0), onda::ParameterError);
  CHECK_THROWS_AS(onda::average_signal(signals, 5), onda::ParameterError);

  std::mt19937_64 rng(13);
  const auto basis = random_basis(3, rng);
  const Matrix feats = onda::gft_features(basis, signals, 2);
  CHECK(feats.rows() == 4);
  CHECK(feats.cols() == 2);
  const Vector expected = onda::gft(basis, signals.row(0).transpose()).head(2);
  CHECK((feats.row(0).transpose() - expected).cwiseAbs().maxCoeff() < 1e-12);
}
