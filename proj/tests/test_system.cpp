// Copyright 2026 The qrstab authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch_amalgamated.hpp>

#include "qrstab/system.hpp"
#include "test_support.hpp"

using namespace qrstab;

TEST_CASE("build_system derives the desk instance", "[system]") {
  const QuantumLinearSystem sys = test::desk_system();
  REQUIRE(sys.n == 2);
  REQUIRE(sys.m == 2);
  const MatrixXd s2 = fock::canonical_theta(2);
  REQUIRE((sys.B - 2.0 * s2).norm() < 1e-14);
  REQUIRE((sys.A + 2.0 * MatrixXd::Identity(2, 2)).norm() < 1e-14);
  REQUIRE(sys.theta_condition == Catch::Approx(1.0));
  REQUIRE((sys.bbt() - 4.0 * MatrixXd::Identity(2, 2)).norm() < 1e-14);
}

TEST_CASE("build_system rejects malformed inputs", "[system]") {
  const MatrixXd s2 = fock::canonical_theta(2);
  const MatrixXd z2 = MatrixXd::Zero(2, 2);
  const MatrixXd i2 = MatrixXd::Identity(2, 2);

  SECTION("odd dimension") {
    REQUIRE_THROWS_AS(build_system(MatrixXd::Zero(3, 3), MatrixXd::Zero(3, 3),
                                   MatrixXd::Zero(2, 3), s2),
                      ShapeMismatch);
  }
  SECTION("R shape") {
    REQUIRE_THROWS_AS(build_system(s2, MatrixXd::Zero(4, 4), i2, s2), ShapeMismatch);
  }
  SECTION("M shape") {
    REQUIRE_THROWS_AS(build_system(s2, z2, MatrixXd::Zero(2, 4), s2), ShapeMismatch);
  }
  SECTION("theta not antisymmetric") {
    REQUIRE_THROWS_AS(build_system(i2, z2, i2, s2), SymmetryViolation);
  }
  SECTION("R not symmetric") {
    REQUIRE_THROWS_AS(build_system(s2, s2, i2, s2), SymmetryViolation);
  }
  SECTION("J not antisymmetric") {
    REQUIRE_THROWS_AS(build_system(s2, z2, i2, i2), SymmetryViolation);
  }
  SECTION("singular theta") {
    MatrixXd theta = MatrixXd::Zero(4, 4);
    theta(0, 1) = 1.0;
    theta(1, 0) = -1.0;  // second block identically zero
    REQUIRE_THROWS_AS(build_system(theta, MatrixXd::Zero(4, 4), MatrixXd::Zero(2, 4), s2),
                      SingularTheta);
  }
}

TEST_CASE("realizability identity holds on random valid systems", "[system]") {
  SplitMix64 rng(11);
  const int sizes[] = {2, 4, 6};
  for (int trial = 0; trial < 40; ++trial) {
    const int n = sizes[trial % 3];
    const int m = sizes[(trial / 3) % 3];
    const QuantumLinearSystem sys = test::random_valid_system(rng, n, m);
    const MatrixXd resid = sys.A * sys.theta + sys.theta * sys.A.transpose() +
                           sys.B * sys.J * sys.B.transpose();
    REQUIRE(resid.norm() <= 1e-10 * (1.0 + sys.A.norm() * sys.theta.norm()));
  }
}

TEST_CASE("spectral_abscissa matches known drifts", "[system]") {
  REQUIRE(spectral_abscissa(-2.0 * MatrixXd::Identity(2, 2)) == Catch::Approx(-2.0));
  MatrixXd rot(2, 2);
  rot << 0.5, -3.0, 3.0, 0.5;
  REQUIRE(spectral_abscissa(rot) == Catch::Approx(0.5));
  REQUIRE_THROWS_AS(spectral_abscissa(MatrixXd::Zero(2, 3)), ShapeMismatch);
}

TEST_CASE("nominal steady covariance of the desk instance", "[system]") {
  const QuantumLinearSystem sys = test::desk_system();
  const SecondMomentMatrix s = nominal_steady_covariance(sys);
  REQUIRE((s.P - MatrixXd::Identity(2, 2)).norm() < 1e-12);
  REQUIRE((s.theta - sys.theta).norm() == 0.0);
}

TEST_CASE("steady covariance requires a Hurwitz drift", "[system]") {
  QuantumLinearSystem sys = test::desk_system();
  sys.A = MatrixXd::Identity(2, 2);  // forged unstable drift
  REQUIRE_THROWS_AS(nominal_steady_covariance(sys), NotHurwitz);
}

TEST_CASE("steady covariance flags unphysical hand-assembled systems", "[system]") {
  // B = 0 with a stable drift admits no state satisfying the commutation
  // relations; the imaginary-part check must catch it.
  QuantumLinearSystem sys;
  sys.n = 2;
  sys.m = 2;
  sys.theta = fock::canonical_theta(2);
  sys.R = MatrixXd::Zero(2, 2);
  sys.M = MatrixXd::Zero(2, 2);
  sys.J = fock::canonical_theta(2);
  sys.B = MatrixXd::Zero(2, 2);
  sys.A = -MatrixXd::Identity(2, 2);
  REQUIRE_THROWS_AS(nominal_steady_covariance(sys), PhysicallyInconsistent);
  REQUIRE_THROWS_WITH(nominal_steady_covariance(sys),
                      Catch::Matchers::ContainsSubstring("B = 0"));
}

TEST_CASE("steady covariance solves the Lyapunov equation on random instances",
          "[system]") {
  SplitMix64 rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    const QuantumLinearSystem sys = test::random_physical_hurwitz_system(rng, 4, 2);
    const SecondMomentMatrix s = nominal_steady_covariance(sys);

    const MatrixXcd sc = s.P.cast<std::complex<double>>() +
                         std::complex<double>(0, 1) * s.theta.cast<std::complex<double>>();
    const MatrixXcd omega =
        MatrixXd::Identity(sys.m, sys.m).cast<std::complex<double>>() +
        std::complex<double>(0, 1) * sys.J.cast<std::complex<double>>();
    const MatrixXcd rhs = sys.B.cast<std::complex<double>>() * omega *
                          sys.B.transpose().cast<std::complex<double>>();
    const MatrixXcd resid = sys.A.cast<std::complex<double>>() * sc +
                            sc * sys.A.transpose().cast<std::complex<double>>() + rhs;
    REQUIRE(resid.norm() <= 1e-9 * std::max(1.0, rhs.norm()));
    REQUIRE(symmetry_defect(s.P) < 1e-12);
    REQUIRE(min_eigenvalue_sym(s.P) > -1e-9);
  }
}

TEST_CASE("tolerances are adjustable", "[system]") {
  Tolerances tol;
  tol.symmetry = 1e-2;
  tol.realizability = 1e-2;  // the drift identity inherits the asymmetry
  MatrixXd near_antisym(2, 2);
  near_antisym << 0.0, 1.0, -1.0, 1e-4;
  const MatrixXd z2 = MatrixXd::Zero(2, 2);
  REQUIRE_NOTHROW(build_system(near_antisym, z2, MatrixXd::Identity(2, 2),
                               fock::canonical_theta(2), tol));
  REQUIRE_THROWS_AS(build_system(near_antisym, z2, MatrixXd::Identity(2, 2),
                                 fock::canonical_theta(2)),
                    SymmetryViolation);
}
