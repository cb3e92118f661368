#include <doctest.h>

#include <cmath>

#include "lufa/geom3.hpp"
#include "lufa/rng.hpp"

using namespace lufa;

namespace {

SymMat3 random_psd(Rng& rng) {
  const Vec3 a = rng.normal_vec3();
  const Vec3 b = rng.normal_vec3();
  const Vec3 c = rng.normal_vec3();
  SymMat3 m = self_outer(a);
  m += self_outer(b);
  m += self_outer(c);
  return m;
}

Mat3 reconstruct(const EigenBasis& e) {
  Mat3 m;
  for (int j = 0; j < 3; ++j) m = m + e.lambda[j] * outer(e.v[j], e.v[j]);
  return m;
}

bool same_basis_bits(const EigenBasis& a, const EigenBasis& b) {
  for (int j = 0; j < 3; ++j) {
    if (a.lambda[j] != b.lambda[j]) return false;
    for (int c = 0; c < 3; ++c)
      if (a.v[j][c] != b.v[j][c]) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("eig_sym3 diagonal matrix") {
  const SymMat3 a{1.0, 0.0, 0.0, 2.0, 0.0, 3.0};
  const EigenBasis e = eig_sym3(a);
  CHECK(e.lambda[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e.lambda[1] == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(e.lambda[2] == doctest::Approx(3.0).epsilon(1e-14));
  for (int j = 0; j < 3; ++j) {
    for (int c = 0; c < 3; ++c) {
      CHECK(e.v[j][c] == doctest::Approx(j == c ? 1.0 : 0.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("eig_sym3 identity and zero") {
  const EigenBasis e = eig_sym3(SymMat3::identity());
  for (int j = 0; j < 3; ++j) CHECK(e.lambda[j] == doctest::Approx(1.0));
  const EigenBasis z = eig_sym3(SymMat3{});
  for (int j = 0; j < 3; ++j) CHECK(z.lambda[j] == 0.0);
  // orthonormality holds even when the spectrum is fully degenerate
  for (int j = 0; j < 3; ++j) CHECK(norm(z.v[j]) == doctest::Approx(1.0));
}

TEST_CASE("eig_sym3 seeded reconstruction, ordering and sign rule") {
  Rng rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const SymMat3 a = random_psd(rng);
    const EigenBasis e = eig_sym3(a);

    CHECK(e.lambda[0] <= e.lambda[1]);
    CHECK(e.lambda[1] <= e.lambda[2]);

    const double scale = std::max(1.0, a.frobenius());
    CHECK((reconstruct(e) - a.to_mat()).frobenius() / scale < 1e-9);

    for (int j = 0; j < 3; ++j) {
      CHECK(norm(e.v[j]) == doctest::Approx(1.0).epsilon(1e-12));
      for (int m = j + 1; m < 3; ++m)
        CHECK(std::abs(dot(e.v[j], e.v[m])) < 1e-10);
      // sign rule: the largest-magnitude component is positive
      double best = 0.0;
      for (int c = 0; c < 3; ++c)
        if (std::abs(e.v[j][c]) > std::abs(best)) best = e.v[j][c];
      CHECK(best > 0.0);
    }
  }
}

TEST_CASE("eig_sym3 is deterministic") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMat3 a = random_psd(rng);
    CHECK(same_basis_bits(eig_sym3(a), eig_sym3(a)));
  }
}

TEST_CASE("eig_sym3 near-degenerate spectrum still reconstructs") {
  const SymMat3 a{2.0, 1e-13, 0.0, 2.0 + 1e-13, 0.0, 5.0};
  const EigenBasis e = eig_sym3(a);
  CHECK((reconstruct(e) - a.to_mat()).frobenius() < 1e-9);
}

TEST_CASE("align_sign flips exactly the anti-aligned vectors") {
  const EigenBasis ref = eig_sym3(SymMat3{1.0, 0.0, 0.0, 2.0, 0.0, 3.0});
  EigenBasis flipped = ref;
  flipped.v[0] = -flipped.v[0];
  flipped.v[2] = -flipped.v[2];

  const EigenBasis fixed = align_sign(flipped, ref);
  for (int j = 0; j < 3; ++j) {
    CHECK(dot(fixed.v[j], ref.v[j]) == doctest::Approx(1.0));
    CHECK(fixed.lambda[j] == ref.lambda[j]);
  }

  // identity on an already-aligned basis, and idempotent
  const EigenBasis again = align_sign(fixed, ref);
  CHECK(same_basis_bits(again, fixed));
}

TEST_CASE("align_sign gives nonnegative dots for random rotations") {
  Rng rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    const EigenBasis a = eig_sym3(random_psd(rng));
    const EigenBasis b = eig_sym3(random_psd(rng));
    const EigenBasis c = align_sign(a, b);
    for (int j = 0; j < 3; ++j) CHECK(dot(c.v[j], b.v[j]) >= 0.0);
  }
}

TEST_CASE("outer products") {
  const Vec3 ez{0.0, 0.0, 1.0};
  const Mat3 m = outer(ez, ez);
  CHECK(m(2, 2) == 1.0);
  CHECK(m.trace() == 1.0);
  CHECK(outer(Vec3{}, ez).frobenius() == 0.0);

  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec3 u = rng.normal_vec3();
    CHECK(self_outer(u).trace() == doctest::Approx(dot(u, u)).epsilon(1e-14));
    const Vec3 v = rng.normal_vec3();
    // (u v^T) w == u (v . w)
    const Vec3 w = rng.normal_vec3();
    const Vec3 lhs = outer(u, v) * w;
    const Vec3 rhs = dot(v, w) * u;
    CHECK(norm(lhs - rhs) < 1e-12 * std::max(1.0, norm(rhs)));
  }
}

TEST_CASE("SymMat3 quad and mul agree with the dense form") {
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const SymMat3 a = random_psd(rng);
    const Vec3 v = rng.normal_vec3();
    const Vec3 dense = a.to_mat() * v;
    CHECK(norm(a.mul(v) - dense) < 1e-12 * std::max(1.0, norm(dense)));
    CHECK(a.quad(v) == doctest::Approx(dot(v, dense)).epsilon(1e-12));
  }
}
