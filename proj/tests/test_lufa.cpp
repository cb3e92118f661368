#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lufa/lufa.hpp"
#include "lufa/rng.hpp"
#include "support/testutil.hpp"

using namespace lufa;

namespace {

// Noisy tilted rectangle: unequal in-plane extents keep the whole spectrum
// well separated, so these tests probe the scheduler, not gap degeneracy.
struct PlaneSampler {
  Rng rng;
  Vec3 center, n, e1, e2;
  double half_u, half_v;
  double thickness;

  PlaneSampler(std::uint64_t seed, double hu = 8.0, double hv = 4.0,
               double thick = 0.02)
      : rng(seed), half_u(hu), half_v(hv), thickness(thick) {
    center = 3.0 * rng.normal_vec3();
    n = rng.unit_vec3();
    e1 = normalized(cross(n, std::abs(n.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0}));
    e2 = cross(n, e1);
  }

  Vec3 next() {
    return center + rng.uniform(-half_u, half_u) * e1 +
           rng.uniform(-half_v, half_v) * e2 + thickness * rng.normal() * n;
  }
};

TrackedCloud build_cloud(PlaneSampler& sampler, int k, const SymMat3& cov) {
  TrackedCloud cloud;
  for (int i = 0; i < k; ++i) begin_step(cloud, sampler.next(), cov);
  return cloud;
}

}  // namespace

TEST_CASE("rigorous_propagate: zero input covariances give zero output") {
  PlaneSampler sampler(201);
  const TrackedCloud cloud = build_cloud(sampler, 50, SymMat3{});
  const auto r = rigorous_propagate(cloud);
  REQUIRE(r.has_value());
  for (int j = 0; j < 3; ++j) CHECK(r->a_lambda[j] == 0.0);
  CHECK(r->joint.a_n.frobenius() == 0.0);
  CHECK(r->joint.a_m.frobenius() == 0.0);
  CHECK(r->joint.a_nm.frobenius() == 0.0);
}

TEST_CASE("rigorous_propagate: isotropic noise closed forms") {
  const double sigma2 = 4e-4;
  PlaneSampler sampler(203);
  const TrackedCloud cloud = build_cloud(sampler, 80, SymMat3::scaled_identity(sigma2));
  const auto r = rigorous_propagate(cloud);
  REQUIRE(r.has_value());
  const double k = 80.0;

  // center: A_m = sigma^2 / k I
  CHECK(r->joint.a_m.trace() == doctest::Approx(3.0 * sigma2 / k).epsilon(1e-12));
  CHECK(std::abs(r->joint.a_m.xy) < 1e-18);

  // eigenvalues: sum_i (2/k proj)^2 sigma^2 = 4 sigma^2 lambda_j / k
  for (int j = 0; j < 3; ++j) {
    CHECK(r->a_lambda[j] ==
          doctest::Approx(4.0 * sigma2 * cloud.basis.lambda[j] / k).epsilon(1e-9));
  }
}

TEST_CASE("rigorous_propagate guards") {
  TrackedCloud tiny;
  begin_step(tiny, {0, 0, 0}, SymMat3{});
  begin_step(tiny, {1, 0, 0}, SymMat3{});
  CHECK_FALSE(rigorous_propagate(tiny).has_value());  // k < 3

  // isotropic cloud: the normal is spectrally undefined
  TrackedCloud iso;
  for (int x = -1; x <= 1; x += 2)
    for (int y = -1; y <= 1; y += 2)
      for (int z = -1; z <= 1; z += 2)
        begin_step(iso, {double(x), double(y), double(z)}, SymMat3::identity());
  CHECK_FALSE(rigorous_propagate(iso).has_value());
}

TEST_CASE("begin_step keeps the basis sign-continuous") {
  PlaneSampler sampler(207);
  TrackedCloud cloud;
  EigenBasis prev{};
  for (int i = 0; i < 120; ++i) {
    begin_step(cloud, sampler.next(), SymMat3{});
    if (i >= 3) {
      for (int j = 0; j < 3; ++j) CHECK(dot(cloud.basis.v[j], prev.v[j]) >= 0.0);
    }
    prev = cloud.basis;
  }
  CHECK(cloud.stats.k == 120);
  CHECK(cloud.points.size() == 120);
  CHECK(cloud.point_covs.size() == 120);
}

TEST_CASE("decide_mode covers the whole automaton") {
  LufaPolicy policy;  // n_min 200, n_ct 100, n_max 1000
  LufaState state;

  state.mode = Mode::warmup;
  CHECK(decide_mode(state, 150, 0.0, policy) == Mode::warmup);
  CHECK(decide_mode(state, 200, 0.0, policy) == Mode::rigorous);  // activation

  state.mode = Mode::fast;
  state.consecutive_fast = 42;
  CHECK(decide_mode(state, 500, 0.5, policy) == Mode::fast);
  CHECK(decide_mode(state, 500, 1.5, policy) == Mode::rigorous);  // gate trip

  // counting the candidate step itself: 99 previous fast steps means this
  // one is the n_ct-th, so it refreshes; spacing comes out at exactly n_ct
  state.consecutive_fast = 98;
  CHECK(decide_mode(state, 500, 0.0, policy) == Mode::fast);
  state.consecutive_fast = 99;
  CHECK(decide_mode(state, 500, 0.0, policy) == Mode::rigorous);
  state.consecutive_fast = 100;
  CHECK(decide_mode(state, 500, 0.0, policy) == Mode::rigorous);

  state.consecutive_fast = 0;
  CHECK(decide_mode(state, 1000, 0.0, policy) == Mode::frozen);
  state.mode = Mode::frozen;
  CHECK(decide_mode(state, 500, 0.0, policy) == Mode::frozen);
}

TEST_CASE("fast update: zero-covariance insertions rescale exactly") {
  PlaneSampler sampler(211);
  const SymMat3 ap = SymMat3::scaled_identity(1e-4);
  TrackedCloud cloud = build_cloud(sampler, 60, ap);
  const auto r = rigorous_propagate(cloud);
  REQUIRE(r.has_value());
  cloud.state.cov = *r;

  LufaPolicy policy;
  const Propagated before = cloud.state.cov;
  const StepContext ctx = begin_step(cloud, sampler.next(), SymMat3{});
  REQUIRE(fast_covariance_update(cloud, ctx, SymMat3{}, policy));

  const double s = 60.0 / 61.0;
  for (int j = 0; j < 3; ++j) {
    CHECK(cloud.state.cov.a_lambda[j] ==
          doctest::Approx(s * s * before.a_lambda[j]).epsilon(1e-12));
  }
  CHECK(cloud.state.cov.joint.a_m.trace() ==
        doctest::Approx(s * s * before.joint.a_m.trace()).epsilon(1e-12));
}

TEST_CASE("fast update: inserting the mean transports the normal block by Q alone") {
  PlaneSampler sampler(213);
  const SymMat3 ap = SymMat3::scaled_identity(2e-4);
  TrackedCloud cloud = build_cloud(sampler, 70, ap);
  const auto r = rigorous_propagate(cloud);
  REQUIRE(r.has_value());
  cloud.state.cov = *r;

  const SymMat3 before_n = cloud.state.cov.joint.a_n;
  const EigenBasis prev = cloud.basis;
  const Vec3 mean = cloud.stats.m;

  LufaPolicy policy;
  const StepContext ctx = begin_step(cloud, mean, SymMat3{});
  CHECK(ctx.d_u == 0.0);
  REQUIRE(fast_covariance_update(cloud, ctx, SymMat3{}, policy));

  const auto w = transport_weights(prev, cloud.basis, ctx.k, 0, policy.guard);
  REQUIRE(w.has_value());
  const Mat3 q = q_transport(prev, cloud.basis, *w);
  const Mat3 expected = q * before_n.to_mat() * q.transposed();
  CHECK((cloud.state.cov.joint.a_n.to_mat() - expected).frobenius() <
        1e-12 * std::max(1.0, expected.frobenius()));
}

TEST_CASE("fast update refuses a degenerate spectrum") {
  TrackedCloud iso;
  LufaPolicy policy;
  for (int x = -1; x <= 1; x += 2)
    for (int y = -1; y <= 1; y += 2)
      for (int z = -1; z <= 1; z += 2)
        begin_step(iso, {double(x), double(y), double(z)}, SymMat3::identity());
  const StepContext ctx = begin_step(iso, {0.5, 0.5, 0.5}, SymMat3::identity());
  const Propagated before = iso.state.cov;
  CHECK_FALSE(fast_covariance_update(iso, ctx, SymMat3::identity(), policy));
  // state untouched on fallback
  CHECK(iso.state.cov.a_lambda[0] == before.a_lambda[0]);
  CHECK(iso.state.cov.joint.a_n.frobenius() == before.joint.a_n.frobenius());
}

TEST_CASE("add_point runs the full schedule with exact refresh spacing") {
  PlaneSampler sampler(217);
  LufaPolicy policy;
  policy.tau_rel = 0.05;  // quiet gate on a homogeneous plane
  TrackedCloud cloud;

  std::vector<std::int64_t> rigorous_at;
  for (int i = 1; i <= 1000; ++i) {
    const SymMat3 ap = SymMat3::scaled_identity(1e-4);
    const Mode mode = add_point(cloud, sampler.next(), ap, policy);
    if (i < 200) CHECK(mode == Mode::warmup);
    if (mode == Mode::rigorous || mode == Mode::frozen)
      rigorous_at.push_back(i);
    if (i == 1000) CHECK(mode == Mode::frozen);
  }

  REQUIRE(rigorous_at.size() == 9);
  CHECK(rigorous_at.front() == 200);
  for (std::size_t i = 1; i < rigorous_at.size(); ++i)
    CHECK(rigorous_at[i] - rigorous_at[i - 1] == 100);

  // frozen: storage released, inputs ignored
  CHECK(cloud.points.empty());
  CHECK(cloud.point_covs.empty());
  CHECK(cloud.stats.k == 1000);
  CHECK(add_point(cloud, {0, 0, 0}, SymMat3{}, policy) == Mode::frozen);
  CHECK(cloud.stats.k == 1000);
}

TEST_CASE("add_point on a degenerate cloud falls back without garbage") {
  LufaPolicy policy;
  policy.n_min = 24;
  policy.n_max = 1000;
  TrackedCloud iso;
  Mode last = Mode::warmup;
  // three full cube-corner cycles: the sample covariance is exactly
  // isotropic when the last corner lands, so the activation refresh at
  // n_min hits the degenerate-spectrum guard
  for (int cycle = 0; cycle < 3; ++cycle)
    for (int x = -1; x <= 1; x += 2)
      for (int y = -1; y <= 1; y += 2)
        for (int z = -1; z <= 1; z += 2)
          last = add_point(iso, {double(x), double(y), double(z)},
                           SymMat3::identity(), policy);
  CHECK(last == Mode::rigorous);
  CHECK(iso.state.cov.a_lambda[0] == 0.0);
  CHECK(iso.state.cov.joint.a_n.frobenius() == 0.0);
}

TEST_CASE("clean plane: normal-eigenvalue variance and center trace never grow") {
  PlaneSampler sampler(223, 8.0, 4.0, 0.0);  // exact plane
  LufaPolicy policy;
  policy.n_min = 10;
  policy.n_max = 100000;
  policy.tau_rel = 0.05;
  const SymMat3 ap = SymMat3::scaled_identity(1e-4);

  TrackedCloud cloud;
  double prev_l0 = -1.0, prev_tm = -1.0;
  bool have_prev = false;
  for (int i = 1; i <= 600; ++i) {
    add_point(cloud, sampler.next(), ap, policy);
    if (cloud.state.mode == Mode::warmup) continue;
    const double l0 = cloud.state.cov.a_lambda[0];
    const double tm = cloud.state.cov.joint.a_m.trace();
    if (have_prev) {
      CHECK(l0 <= prev_l0 + 1e-18);
      CHECK(tm <= prev_tm + 1e-18);
    }
    prev_l0 = l0;
    prev_tm = tm;
    have_prev = true;
  }
  // exact closed form for the center block under identical isotropic inputs
  CHECK(prev_tm == doctest::Approx(3.0 * 1e-4 / 600.0).epsilon(1e-9));
}

TEST_CASE("joint covariance stays PSD along a noisy stream") {
  PlaneSampler sampler(227, 6.0, 3.0, 0.05);
  LufaPolicy policy;
  policy.n_min = 20;
  policy.n_ct = 25;
  policy.n_max = 100000;
  policy.tau_rel = 0.05;

  Rng noise_rng(228);
  TrackedCloud cloud;
  for (int i = 1; i <= 400; ++i) {
    // heterogeneous anisotropic per-point covariances
    const Vec3 axis = noise_rng.unit_vec3();
    const SymMat3 ap = SymMat3::scaled_identity(5e-5) +
                       (2e-4 * noise_rng.uniform01()) * self_outer(axis);
    add_point(cloud, sampler.next(), ap, policy);
    if (cloud.state.mode == Mode::warmup) continue;

    const auto m6 = cloud.state.cov.joint.to_matrix6();
    const double tr = testsupport::trace6(m6);
    CHECK(testsupport::min_eig6(m6) >= -1e-10 * std::max(tr, 1e-30));
    for (int j = 0; j < 3; ++j) CHECK(cloud.state.cov.a_lambda[j] >= 0.0);
  }
}

TEST_CASE("residual_variance identities") {
  JointCovariance joint;
  const Vec3 n{0.0, 0.0, 1.0};

  // plane perfectly known: only the point's own noise remains
  CHECK(residual_variance({1, 2, 3}, SymMat3::scaled_identity(0.04), n, {0, 0, 0},
                          joint) == doctest::Approx(0.04));

  // point at the center: the normal block cannot contribute
  joint.a_n = SymMat3::scaled_identity(0.5);
  joint.a_m = SymMat3::scaled_identity(0.01);
  const Vec3 m{4.0, -1.0, 2.0};
  CHECK(residual_variance(m, SymMat3{}, n, m, joint) == doctest::Approx(0.01));

  // roundoff-negative combinations clamp to zero
  joint = JointCovariance{};
  joint.a_m = SymMat3::scaled_identity(1e-4);
  joint.a_nm = 1e-4 * Mat3::identity();
  const Vec3 p = m + n;
  CHECK(residual_variance(p, SymMat3{}, n, m, joint) == 0.0);

  CHECK_THROWS_AS((residual_variance(Vec3{}, SymMat3{}, Vec3{0.0, 0.0, 2.0}, Vec3{}, joint)),
                  std::invalid_argument);
}

TEST_CASE("residual_variance matches a direct quadratic form") {
  Rng rng(229);
  for (int trial = 0; trial < 50; ++trial) {
    // build a PSD joint from random square roots
    Mat3 g;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) g(r, c) = rng.normal();
    Mat3 h;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) h(r, c) = rng.normal();

    JointCovariance joint;
    joint.a_n = SymMat3::from_mat(g * g.transposed());
    joint.a_m = SymMat3::from_mat(h * h.transposed());
    joint.a_nm = 0.1 * (g * h.transposed());

    const Vec3 n = rng.unit_vec3();
    const Vec3 p = rng.normal_vec3();
    const Vec3 m = rng.normal_vec3();
    const SymMat3 ap = SymMat3::scaled_identity(0.3);

    const Vec3 r = p - m;
    const double direct = ap.quad(n) + joint.a_n.quad(r) + joint.a_m.quad(n) -
                          2.0 * dot(r, joint.a_nm * n);
    const double got = residual_variance(p, ap, n, m, joint);
    CHECK(got == doctest::Approx(std::max(direct, 0.0)).epsilon(1e-12));
  }
}
