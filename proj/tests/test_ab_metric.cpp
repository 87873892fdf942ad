#include <gtest/gtest.h>

#include "support.hpp"

using namespace finslerlab;
using namespace testing_support;

namespace {

double det(const Mat<double>& m) {
  const Vec<double> ev = symmetric_eigenvalues(m);
  double d = 1.0;
  for (double e : ev) d *= e;
  return d;
}

std::vector<PhiSpec> sample_phis() {
  return {phi_riemannian(), phi_randers(0.8), phi_berwald(), phi_sigma(2.0, 0.5),
          phi_quadrature(OdeParams{1.0, 0.5, -0.3, 0.2})};
}

ABMetric random_ab(Gen& g, int n, const PhiSpec& phi) {
  return ABMetric{random_metric(g, n), random_form(g, n, 0.12), phi, phi.name()};
}

}  // namespace

TEST(F, RandersOnEuclidean) {
  const ABMetric m{euclidean_metric(3), constant_form({0.2, -0.1, 0.3}), phi_randers(1.0), "r"};
  const TangentVector y{1.0, 2.0, -0.5};
  EXPECT_NEAR(F_eval(m, Point{0.1, 0.1, 0.1}, y), y.norm() + 0.2 - 0.2 - 0.15, 1e-15);
}

TEST(F, PositivelyHomogeneous) {
  Gen g(1);
  for (const PhiSpec& phi : sample_phis()) {
    const ABMetric m = random_ab(g, 3, phi);
    for (int i = 0; i < 10; ++i) {
      const Point x = g.point_in_ball(3, 0.6);
      const TangentVector y = g.direction(3);
      const double lam = g.uniform(0.1, 5.0);
      TangentVector ly = y;
      for (double& c : ly.comps) c *= lam;
      EXPECT_NEAR(F_eval(m, x, ly), lam * F_eval(m, x, y), 1e-13 * lam) << phi.name();
      EXPECT_GT(F_eval(m, x, y), 0.0);
    }
  }
}

TEST(F, RejectsZeroVectorAndOutsidePoints) {
  const ABMetric m = funk_metric(2);
  EXPECT_THROW(F_eval(m, Point{0.1, 0.1}, TangentVector{0.0, 0.0}), DomainError);
  EXPECT_THROW(F_eval(m, Point{0.8, 0.8}, TangentVector{1.0, 0.0}), DomainError);
  EXPECT_THROW(F_eval(m, Point{0.1, 0.1}, TangentVector{1.0, 0.0, 0.0}), DomainError);
}

TEST(FundamentalTensor, RiemannianReducesToA) {
  Gen g(2);
  const MetricField a = random_metric(g, 3);
  const ABMetric m{a, random_form(g, 3), phi_riemannian(), "riemann"};
  const Point x = g.point_in_ball(3, 0.5);
  EXPECT_LT(max_diff(fundamental_tensor(m, x, g.direction(3)).g, a(x)), 1e-14);
}

TEST(FundamentalTensor, MatchesFiniteDifferenceHessian) {
  Gen g(3);
  for (const PhiSpec& phi : sample_phis()) {
    const ABMetric m = random_ab(g, 3, phi);
    const Point x = g.point_in_ball(3, 0.6);
    const TangentVector y = g.direction(3);
    const FundamentalTensor ft = fundamental_tensor(m, x, y);
    const Mat<double> oracle = fd_hessian(
        [&](const Vec<double>& v) {
          const double f = F_eval(m, x, TangentVector(v));
          return 0.5 * f * f;
        },
        y.comps);
    EXPECT_LT(max_diff(ft.g, oracle), 1e-6) << phi.name();
    EXPECT_TRUE(ft.positive_definite);
  }
}

// det g = phi^{n+1} (phi - s phi')^{n-2} (phi - s phi' + (b^2 - s^2) phi'') det a
TEST(FundamentalTensor, DeterminantFormula) {
  Gen g(4);
  for (const PhiSpec& phi : sample_phis()) {
    for (int n = 2; n <= 4; ++n) {
      const ABMetric m = random_ab(g, n, phi);
      const Point x = g.point_in_ball(n, 0.6);
      const TangentVector y = g.direction(n);
      const Mat<double> a = m.alpha(x);
      const Vec<double> b = m.beta(x);
      const double al = std::sqrt(bilinear(a, y.comps, y.comps));
      const double s = dot(b, y.comps) / al;
      const double b2 = bilinear(inverse(a), b, b);
      const Jet2 j = phi.jet(s);
      const double f = j.f0 - s * j.f1;
      const double want = std::pow(j.f0, n + 1) * std::pow(f, n - 2) * (f + (b2 - s * s) * j.f2) * det(a);
      EXPECT_NEAR(det(fundamental_tensor(m, x, y).g), want, 1e-11 * std::abs(want)) << phi.name() << " n=" << n;
    }
  }
}

TEST(Spray, FormulaAgreesWithDefinition) {
  Gen g(5);
  for (const PhiSpec& phi : sample_phis()) {
    for (int trial = 0; trial < 10; ++trial) {
      const int n = g.integer(2, 4);
      const ABMetric m = random_ab(g, n, phi);
      const Point x = g.point_in_ball(n, 0.6);
      const TangentVector y = g.direction(n);
      const Vec<double> a = spray_ab(m, x, y);
      const Vec<double> b = spray_from_definition(m, x, y);
      EXPECT_LT(max_diff(a, b), 1e-11 * (1.0 + max_abs(b))) << phi.name();
    }
  }
}

TEST(Spray, RiemannianCaseAndHomogeneity) {
  Gen g(6);
  const MetricField a = random_metric(g, 3);
  const ABMetric m{a, random_form(g, 3), phi_riemannian(), "riemann"};
  const Point x = g.point_in_ball(3, 0.5);
  const TangentVector y = g.direction(3);
  EXPECT_LT(max_diff(spray_ab(m, x, y), spray_riemann(a, x, y)), 1e-14);
  const ABMetric r = random_ab(g, 3, phi_berwald());
  const Vec<double> G = spray_ab(r, x, y);
  TangentVector ly = y;
  for (double& c : ly.comps) c *= 2.5;
  const Vec<double> Gl = spray_ab(r, x, ly);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(Gl[i], 6.25 * G[i], 1e-12 * (1.0 + std::abs(Gl[i])));
}

// With the minus sign on <x,y> the projective factor is -F/2.
TEST(Spray, FunkIsMinusHalfFTimesY) {
  Gen g(7);
  const ABMetric funk = funk_metric(3);
  for (int i = 0; i < 20; ++i) {
    const Point x = g.point_in_ball(3, 0.9);
    const TangentVector y = g.direction(3);
    const double F = F_eval(funk, x, y);
    const Vec<double> G = spray_ab(funk, x, y);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(G[k], -0.5 * F * y[k], 1e-12 * (1.0 + F));
  }
}

TEST(Qtp, RegularityViolation) {
  EXPECT_THROW(qtp(phi_berwald(), 1.05, 1.21), RegularityError);  // 1 - 3s^2 + 2b^2 < 0
  EXPECT_NO_THROW(qtp(phi_berwald(), 0.5, 0.81));
  const QTP r = qtp(phi_randers(1.0), 0.3, 0.5);
  EXPECT_EQ(r.Q, 1.0);
  EXPECT_EQ(r.Psi, 0.0);
  EXPECT_NEAR(r.Theta, 1.0 / (2.0 * 1.3), 1e-15);
}

TEST(Navigation, IndicatrixIsShiftedUnitSphere) {
  Gen g(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(2, 4);
    const MetricField h = random_metric(g, n);
    const Vec<double> w0 = g.vec(n, 0.2);
    const VectorField W(n, 1.0, [w0](auto x) {
      using T = scalar_of<decltype(x)>;
      Vec<T> r(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) r[i] = w0[i] * (1.0 + 0.3 * x[0]);
      return r;
    });
    const NavigationData nav{h, W};
    const ABMetric F = randers_from_navigation(nav);
    const Point x = g.point_in_ball(n, 0.5);
    const Mat<double> hx = h(x);
    Vec<double> u = g.unit_vector(n);
    const double un = std::sqrt(bilinear(hx, u, u));
    for (double& c : u) c /= un;
    const Vec<double> Wx = W(x);
    Vec<double> y(n);
    for (int i = 0; i < n; ++i) y[i] = u[i] + Wx[i];
    EXPECT_NEAR(F_eval(F, x, TangentVector(y)), 1.0, 1e-13);
  }
}

TEST(Navigation, RoundTrip) {
  Gen g(9);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = g.integer(2, 4);
    const MetricField a = random_metric(g, n);
    const OneFormField b = random_form(g, n, 0.15);
    const Point x = g.point_in_ball(n, 0.5);
    const NavigationSample nav = randers_to_navigation(a, b, x);
    const auto [a2, b2] = detail::navigation_pointwise(nav.h, nav.W);
    EXPECT_LT(max_diff(a2, a(x)), 1e-12);
    EXPECT_LT(max_diff(b2, b(x)), 1e-12);
  }
  EXPECT_THROW(randers_to_navigation(euclidean_metric(2), constant_form({1.0, 0.5}), Point{0.0, 0.0}), DomainError);
}
