#include <gtest/gtest.h>

#include "support.hpp"

using namespace finslerlab;
using namespace testing_support;

namespace {

double funk_closed_form(const Point& x, const TangentVector& y) {
  const double r2 = dot(x.coords, x.coords), y2 = dot(y.comps, y.comps), xy = dot(x.coords, y.comps);
  return (std::sqrt((1 - r2) * y2 + xy * xy) - xy) / (1 - r2);
}

double berwald_closed_form(const Point& x, const TangentVector& y) {
  const double r2 = dot(x.coords, x.coords), y2 = dot(y.comps, y.comps), xy = dot(x.coords, y.comps);
  const double q = std::sqrt((1 - r2) * y2 + xy * xy);
  return (q + xy) * (q + xy) / ((1 - r2) * (1 - r2) * q);
}

TangentVector negate(TangentVector y) {
  for (double& c : y.comps) c = -c;
  return y;
}

}  // namespace

TEST(Funk, ClosedFormAndExample) {
  const ABMetric funk = funk_metric(3);
  EXPECT_NEAR(F_eval(funk, Point{0.5, 0, 0}, TangentVector{1, 0, 0}), 2.0 / 3.0, 1e-15);
  Gen g(1);
  for (int i = 0; i < 50; ++i) {
    const Point x = g.point_in_ball(3, 0.95);
    const TangentVector y = g.direction(3);
    EXPECT_NEAR(F_eval(funk, x, y), funk_closed_form(x, y), 1e-12);
  }
}

TEST(Funk, NavigationDataIsEuclideanWithWEqualX) {
  const ABMetric funk = funk_metric(3);
  Gen g(2);
  for (int i = 0; i < 20; ++i) {
    const Point x = g.point_in_ball(3, 0.9);
    const NavigationSample nav = randers_to_navigation(funk.alpha, funk.beta, x);
    EXPECT_LT(max_diff(nav.h, Mat<double>::identity(3)), 1e-12);
    EXPECT_LT(max_diff(nav.W, x.coords), 1e-12);
  }
}

TEST(Berwald, ClosedFormAndFamilyMember) {
  const ABMetric b = berwald_metric(3);
  const ABMetric f = family_sigma_metric(1.0, 2.0, 3);
  Gen g(3);
  for (int i = 0; i < 50; ++i) {
    const Point x = g.point_in_ball(3, 0.95);
    const TangentVector y = g.direction(3);
    const double want = berwald_closed_form(x, y);
    EXPECT_NEAR(F_eval(b, x, y), want, 1e-11 * want);
    EXPECT_NEAR(F_eval(f, x, y), want, 1e-11 * want);
  }
}

TEST(FamilySigma, FunkReflections) {
  const ABMetric funk = funk_metric(2);
  const ABMetric plus = family_sigma_metric(0.0, 1.0, 2);
  const ABMetric minus = family_sigma_metric(0.0, -1.0, 2);
  Gen g(4);
  for (int i = 0; i < 20; ++i) {
    const Point x = g.point_in_ball(2, 0.9);
    const TangentVector y = g.direction(2);
    EXPECT_NEAR(F_eval(plus, x, y), F_eval(funk, x, negate(y)), 1e-12);
    EXPECT_NEAR(F_eval(minus, x, y), F_eval(funk, x, y), 1e-12);
  }
}

TEST(FamilySigma, RegularityGate) {
  EXPECT_NO_THROW(family_sigma_metric(2.0, 0.5, 3));
  EXPECT_THROW(family_sigma_metric(1.0, 3.0, 3), RegularityError);
  const EpsRange r1 = family_sigma_eps_range(1.0);
  EXPECT_TRUE(r1.admissible);
  EXPECT_EQ(r1.lo, -r1.hi);
  EXPECT_GT(r1.hi, 1.0);
  EXPECT_LT(r1.hi, 4.0);
  EXPECT_NO_THROW(family_sigma_metric(1.0, 0.99 * r1.hi, 2));
  EXPECT_THROW(family_sigma_metric(1.0, 1.01 * r1.hi, 2), RegularityError);
}

TEST(SpaceForm, RadiusAndOrigin) {
  EXPECT_EQ(space_form_radius(-4.0), 0.5);
  EXPECT_EQ(space_form_radius(1.0), 1.0);
  EXPECT_EQ(space_form_radius(0.0, 2.0), 2.0);
  const MetricField h = space_form_metric(1.0, 3);
  EXPECT_LT(max_diff(h(Point{0, 0, 0}), Mat<double>::identity(3)), 1e-15);
  EXPECT_THROW(space_form_metric(1.0, 1), Error);
}

TEST(ClosedConformal, ClosedAndConformal) {
  Gen g(5);
  for (double mu : {-0.5, 0.0, 1.0}) {
    const MetricField h = space_form_metric(mu, 3);
    const OneFormField b = closed_conformal_form(mu, g.uniform(-1, 1), g.vec(3, 0.5));
    for (int i = 0; i < 20; ++i) {
      const CovariantData cd = covariant_derivative(b, h, g.point_in_ball(3, 0.8));
      EXPECT_LT(max_abs(cd.sij), 1e-12);
      const ConformalFit fit = conformal_fit(cd);
      EXPECT_LT(fit.residual, 1e-12) << mu;
    }
  }
}

TEST(ConformalField, LieDerivativeIsConformal) {
  Gen g(6);
  for (double mu : {-0.5, 0.0, 1.0}) {
    ConformalFieldParams p;
    p.mu = mu;
    p.lambda = g.uniform(-1, 1);
    p.q = Mat<double>(3);
    const double w = g.uniform(-1, 1);
    p.q(0, 2) = w;
    p.q(2, 0) = -w;
    p.a = g.vec(3, 0.5);
    p.b = g.vec(3, 0.5);
    const ConformalField cf = conformal_field(p);
    const MetricField h = space_form_metric(mu, 3);
    for (int i = 0; i < 10; ++i) {
      const CovariantData cd = covariant_derivative(cf.flat, h, g.point_in_ball(3, 0.8));
      EXPECT_LT(conformal_fit(cd).residual, 1e-10) << mu;
    }
  }
}

TEST(ConformalField, NonClosedWitnesses) {
  const MetricField h = euclidean_metric(3);
  const Point x{0.3, -0.2, 0.1};
  ConformalFieldParams pa;
  pa.q = Mat<double>(3);
  pa.a = Vec<double>{0.5, 0.0, 0.0};
  pa.b = Vec<double>{0.0, 0.0, 0.0};
  EXPECT_GT(max_abs(covariant_derivative(conformal_field(pa).flat, h, x).sij), 1e-3);
  ConformalFieldParams pq = pa;
  pq.a = Vec<double>{0.0, 0.0, 0.0};
  pq.q(0, 1) = 0.4;
  pq.q(1, 0) = -0.4;
  EXPECT_GT(max_abs(covariant_derivative(conformal_field(pq).flat, h, x).sij), 1e-3);
  ConformalFieldParams pl = pq;
  pl.q = Mat<double>(3);
  pl.lambda = 0.7;
  pl.b = Vec<double>{0.1, 0.2, 0.0};
  EXPECT_LT(max_abs(covariant_derivative(conformal_field(pl).flat, h, x).sij), 1e-14);
}

TEST(ConformalField, Validation) {
  ConformalFieldParams p;
  p.q = Mat<double>(2);
  p.a = Vec<double>{0.0, 0.0};
  p.b = Vec<double>{0.0, 0.0};
  EXPECT_THROW(conformal_field(p), Error);
  p.q = Mat<double>(3);
  p.q(0, 1) = 1.0;
  p.a = Vec<double>{0.0, 0.0, 0.0};
  p.b = Vec<double>{0.0, 0.0, 0.0};
  EXPECT_THROW(conformal_field(p), Error);
}

TEST(Examples, Example63ClosedForm) {
  const MetricField abar = euclidean_metric(3);
  const OneFormField bbar = closed_conformal_form(0.0, 0.3, Vec<double>{0.1, 0.0, 0.0});
  Gen g(7);
  for (int sign : {1, -1}) {
    const ABMetric F = example63_metric(sign, 0.4, abar, bbar);
    const PhiSpec phi = phi_zero_p(0.5 * sign, 0.4);
    for (int i = 0; i < 10; ++i) {
      const Point x = g.point_in_ball(3, 0.8);
      const TangentVector y = g.direction(3);
      const Vec<double> bb = bbar(x);
      const double t = dot(bb, bb);
      const double al = y.norm();
      const double want = std::exp(sign * t) * al * phi(dot(bb, y.comps) / al);
      EXPECT_NEAR(F_eval(F, x, y), want, 1e-12 * want);
    }
  }
  EXPECT_THROW(example63_metric(0, 0.4, abar, bbar), Error);
}

TEST(Examples, Example64Alpha) {
  const MetricField abar = euclidean_metric(3);
  const OneFormField bbar = closed_conformal_form(0.0, 0.3, Vec<double>{0.1, 0.0, 0.0});
  const ABMetric F = example64_metric(0.2, abar, bbar);
  Gen g(8);
  for (int i = 0; i < 10; ++i) {
    const Point x = g.point_in_ball(3, 0.8);
    const TangentVector y = g.direction(3);
    const Vec<double> bb = bbar(x);
    const double t = dot(bb, bb), be = dot(bb, y.comps);
    const double alpha = std::pow(1 + t * t, -0.75) * std::sqrt((1 + t * t) - t * be * be);
    EXPECT_NEAR(std::sqrt(bilinear(F.alpha(x), y.comps, y.comps)), alpha, 1e-13);
  }
}

TEST(Examples, FlatAndPerturbedControl) {
  FlatnessOptions opt;
  opt.samples = 30;
  opt.tolerance = 1e-6;
  for (ModelKind k : {ModelKind::Example63, ModelKind::Example64}) {
    ModelId id;
    id.kind = k;
    id.eps = 0.3;
    EXPECT_TRUE(certify_flatness(make_model(id), opt).pass) << to_string(k);
  }
  EXPECT_FALSE(certify_flatness(perturbed_funk_metric(3), opt).pass);
}

TEST(ModelId, NamesAndValidation) {
  const ModelKind kinds[] = {ModelKind::Funk,      ModelKind::Berwald,   ModelKind::SpaceForm,     ModelKind::FamilySigma,
                             ModelKind::Example63, ModelKind::Example64, ModelKind::PerturbedFunk, ModelKind::Euclidean};
  for (ModelKind k : kinds) {
    ModelId id;
    id.kind = k;
    id.dim = 2;
    id.sigma = 1.0;
    id.eps = 0.5;
    const ABMetric m = make_model(id);
    EXPECT_EQ(m.dim(), 2) << to_string(k);
    EXPECT_GT(F_eval(m, Point{0.1, 0.1}, TangentVector{1.0, 0.0}), 0.0) << to_string(k);
  }
  ModelId bad;
  bad.dim = 1;
  EXPECT_THROW(make_model(bad), Error);
  bad.dim = 3;
  bad.kind = ModelKind::Example63;
  bad.sign = 2;
  EXPECT_THROW(make_model(bad), Error);
}
