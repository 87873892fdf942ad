#include <gtest/gtest.h>

#include "support.hpp"

using namespace finslerlab;
using namespace testing_support;

namespace {

double nonzero(Gen& g, double lo, double hi) { return (g.uniform(0, 1) < 0.5 ? -1.0 : 1.0) * g.uniform(lo, hi); }

Quadruple random_orbit_point(Gen& g, const Quadruple& k) {
  Quadruple r = k;
  const int steps = g.integer(1, 4);
  for (int i = 0; i < steps; ++i) r = g.uniform(0, 1) < 0.5 ? transform_g(g.uniform(-2, 2), r) : transform_h(nonzero(g, 0.4, 2.5), r);
  return r;
}

bool same_quadruple(const Quadruple& a, const Quadruple& b, double tol) {
  return std::abs(a.k1 - b.k1) <= tol && std::abs(a.k2 - b.k2) <= tol && std::abs(a.k3 - b.k3) <= tol &&
         std::abs(a.eps - b.eps) <= tol;
}

}  // namespace

TEST(Transforms, Examples) {
  const Quadruple k{2, 0, -3, 2};
  EXPECT_TRUE(same_quadruple(transform_g(1.0, k), Quadruple{3, 0, -2, 2}, 0.0));
  EXPECT_TRUE(same_quadruple(transform_g(0.0, k), k, 0.0));
  EXPECT_TRUE(same_quadruple(transform_h(1.0, k), k, 0.0));
  EXPECT_TRUE(same_quadruple(transform_h(2.0, Quadruple{1, 1, 1, 1}), Quadruple{4, 16, 4, 2}, 0.0));
  EXPECT_THROW(transform_h(0.0, k), Error);
}

TEST(Transforms, GroupRelations) {
  Gen g(1);
  for (int i = 0; i < 100; ++i) {
    const Quadruple k = g.quadruple(2.0);
    const double u1 = g.uniform(-2, 2), u2 = g.uniform(-2, 2), v = nonzero(g, 0.3, 3.0);
    EXPECT_TRUE(same_quadruple(transform_g(u1, transform_g(u2, k)), transform_g(u1 + u2, k), 1e-12 * 16));
    EXPECT_TRUE(same_quadruple(transform_h(v, transform_g(u1, k)), transform_g(u1 * v * v, transform_h(v, k)),
                               1e-12 * std::pow(std::max(1.0, std::abs(v)), 4) * 16));
  }
}

TEST(Invariants, Examples) {
  const InvariantSignature b = invariants(Quadruple{2, 0, -3, 2});
  EXPECT_EQ(b.d1, 1.0);
  EXPECT_EQ(b.d2, -24.0);
  EXPECT_EQ(b.d3, 5.0);
  EXPECT_EQ(b.p.tag, PTag::FiniteImag);
  EXPECT_NEAR(b.p.coef, 2.0 * std::sqrt(6.0) / 5.0, 1e-15);
  EXPECT_EQ(b.q.tag, QTag::Finite);
  EXPECT_NEAR(b.q.value, -2.0 / 3.0, 1e-15);

  const InvariantSignature r = invariants(Quadruple{0, 0, 0, 1});
  EXPECT_EQ(r.p.tag, PTag::Zero);
  EXPECT_EQ(r.q.tag, QTag::Inf);
  const InvariantSignature z = invariants(Quadruple{0, 0, 0, 0});
  EXPECT_EQ(z.p.tag, PTag::Zero);
  EXPECT_EQ(z.q.tag, QTag::Zero);
  EXPECT_EQ(invariants(Quadruple{1, -1, 1, 0}).p.tag, PTag::Inf);
  EXPECT_EQ(invariants(Quadruple{1, 3, 1, 0}).p.tag, PTag::ImagInf);
  EXPECT_EQ(invariants(Quadruple{1, -1, 0, 0}).p.tag, PTag::FiniteReal);
}

TEST(Invariants, DeltaIdentityAndInvariance) {
  Gen g(2);
  for (int i = 0; i < 200; ++i) {
    const Quadruple k = g.quadruple(2.0);
    const InvariantSignature s = invariants(k);
    EXPECT_NEAR(s.d1 - s.d2, s.d3 * s.d3, 1e-12 * (std::abs(s.d1) + std::abs(s.d2) + s.d3 * s.d3));
    const Quadruple k2 = random_orbit_point(g, k);
    const InvariantSignature t = invariants(k2);
    EXPECT_EQ(s.p.tag, t.p.tag);
    EXPECT_EQ(s.q.tag, t.q.tag);
    EXPECT_TRUE(same_p(s.p, t.p)) << s.p.str() << " vs " << t.p.str();
    EXPECT_TRUE(same_q(s.q, t.q)) << s.q.str() << " vs " << t.q.str();
  }
}

TEST(Invariants, DeltasUnderTransforms) {
  Gen g(3);
  for (int i = 0; i < 50; ++i) {
    const Quadruple k = g.quadruple();
    const InvariantSignature s = invariants(k);
    const InvariantSignature a = invariants(transform_g(g.uniform(-2, 2), k));
    const double sc = std::abs(s.d1) + std::abs(s.d2) + s.d3 * s.d3 + 1.0;
    EXPECT_NEAR(a.d1, s.d1, 1e-12 * sc * 16);
    EXPECT_NEAR(a.d2, s.d2, 1e-12 * sc * 16);
    EXPECT_NEAR(a.d3, s.d3, 1e-12 * sc);
    const double v = nonzero(g, 0.5, 2.0);
    const InvariantSignature h = invariants(transform_h(v, k));
    EXPECT_NEAR(h.d1, std::pow(v, 4) * s.d1, 1e-12 * sc * 16);
    EXPECT_NEAR(h.d2, std::pow(v, 4) * s.d2, 1e-12 * sc * 16);
    EXPECT_NEAR(h.d3, v * v * s.d3, 1e-12 * sc * 4);
  }
}

TEST(SameType, ExamplesAndEquivalence) {
  EXPECT_TRUE(same_type(Quadruple{2, 0, -3, 2}, Quadruple{3, 0, -2, 2}));
  EXPECT_FALSE(same_type(Quadruple{2, 0, -3, 2}, Quadruple{0, 0, 0, 1}));
  Gen g(4);
  std::vector<Quadruple> set;
  std::vector<int> orbit;
  for (int b = 0; b < 10; ++b) {
    const Quadruple k = g.quadruple(2.0);
    for (int j = 0; j < 5; ++j) {
      set.push_back(j == 0 ? k : random_orbit_point(g, k));
      orbit.push_back(b);
    }
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    EXPECT_TRUE(same_type(set[i], set[i]));
    for (std::size_t j = 0; j < set.size(); ++j) {
      const bool ij = same_type(set[i], set[j]);
      EXPECT_EQ(ij, same_type(set[j], set[i]));
      EXPECT_EQ(ij, orbit[i] == orbit[j]) << i << " " << j;
    }
  }
}

TEST(Reduce, Examples) {
  const Reduction a = reduce(Quadruple{2, 0, -3, 2});
  EXPECT_EQ(a.form.kind, ReducedKind::D1p);
  EXPECT_NEAR(a.form.sigma, 1.0, 1e-15);
  const PValue pa = table_p(a.form);
  EXPECT_EQ(pa.tag, PTag::FiniteImag);
  EXPECT_NEAR(pa.coef, 2.0 * std::sqrt(6.0) / 5.0, 1e-15);

  const Reduction b = reduce(Quadruple{2, 0, -2, 0});
  EXPECT_EQ(b.form.kind, ReducedKind::D1z);
  EXPECT_EQ(b.form.sigma, 1.0);
  EXPECT_EQ(table_p(b.form).tag, PTag::FiniteImag);
  EXPECT_EQ(table_p(b.form).coef, 1.0);

  const Reduction c = reduce(Quadruple{0, 1, 1, 0});
  EXPECT_EQ(c.form.kind, ReducedKind::D1n);
  EXPECT_NEAR(c.form.sigma, 0.5, 1e-15);
  EXPECT_NEAR(table_p(c.form).coef, -2.0, 1e-15);
  EXPECT_TRUE(p_in_range(c.form, table_p(c.form)));

  EXPECT_THROW(reduce(Quadruple{0, 0, 0, 1}), Error);
}

TEST(Reduce, RecipeLandsOnNormalForm) {
  Gen g(5);
  for (int i = 0; i < 200; ++i) {
    const Quadruple k = g.quadruple(2.0);
    const Reduction r = reduce(k);
    const Quadruple want = reduced_quadruple(r.form, r.reduced.eps);
    EXPECT_TRUE(same_quadruple(r.reduced, want, 1e-9)) << to_string(r.form.kind) << " " << r.form.sigma;
    EXPECT_TRUE(same_type(k, r.reduced));
    EXPECT_TRUE(same_p(table_p(r.form), invariants(k).p, 1e-9));
    EXPECT_TRUE(p_in_range(r.form, table_p(r.form)));
  }
  // Delta_1 = 0 with k2 != 0
  const Reduction z = reduce(Quadruple{1.5, 1, 0.5, 0.3});
  EXPECT_EQ(z.form.kind, ReducedKind::D1z);
  EXPECT_TRUE(same_quadruple(z.reduced, reduced_quadruple(z.form, z.reduced.eps), 1e-12));
}

TEST(TableOne, FormulasMatchInvariants) {
  Gen g(6);
  for (int i = 0; i < 20; ++i) {
    double s = g.uniform(-3, 3);
    if (std::abs(s) < 0.05 || std::abs(s + 0.5) < 0.05 || std::abs(s + 0.25) < 0.05) s = 0.7;
    const ReducedForm p{ReducedKind::D1p, s};
    EXPECT_TRUE(same_p(table_p(p), invariants(reduced_quadruple(p)).p, 1e-12)) << s;
    EXPECT_TRUE(p_in_range(p, table_p(p))) << s;

    const ReducedForm z{ReducedKind::D1z, i % 2 == 0 ? 1.0 : -1.0};
    EXPECT_TRUE(same_p(table_p(z), invariants(reduced_quadruple(z)).p, 1e-12));
    EXPECT_TRUE(p_in_range(z, table_p(z)));

    double t = g.uniform(-0.95, 0.95);
    if (std::abs(t) < 0.02) t = 0.3;
    const ReducedForm n{ReducedKind::D1n, t};
    EXPECT_TRUE(same_p(table_p(n), invariants(reduced_quadruple(n)).p, 1e-12)) << t;
    EXPECT_TRUE(p_in_range(n, table_p(n))) << t;
  }
  EXPECT_EQ(table_p(ReducedForm{ReducedKind::D1p, -0.25}).tag, PTag::Inf);
  EXPECT_EQ(table_p(ReducedForm{ReducedKind::D1n, 0.0}).tag, PTag::ImagInf);
  EXPECT_THROW(ReducedForm({ReducedKind::D1p, -0.5}).validate(), Error);
  EXPECT_THROW(ReducedForm({ReducedKind::D1z, 0.5}).validate(), Error);
  EXPECT_THROW(ReducedForm({ReducedKind::D1n, 1.0}).validate(), Error);
}

TEST(PhiTransforms, RandersAndBerwaldImages) {
  Gen g(7);
  for (int i = 0; i < 20; ++i) {
    const double u = g.uniform(-0.5, 2.0), v = g.uniform(-2, 2);
    const PhiSpec psi = apply_g(u, phi_randers(v));
    const double s = g.uniform(-0.9, 0.9);
    EXPECT_NEAR(psi(s), std::sqrt(1 + u * s * s) + v * s, 1e-14);
  }
  const PhiSpec g1 = apply_g(1.0, phi_berwald());
  const PhiSpec shifted = phi_berwald_shifted();
  for (int i = 0; i <= 20; ++i) {
    const double s = -2.0 + 0.2 * i;
    EXPECT_NEAR(g1(s), shifted(s), 1e-13);
    EXPECT_NEAR(g1.d2(s), shifted.d2(s), 1e-12);
  }
  EXPECT_TRUE(same_quadruple(*g1.ode(), *shifted.ode(), 0.0));
}

TEST(PhiTransforms, ImagesSolveTransformedEquation) {
  Gen g(8);
  for (int i = 0; i < 20; ++i) {
    const Quadruple k = g.quadruple();
    const PhiSpec phi = phi_quadrature(k);
    const double u = g.uniform(-0.5, 0.5), v = nonzero(g, 0.5, 1.5);
    const PhiSpec a = apply_g(u, phi);
    const PhiSpec b = apply_h(v, phi);
    for (double s : {-0.2, 0.1, 0.25}) {
      EXPECT_LT(std::abs(ode_residual(a, transform_g(u, k), s)), 1e-8);
      EXPECT_LT(std::abs(ode_residual(b, transform_h(v, k), s)), 1e-8);
    }
    EXPECT_NEAR(a(0.0), 1.0, 1e-15);
    EXPECT_NEAR(a.d1(0.0), k.eps, 1e-12);
    EXPECT_NEAR(b.d1(0.0), v * k.eps, 1e-12);
  }
  EXPECT_THROW(apply_h(0.0, phi_berwald()), Error);
}

TEST(Reversibilize, Examples) {
  const Reversibilized b = reversibilize(phi_berwald());
  EXPECT_EQ(b.theta_coef, -2.0);
  const Reversibilized r = reversibilize(phi_randers(1.0));
  EXPECT_EQ(r.theta_coef, -1.0);
  for (int i = 0; i <= 20; ++i) {
    const double s = -1.0 + 0.1 * i;
    EXPECT_NEAR(b.phi(s), 1 + s * s, 1e-15);
    EXPECT_NEAR(r.phi(s), 1.0, 1e-15);
  }
  EXPECT_EQ(invariants(*b.phi.ode()).q.tag, QTag::Zero);
}

TEST(Reversibilize, QuadratureSolutionsBecomeEven) {
  const Reversibilized q = reversibilize(phi_quadrature(OdeParams{2, 0, -3, 2}));
  for (int i = 0; i <= 18; ++i) {
    const double s = 0.05 * i;
    EXPECT_LT(std::abs(q.phi(s) - q.phi(-s)), 1e-12);
  }
  Gen g(9);
  for (int i = 0; i < 10; ++i) {
    const Quadruple k = g.quadruple(2.0);
    const PhiSpec phi = phi_quadrature(k);
    const Reversibilized rv = reversibilize(phi);
    const double b0 = std::min(0.5, 0.9 * phi.validity_radius());
    if (regularity_check(phi, b0).pass) EXPECT_TRUE(regularity_check(rv.phi, b0).pass);
    EXPECT_EQ(invariants(*rv.phi.ode()).q.tag, QTag::Zero);
    EXPECT_EQ(rv.theta_coef, -k.eps);
  }
}

TEST(Circle, Examples) {
  const CircleCoords o = circle_coords(invariants(Quadruple{0, 0, 0, 0}));
  EXPECT_EQ(o.x, 0.0);
  EXPECT_EQ(o.y, 0.0);
  const CircleCoords c = circle_coords(invariants(Quadruple{2, 0, -3, 2}));
  EXPECT_NEAR(c.x, 2.0 * std::sqrt(24.0) * 5.0 / 49.0, 1e-15);
  EXPECT_NEAR(c.y, 10.0 / 49.0, 1e-15);
  EXPECT_GT(c.circle_residual, 0.1);  // the displayed pair is off the circles
  const CircleCoords d = circle_coords(invariants(Quadruple{1, 3, 1, 0}));
  EXPECT_EQ(d.x, 0.0);
  EXPECT_EQ(d.y, 0.0);
}

TEST(CanonicalPair, AgreesWithInverseChain) {
  const std::vector<ReducedForm> forms = {{ReducedKind::D1p, 1.0},  {ReducedKind::D1p, -0.3}, {ReducedKind::D1z, 1.0},
                                          {ReducedKind::D1z, -1.0}, {ReducedKind::D1n, 0.5},  {ReducedKind::D1n, -0.4}};
  Gen g(10);
  for (const ReducedForm& f : forms) {
    for (double mu : {-0.5, 0.0, 1.0}) {
      const MetricField abar = space_form_metric(mu, 3);
      const OneFormField bbar = closed_conformal_form(mu, 0.3, Vec<double>{0.1, 0.0, -0.05});
      const FieldPair c = canonical_pair(f, abar, bbar);
      const FieldPair ch = inverse_chain(abar, bbar, reduced_quadruple(f));
      for (int i = 0; i < 5; ++i) {
        const Point x = g.point_in_ball(3, 0.6);
        EXPECT_LT(max_diff(c.a(x), ch.a(x)), 1e-9) << to_string(f.kind) << " " << f.sigma;
        EXPECT_LT(max_diff(c.b(x), ch.b(x)), 1e-9) << to_string(f.kind) << " " << f.sigma;
      }
    }
  }
}

TEST(CanonicalPair, TrivialFormAndFlatness) {
  const FieldPair z = canonical_pair({ReducedKind::D1z, 1.0}, euclidean_metric(2), constant_form({0.0, 0.0}));
  EXPECT_LT(max_diff(z.a(Point{0.2, 0.1}), Mat<double>::identity(2)), 1e-15);
  EXPECT_EQ(max_abs(z.b(Point{0.2, 0.1})), 0.0);

  const ReducedForm f{ReducedKind::D1p, 1.0};
  const FieldPair p = canonical_pair(f, euclidean_metric(3), closed_conformal_form(0.0, 0.3, Vec<double>{0.1, 0, 0}));
  const ABMetric F{p.a, p.b, phi_quadrature(reduced_quadruple(f, 0.7)), "case-a"};
  FlatnessOptions opt;
  opt.samples = 30;
  opt.tolerance = 1e-6;
  const FlatnessReport r = certify_flatness(F, opt);
  EXPECT_TRUE(r.pass) << r.max_hamel;
}

TEST(NamedTypes, MatchExpectedInvariants) {
  for (const NamedType& t : named_types()) {
    const InvariantSignature s = invariants(t.k);
    if (t.name == "riemannian") EXPECT_EQ(s.q.tag, QTag::Zero);
    if (t.name == "randers") EXPECT_EQ(s.q.tag, QTag::Inf);
  }
  EXPECT_TRUE(same_type(named_types()[2].k, Quadruple{3, 0, -2, 2}));
}

TEST(CanonicalPair, DisplayedD1nPairIsConstantHomothety) {
  const ReducedForm f{ReducedKind::D1n, 0.5};
  const double q = std::sqrt(1 - 0.25);
  const double C = std::atan(0.5 / q);
  const MetricField abar = euclidean_metric(3);
  const OneFormField bbar = closed_conformal_form(0.0, 0.3, Vec<double>{0.1, 0.0, 0.0});
  const FieldPair with = canonical_pair(f, abar, bbar, true);
  const FieldPair without = canonical_pair(f, abar, bbar, false);
  const Point x{0.2, -0.1, 0.3};
  EXPECT_LT(max_diff(without.a(x), with.a(x) * std::exp(-0.5 * C / q)), 1e-14);
  EXPECT_LT(max_diff(without.b(x), scaled(with.b(x), std::exp(-0.25 * C / q))), 1e-14);
}
