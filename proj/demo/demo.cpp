// Certifies the Funk metric as projectively flat, traces one geodesic and
// classifies the structure constants of a non-Randers deformation.

#include <cstdio>

#include "finslerlab/finslerlab.hpp"

using namespace finslerlab;

int main() {
  const ABMetric funk = make_model(ModelId{});
  FlatnessOptions opt;
  opt.samples = 100;
  const FlatnessReport rep = certify_flatness(funk, opt);
  std::printf("funk n=3: hamel=%.3g rapcsak=%.3g spray=%.3g %s\n", rep.max_hamel, rep.max_rapcsak,
              rep.max_spray_dev, rep.pass ? "flat" : "NOT flat");

  const GeodesicTrace tr = integrate_geodesic(funk, Point{0.1, -0.2, 0.0}, TangentVector{0.3, 0.5, -0.2}, 0.9, 1e-3);
  std::printf("geodesic: %zu steps, deviation from chord %.3g\n", tr.points.size() - 1, straightness_deviation(tr));

  const Quadruple k{2, 0, -3, 2};
  const InvariantSignature sig = invariants(k);
  std::printf("k=(2,0,-3) eps=2: D1=%g D2=%g D3=%g p=%s q=%s\n", sig.d1, sig.d2, sig.d3, sig.p.str().c_str(),
              sig.q.str().c_str());
  const Reduction r = reduce(k);
  std::printf("normal form %s sigma=%g via u=%g v=%g\n", to_string(r.form.kind), r.form.sigma, r.u, r.v);
  return rep.pass ? 0 : 1;
}
