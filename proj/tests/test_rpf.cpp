#include <gtest/gtest.h>

#include <cmath>

#include "property.hpp"
#include "rdslab/rpf.hpp"

using namespace rdslab;

namespace {

Cocycle amaps(Potential pot, std::uint64_t seed = 7, const std::string& obs = "", int N = 256) {
  const DriverSpec spec = DriverSpec::iid({0.3, 0.3, 0.4});
  return Cocycle(sample_path(spec, seed, 600), Family::linear(ParamField::table({0.55, 0.75, 0.9})), pot, N, 1.0,
                 obs.empty() ? Observable{} : parse_observable(obs));
}

Cocycle doubling(const std::string& obs = "x-1/2") {
  return Cocycle(sample_path(DriverSpec::iid({1.0}), 1, 400), Family::linear(ParamField::table({0.5})), Potential{}, 256,
                 1.0, parse_observable(obs));
}

Cocycle mp_markov() {
  Eigen::MatrixXd P(2, 2);
  P << 0.8, 0.2, 0.3, 0.7;
  return Cocycle(sample_path(DriverSpec::markov(P), 4, 600), Family::manneville_pomeau(ParamField::table({0.3, 0.7})),
                 Potential{}, 256, 1.0, parse_observable("x"));
}

}  // namespace

TEST(Rpf, ConformalCaseIsLebesgue) {
  const Cocycle cc = amaps(Potential{PotentialKind::Smooth});
  const RPFTriplet t = build_triplet(cc, 0, 20, 30);
  const GridMeasure leb = GridMeasure::lebesgue(256);
  for (int j = 0; j <= 20; ++j) {
    if (j < 20) EXPECT_NEAR(t.lambda[j], 1.0, 1e-12);
    double hdev = 0.0;
    for (int k = 0; k < 256; ++k) hdev = std::max(hdev, std::abs(t.h[j][k] - 1.0));
    EXPECT_LE(hdev, 1e-8) << "j=" << j;
    EXPECT_LE(t.nu[j].total_variation(leb), 1e-8) << "j=" << j;
  }
}

TEST(Rpf, DoublingWithZeroPotential) {
  const Cocycle cc = doubling();
  const RPFTriplet t = build_triplet(cc, 0, 10, 40);
  for (int j = 0; j < 10; ++j) {
    EXPECT_NEAR(t.lambda[j], 2.0, 1e-12);
    EXPECT_NEAR(t.lambda_dual[j], 2.0, 1e-12);
  }
  EXPECT_LE(t.nu[3].total_variation(GridMeasure::lebesgue(256)), 1e-12);
  EXPECT_NEAR(t.center_at(0), integrate(GridFn::sample(256, 1.0, [](double x) { return x - 0.5; }), t.mu[0]), 1e-15);
}

TEST(Rpf, TripletIdentities) {
  // nu_j(h_j) = 1, L_j h_j = lambda_j h_{j+1}, and nu_{j+1}(L_j g) = lambda_j nu_j(g).
  const Cocycle cc = mp_markov();
  const RPFTriplet t = build_triplet(cc, 0, 12);
  EXPECT_LE(t.residual, 1e-10);
  CounterRng rng(3);
  for (int j = 0; j < 12; ++j) {
    EXPECT_NEAR(integrate(t.h[j], t.nu[j]), 1.0, 1e-12);
    const GridFn Lh = apply_transfer(cc.context(j), t.h[j]);
    EXPECT_LE(sup_norm(Lh - t.h[j + 1] * t.lambda[j]), 1e-12 * sup_norm(Lh));
    const GridFn g = random_holder(256, 1.0, rng);
    const double lhs = integrate(apply_transfer(cc.context(j), g), t.nu[j + 1]);
    EXPECT_NEAR(lhs, t.lambda[j] * integrate(g, t.nu[j]), 2e-3 * holder_norm(g)) << "j=" << j;
  }
}

TEST(Rpf, NormalizedOperatorIsMarkov) {
  const Cocycle cc = mp_markov();
  const RPFTriplet t = build_triplet(cc, 0, 8);
  EXPECT_TRUE(prop::forall(20, [&](CounterRng& rng, int i) -> std::string {
    const long j = i % 8;
    const GridFn one(256, 1.0, 1.0);
    if (sup_norm(normalized_apply(cc, t, j, one) - one) > 1e-13) return "L 1 != 1";
    GridFn g = random_holder(256, 1.0, rng);
    for (auto& v : g.values()) v = std::abs(v);
    if (min_value(normalized_apply(cc, t, j, g)) < 0.0) return "not positive";
    return "";
  }));
}

TEST(Rpf, CertificatePassesOnThreeRegimes) {
  CounterRng rng(5);
  std::vector<GridFn> gs, fs;
  for (int i = 0; i < 8; ++i) {
    gs.push_back(random_holder(256, 1.0, rng));
    fs.push_back(random_holder(256, 1.0, rng));
  }
  {
    const Cocycle cc = doubling();
    const Certificate c = verify_rpf(cc, build_triplet(cc, 0, 16), gs, fs, 15);
    EXPECT_TRUE(c.pass()) << c.first_failure();
  }
  {
    const Cocycle cc = amaps(Potential{});
    const Certificate c = verify_rpf(cc, build_triplet(cc, 0, 16), gs, fs, 15);
    EXPECT_TRUE(c.pass()) << c.first_failure();
  }
  {
    const Cocycle cc = mp_markov();
    const Certificate c = verify_rpf(cc, build_triplet(cc, 0, 16), gs, fs, 15);
    EXPECT_TRUE(c.pass()) << c.first_failure();
    EXPECT_TRUE(c.first_failure().empty());
  }
}

TEST(Rpf, CertificateReportsFailureWhenSlackIsNegative) {
  // Scaling the right sides by 1e-9 must break (iv).
  const Cocycle cc = doubling();
  CounterRng rng(6);
  const Certificate c =
      verify_rpf(cc, build_triplet(cc, 0, 6), {random_holder(256, 1.0, rng)}, {random_holder(256, 1.0, rng)}, 5,
                 1e-9 - 1.0);
  EXPECT_FALSE(c.pass());
  EXPECT_FALSE(c.first_failure().empty());
  bool iv_failed = false;
  for (const CertificateRow& r : c.rows) iv_failed |= r.check == "iv" && !r.pass;
  EXPECT_TRUE(iv_failed);
}

TEST(Rpf, BackDepthDrivesRhoProductBelowTolerance) {
  const Cocycle cc = amaps(Potential{});
  bool capped = true;
  const int d = default_back_depth(cc, 0, 10, &capped);
  EXPECT_FALSE(capped);
  EXPECT_LT(rho_product(cc, 10, d), 1e-6);
  EXPECT_LT(rho_product(cc, -d, d), 1e-6);
  EXPECT_TRUE(d == 1 || rho_product(cc, 10, d - 1) >= 1e-6 || rho_product(cc, -(d - 1), d - 1) >= 1e-6);
}

TEST(Rpf, GeneratingDecompositions) {
  EXPECT_TRUE(prop::forall(40, [](CounterRng& rng, int i) -> std::string {
    const GridFn g = random_holder(256, 1.0, rng, 0.5 + 2.0 * rng.uniform());
    const Decomposition d = i % 2 ? generating_maps2(g, ConeSpec{Regime::Maps2, 4.0 / 3.0, 1.0})
                                  : generating_maps1(g, ConeSpec{Regime::Maps1, 2.0, 1.0});
    if (!d.in_cone) return "pieces outside the cone";
    if (d.lhs > d.rhs * (1 + 1e-12)) return "norm bound " + std::to_string(d.lhs) + " > " + std::to_string(d.rhs);
    GridFn back = i % 2 ? d.g1 : d.g1 - d.g2;
    back += i % 2 ? -d.c1 : -(d.c1 - d.c2);
    if (sup_norm(back - g) > 1e-12 * (1 + sup_norm(g))) return "pieces do not reassemble g";
    return "";
  }));
}
