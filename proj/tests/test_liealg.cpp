#include "catch_amalgamated.hpp"

#include "qreach/expression.hpp"
#include "qreach/theorem.hpp"

#include <algorithm>

using namespace qreach;

namespace {

const Coeff I = Coeff::imag_unit();

OperatorPoly skew(const std::string& src, const AlgebraPtr& alg) {
  return parse_expression(src, alg) * (-I);
}

struct Oscillator {
  AlgebraPtr alg = heisenberg_algebra();
  OperatorPoly H0 = skew("p^2 + x^2", alg);
  std::vector<OperatorPoly> controls{skew("p", alg), skew("x", alg)};
};

struct Kerr {
  AlgebraPtr alg = heisenberg_algebra();
  OperatorPoly H0 = skew("p^2 + x^2", alg);
  std::vector<OperatorPoly> controls{skew("p", alg), skew("x", alg), skew("x^2 + p^2", alg), skew("x*p + p*x", alg),
                                     skew("(x^2 + p^2)^2", alg)};
  std::vector<OperatorPoly> all() const {
    std::vector<OperatorPoly> out{H0};
    out.insert(out.end(), controls.begin(), controls.end());
    return out;
  }
};

struct Scattering {
  AlgebraPtr alg = so21_algebra();
  OperatorPoly H0 = skew("L_z^2", alg);
  std::vector<OperatorPoly> controls{skew("L_x", alg), skew("L_y", alg), skew("L_x^2", alg)};
  std::vector<OperatorPoly> all() const {
    std::vector<OperatorPoly> out{H0};
    out.insert(out.end(), controls.begin(), controls.end());
    return out;
  }
};

bool contained(const LieBasisSet& small, const LieBasisSet& big) {
  RealSpan s = big.span();
  return std::all_of(small.basis.begin(), small.basis.end(), [&](const OperatorPoly& b) { return s.contains(b); });
}

// Independent oracle: bracket every pair repeatedly until the span stops growing.
std::size_t brute_force_dim(const std::vector<OperatorPoly>& gens, int cap) {
  RealSpan span(gens.front().algebra());
  std::vector<OperatorPoly> elems;
  for (const auto& g : gens)
    if (g.degree() <= cap && span.insert(g)) elems.push_back(g);
  bool grew = true;
  while (grew) {
    grew = false;
    const std::size_t n = elems.size();
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b) {
        OperatorPoly br = commutator(elems[a], elems[b]);
        if (br.is_zero() || br.degree() > cap) continue;
        if (span.insert(br)) {
          elems.push_back(br);
          grew = true;
        }
      }
  }
  return span.rank();
}

std::size_t binomial(std::size_t n, std::size_t k) {
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("closure of {ix, ip} is h(1)", "[liealg]") {
  AlgebraPtr alg = heisenberg_algebra();
  auto ix = parse_expression("i*x", alg), ip = parse_expression("i*p", alg);
  LieBasisSet c = generate_closure({ix, ip}, 2);
  CHECK(c.dim() == 3);
  CHECK(c.saturated_in_cap);
  CHECK_FALSE(c.discarded_above_cap);
  CHECK(c.span().contains(parse_expression("i", alg)));
  CHECK(brute_force_dim({ix, ip}, 2) == 3);
}

TEST_CASE("oscillator closure stabilizes at dimension 4", "[liealg]") {
  Oscillator o;
  std::vector<OperatorPoly> gens{o.H0 * Coeff(-1), o.controls[0] * Coeff(-1), o.controls[1] * Coeff(-1)};
  for (int cap = 2; cap <= 6; ++cap) {
    LieBasisSet c = generate_closure(gens, cap);
    CHECK(c.dim() == 4);
    CHECK(c.rounds <= 2);
    CHECK(c.saturated_in_cap);
    CHECK_FALSE(c.discarded_above_cap);
    CHECK(brute_force_dim(gens, cap) == 4);
  }
  LieBasisSet c = generate_closure(gens, 2);
  RealSpan s = c.span();
  for (const char* e : {"i*(p^2 + x^2)", "i*x", "i*p", "i"}) CHECK(s.contains(parse_expression(e, o.alg)));
}

TEST_CASE("continuous-variable system grows from cap 2 to cap 4", "[liealg]") {
  Kerr k;
  LieBasisSet c2 = generate_closure(k.all(), 2);
  LieBasisSet c4 = generate_closure(k.all(), 4);
  CHECK(c2.dim() == 6);
  CHECK(c4.dim() > c2.dim());
  CHECK(c4.discarded_above_cap);
  CHECK(brute_force_dim(k.all(), 2) == c2.dim());
  CHECK(brute_force_dim(k.all(), 4) == c4.dim());
}

TEST_CASE("continuous-variable growth over caps 2,3,4 stalls at cap 3", "[liealg]") {
  // Brackets in the Weyl algebra lower total degree by two, and every generator has even
  // degree or degree one, so no new degree-3 element appears at cap 3.
  Kerr k;
  GrowthProfile g = growth_profile(k.all(), {2, 3, 4});
  REQUIRE(g.rows.size() == 3);
  CHECK(g.rows[0].dim == 6);
  CHECK(g.rows[1].dim == 6);
  CHECK(g.rows[2].dim == 15);
  CHECK(g.trend() == GrowthTrend::Mixed);
  GrowthProfile wide = growth_profile(k.all(), {2, 4, 5, 6});
  CHECK(wide.strictly_increasing());
}

TEST_CASE("build_C examples", "[liealg]") {
  Oscillator o;
  LieBasisSet c = build_C(o.H0, o.controls, 2);
  CHECK(c.dim() == 3);
  RealSpan s = c.span();
  for (const char* e : {"i*x", "i*p", "i"}) CHECK(s.contains(parse_expression(e, o.alg)));

  LieBasisSet b = generate_closure(o.controls, 2);
  LieBasisSet c0 = build_C(OperatorPoly::zero(o.alg), o.controls, 2);
  CHECK(c0.dim() == b.dim());
  CHECK(contained(c0, b));
  CHECK(contained(b, c0));

  Scattering sc;
  LieBasisSet c3 = build_C(sc.H0, sc.controls, 3);
  // Skew-Hermitian PBW elements of degree 1..3 in three generators; the unit is never produced.
  CHECK(c3.dim() == binomial(3 + 3, 3) - 1);
}

TEST_CASE("scattering system: A = B = C at caps 1, 2, 3", "[liealg]") {
  Scattering sc;
  for (int cap : {1, 2, 3}) {
    LieBasisSet A = generate_closure(sc.all(), cap);
    LieBasisSet B = generate_closure(sc.controls, cap);
    LieBasisSet C = build_C(sc.H0, sc.controls, cap);
    const std::size_t full = binomial(static_cast<std::size_t>(cap) + 3, 3) - 1;
    CHECK(A.dim() == full);
    CHECK(B.dim() == full);
    CHECK(C.dim() == full);
    CHECK(std::holds_alternative<ContainmentHolds>(check_bracket_containment(B, C)));
    CHECK(brute_force_dim(sc.all(), cap) == full);
  }
}

TEST_CASE("bracket containment fails for B = {ix}, H0 = ip^3", "[liealg]") {
  AlgebraPtr alg = heisenberg_algebra();
  OperatorPoly h0 = parse_expression("i*p^3", alg);
  std::vector<OperatorPoly> controls{parse_expression("i*x", alg)};
  for (int cap : {2, 3}) {
    LieBasisSet B = generate_closure(controls, cap);
    LieBasisSet C = build_C(h0, controls, cap);
    auto res = check_bracket_containment(B, C);
    REQUIRE(std::holds_alternative<ContainmentFails>(res));
    const auto& f = std::get<ContainmentFails>(res);
    auto red = reduce_against(f.residual, {parse_expression("i*p", alg)});
    CHECK(red.in_span());
    CHECK_FALSE(f.residual.is_zero());
  }
}

TEST_CASE("containment holds when H0 lies in B", "[liealg]") {
  Kerr k;
  LieBasisSet B = generate_closure(k.controls, 2);
  LieBasisSet C = build_C(k.H0, k.controls, 2);
  CHECK(std::holds_alternative<ContainmentHolds>(check_bracket_containment(B, C)));
}

TEST_CASE("cap mismatch is rejected", "[liealg]") {
  Oscillator o;
  CHECK_THROWS_AS(check_bracket_containment(generate_closure(o.controls, 2), build_C(o.H0, o.controls, 3)), ClosureError);
}

TEST_CASE("non-skew generators are rejected with the offending element", "[liealg]") {
  AlgebraPtr alg = heisenberg_algebra();
  OperatorPoly x = parse_expression("x", alg);
  try {
    generate_closure({parse_expression("i*p", alg), x}, 2);
    FAIL("expected ClosureError");
  } catch (const ClosureError& e) {
    CHECK(e.offending() == x);
  }
}

TEST_CASE("B within C within A for bundled systems", "[liealg][property]") {
  Oscillator o;
  Kerr k;
  Scattering sc;
  struct Sys {
    OperatorPoly h0;
    std::vector<OperatorPoly> controls;
  };
  for (const auto& s : {Sys{o.H0, o.controls}, Sys{k.H0, k.controls}, Sys{sc.H0, sc.controls}})
    for (int cap : {2, 3}) {
      std::vector<OperatorPoly> all{s.h0};
      all.insert(all.end(), s.controls.begin(), s.controls.end());
      LieBasisSet A = generate_closure(all, cap), B = generate_closure(s.controls, cap), C = build_C(s.h0, s.controls, cap);
      CHECK(contained(B, C));
      CHECK(contained(C, A));
    }
}

TEST_CASE("closure dimension is monotone and order independent", "[liealg][property]") {
  Scattering sc;
  auto gens = sc.all();
  std::size_t prev = 0;
  for (int cap = 1; cap <= 4; ++cap) {
    std::size_t d = generate_closure(gens, cap).dim();
    CHECK(d >= prev);
    prev = d;
  }
  CHECK(generate_closure(gens, 3, 1).dim() <= generate_closure(gens, 3, 2).dim());
  CHECK(generate_closure(gens, 3, 2).dim() <= generate_closure(gens, 3, 16).dim());

  Kerr k;
  auto kg = k.all();
  const std::size_t base = generate_closure(kg, 4).dim();
  std::reverse(kg.begin(), kg.end());
  CHECK(generate_closure(kg, 4).dim() == base);
  std::rotate(kg.begin(), kg.begin() + 2, kg.end());
  CHECK(generate_closure(kg, 4).dim() == base);
}

TEST_CASE("growth profiles", "[liealg]") {
  Oscillator o;
  std::vector<OperatorPoly> og{o.H0};
  og.insert(og.end(), o.controls.begin(), o.controls.end());
  GrowthProfile g = growth_profile(og, {2, 3, 4});
  CHECK(g.constant());
  CHECK(g.trend() == GrowthTrend::Stabilized);
  CHECK(growth_trend_label(g.trend()) == "finite-dimensional (stabilized)");

  Scattering sc;
  GrowthProfile s = growth_profile(sc.all(), {1, 2, 3});
  CHECK(s.trend() == GrowthTrend::StrictlyIncreasing);

  AlgebraPtr alg = heisenberg_algebra();
  GrowthProfile c = growth_profile({parse_expression("i*e", alg)}, {1, 2, 5});
  CHECK(c.constant());
  CHECK(c.rows[0].dim == 1);

  CHECK_THROWS(growth_profile(og, {3, 2}));
}

TEST_CASE("tangent-space ranks", "[liealg]") {
  Oscillator o;
  std::vector<OperatorPoly> og{o.H0};
  og.insert(og.end(), o.controls.begin(), o.controls.end());
  LieBasisSet A = generate_closure(og, 2), C = build_C(o.H0, o.controls, 2);
  TruncatedRep rep = heisenberg_rep(o.alg, 16);
  for (const auto& prof : default_profiles()) {
    RankPair r = check_rank_equality(A, C, rep, smooth_state(prof, 16));
    CHECK(r.rank_c == 3);
    CHECK(r.rank_a == 4);
  }
  CHECK(check_rank_equality(A, A, rep, smooth_state(ProfileSpec{}, 16)).rank_c == 4);

  StateVector zero{Vector::Zero(16), "zero"};
  CHECK_THROWS_AS(check_rank_equality(A, C, rep, zero), RepresentationError);

  Scattering sc;
  for (int N : {24, 40}) {
    TruncatedRep srep = so21_discrete_rep(sc.alg, 1.5, N);
    for (int cap : {1, 2, 3}) {
      LieBasisSet SA = generate_closure(sc.all(), cap), SC = build_C(sc.H0, sc.controls, cap);
      for (const auto& prof : default_profiles()) {
        RankPair r = check_rank_equality(SA, SC, srep, smooth_state(prof, N), 1e-10);
        CHECK(r.rank_c == r.rank_a);
        CHECK(r.rank_a <= N * 2);
      }
    }
  }
}

TEST_CASE("rankC <= rankA <= 2N for bundled systems", "[liealg][property]") {
  Kerr k;
  LieBasisSet A = generate_closure(k.all(), 4), C = build_C(k.H0, k.controls, 4);
  for (int N : {8, 16}) {
    TruncatedRep rep = heisenberg_rep(k.alg, N);
    for (const auto& prof : default_profiles()) {
      RankPair r = check_rank_equality(A, C, rep, smooth_state(prof, N));
      CHECK(r.rank_c <= r.rank_a);
      CHECK(r.rank_a <= 2 * N);
    }
  }
}

TEST_CASE("theorem verdicts for bundled systems", "[liealg]") {
  const std::string dir = QREACH_SYSTEMS_DIR;
  SystemDefinition so21 = load_system(dir + "/so21_scattering.json");
  TheoremReport r7 = theorem_verdict(so21);
  CHECK(r7.verdict == Verdict::CriterionSatisfiedAtCap);
  CHECK(verdict_exit_code(r7.verdict) == 0);

  SystemDefinition osc = load_system(dir + "/oscillator.json");
  TheoremReport r4 = theorem_verdict(osc);
  CHECK(r4.verdict == Verdict::FiniteDimensional);
  CHECK(verdict_exit_code(r4.verdict) == 3);
  for (const auto& row : r4.ranks)
    if (row.N == 16) {
      CHECK(row.ranks.rank_c == 3);
      CHECK(row.ranks.rank_a == 4);
    }

  SystemDefinition kerr = load_system(dir + "/kerr_oscillator.json");
  TheoremReport r3 = theorem_verdict(kerr);
  CHECK(r3.verdict != Verdict::Condition1Fails);
  CHECK(r3.verdict != Verdict::Condition2Fails);
  CHECK(r3.growth.rows.size() == 3);

  CHECK(report_to_json(r7, so21).dump() == report_to_json(theorem_verdict(so21), so21).dump());
}
