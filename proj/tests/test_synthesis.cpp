#include "catch_amalgamated.hpp"

#include "qreach/expression.hpp"
#include "qreach/synthesis.hpp"

using namespace qreach;

namespace {

const Coeff I = Coeff::imag_unit();

struct Scattering {
  AlgebraPtr alg = so21_algebra();
  OperatorPoly H0 = parse_expression("-i*L_z^2", alg);
  std::vector<OperatorPoly> controls{parse_expression("-i*L_x", alg), parse_expression("-i*L_y", alg),
                                     parse_expression("-i*L_x^2", alg)};
};

struct Osc {
  AlgebraPtr alg = heisenberg_algebra();
  OperatorPoly H0 = parse_expression("-i*(x^2 + p^2)", alg);
  std::vector<OperatorPoly> controls{parse_expression("-i*p", alg), parse_expression("-i*x", alg)};
};

StateVector gaussian(int N) {
  return smooth_state(ProfileSpec{}, N);
}

double synth_infidelity(const BracketWord& w, double s, const OperatorPoly& h0, const std::vector<OperatorPoly>& controls,
                        const TruncatedRep& rep, const StateVector& psi, SynthesisOptions opt, Diagnostics* diag = nullptr) {
  Synthesis syn = synthesize(w, s, h0, controls, opt);
  StateVector out = propagate(rep, h0, controls, syn.schedule, psi, diag);
  return infidelity(out, exact_flow(syn.generator, s, rep, psi));
}

}  // namespace

TEST_CASE("word parsing", "[synthesis]") {
  BracketWord w = parse_word("[H1, [H1, H2]]");
  CHECK(w.to_string() == "[H1,[H1,H2]]");
  CHECK(w.depth() == 2);
  CHECK(parse_word("ad(H1)").to_string() == "ad(H1)");
  CHECK(parse_word("(H1 + [H2,H3])").depth() == 2);
  CHECK(parse_word("H12").control == 11);
  try {
    parse_word("[H1,H2");
    FAIL("expected SynthesisError");
  } catch (const SynthesisError& e) {
    CHECK(std::string(e.what()).find("position 6") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_word("H0"), SynthesisError);
  CHECK_THROWS_AS(parse_word("X1"), SynthesisError);
  CHECK_THROWS_AS(parse_word("H1 H2"), SynthesisError);
}

TEST_CASE("word generators", "[synthesis]") {
  Scattering sc;
  CHECK(word_generator(parse_word("[H1,H2]"), sc.H0, sc.controls) == commutator(sc.controls[0], sc.controls[1]));
  CHECK(word_generator(parse_word("ad(H1)"), sc.H0, sc.controls) == commutator(sc.H0, sc.controls[0]));
  CHECK(word_generator(parse_word("(H1+H2)"), sc.H0, sc.controls) == sc.controls[0] + sc.controls[1]);
  // [H1,[H1,H2]] = H2 in so(2,1) with these signs.
  CHECK(word_generator(parse_word("[H1,[H1,H2]]"), sc.H0, sc.controls) == sc.controls[1]);
  CHECK_THROWS_AS(word_generator(parse_word("H4"), sc.H0, sc.controls), SynthesisError);
}

TEST_CASE("synthesis preconditions", "[synthesis]") {
  Scattering sc;
  CHECK_THROWS_AS(synthesize(parse_word("[H1,[H1,[H1,[H1,H2]]]]"), 0.1, sc.H0, sc.controls), SynthesisError);
  CHECK_NOTHROW(synthesize(parse_word("[H1,[H1,[H1,H2]]]"), 0.1, sc.H0, sc.controls, {1, 10.0, 1.0}));
  CHECK_THROWS_AS(synthesize(parse_word("H1"), 0.1, sc.H0, sc.controls, {0, 10.0, 1.0}), SynthesisError);
}

TEST_CASE("single control word is one dominated segment", "[synthesis]") {
  Osc o;
  TruncatedRep rep = heisenberg_rep(o.alg, 32);
  StateVector psi = gaussian(32);
  Synthesis syn = synthesize(parse_word("H1"), 0.5, o.H0, o.controls, {4, 16.0, 1.0});
  REQUIRE(syn.schedule.segments.size() == 1);
  CHECK(syn.schedule.segments[0].duration == Catch::Approx(0.5 / 16.0));
  CHECK(syn.schedule.segments[0].controls == std::vector<double>{16.0, 0.0});
  StateVector out = propagate(rep, o.H0, o.controls, syn.schedule, psi);
  CHECK(fidelity_error(out, exact_flow(o.controls[0], 0.5, rep, psi)) ==
        Catch::Approx(dominant_control_error(o.H0, o.controls[0], 0.5, 16.0, rep, psi)).epsilon(1e-9));

  Synthesis neg = synthesize(parse_word("H2"), -0.5, o.H0, o.controls, {4, 16.0, 1.0});
  CHECK(neg.schedule.segments[0].controls == std::vector<double>{0.0, -16.0});
}

TEST_CASE("schedules only move forward in time", "[synthesis][property]") {
  Scattering sc;
  for (const char* w : {"[H1,[H1,H2]]", "ad(H1)", "([H1,H2]+H3)", "[H2,ad(H1)]"})
    for (double s : {0.2, -0.2}) {
      Synthesis syn = synthesize(parse_word(w), s, sc.H0, sc.controls, {4, 100.0, 2.0});
      CHECK_NOTHROW(syn.schedule.validate(sc.controls.size()));
      for (const auto& seg : syn.schedule.segments) CHECK(seg.duration > 0.0);
    }
}

TEST_CASE("depth-2 bracket word on the scattering system", "[synthesis]") {
  Scattering sc;
  TruncatedRep rep = so21_discrete_rep(sc.alg, 1.5, 40);
  StateVector psi = gaussian(40);
  BracketWord w = parse_word("[H1,[H1,H2]]");
  Diagnostics d1, d2;
  const double coarse = synth_infidelity(w, 0.2, sc.H0, sc.controls, rep, psi, {16, 2e6, 8.0}, &d1);
  const double fine = synth_infidelity(w, 0.2, sc.H0, sc.controls, rep, psi, {32, 4e6, 8.0}, &d2);
  CHECK(coarse <= 1e-2);
  CHECK(fine < coarse);
  CHECK_FALSE(d2.leakage);

  // Appending free evolution and retargeting exp(tau H0) * target leaves the fidelity unchanged.
  Synthesis syn = synthesize(w, 0.2, sc.H0, sc.controls, {16, 2e6, 8.0});
  StateVector target = exact_flow(syn.generator, 0.2, rep, psi);
  const double base = infidelity(propagate(rep, sc.H0, sc.controls, syn.schedule, psi), target);
  ControlSchedule shifted = syn.schedule;
  shifted.segments.push_back({0.35, std::vector<double>(3, 0.0)});
  const double moved = infidelity(propagate(rep, sc.H0, sc.controls, shifted, psi), exact_flow(sc.H0, 0.35, rep, target));
  CHECK(std::abs(moved - base) <= 1e-6);
}

TEST_CASE("ad(H1) by conjugation follows the attainability limit", "[synthesis]") {
  Osc o;
  // The conjugating flows displace the state by about T, so the truncation must be wide.
  TruncatedRep rep = heisenberg_rep(o.alg, 96);
  StateVector psi = gaussian(96);
  BracketWord w = parse_word("ad(H1)");
  std::vector<double> errs;
  for (double T : {1.0, 2.0, 4.0, 8.0}) {
    Synthesis syn = synthesize(w, 0.3, o.H0, o.controls, {8, 1e5, T});
    Diagnostics d;
    StateVector out = propagate(rep, o.H0, o.controls, syn.schedule, psi, &d);
    const double err = fidelity_error(out, exact_flow(syn.generator, 0.3, rep, psi));
    const double att = attainability_limit_error(o.controls[0], o.H0, 0.3, -T, rep, psi);
    CHECK(std::abs(err - att) <= 0.02 * att);
    CHECK_FALSE(d.leakage);
    errs.push_back(err);
  }
  for (std::size_t k = 1; k < errs.size(); ++k) CHECK(errs[k] < errs[k - 1]);
}

TEST_CASE("sum word uses the product formula", "[synthesis]") {
  Osc o;
  TruncatedRep rep = heisenberg_rep(o.alg, 32);
  StateVector psi = gaussian(32);
  BracketWord w = parse_word("(H1+H2)");
  const double a = synth_infidelity(w, 0.4, o.H0, o.controls, rep, psi, {4, 1e3, 1.0});
  const double b = synth_infidelity(w, 0.4, o.H0, o.controls, rep, psi, {8, 2e3, 1.0});
  CHECK(b < a);
  CHECK(b < 1e-3);
}
