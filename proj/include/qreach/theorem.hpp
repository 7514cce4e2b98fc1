#pragma once

#include "qreach/lie_closure.hpp"
#include "qreach/system.hpp"

#include <Eigen/SVD>

#include <string>
#include <vector>

namespace qreach {

inline constexpr const char* kToolName = "qreach";
inline constexpr const char* kToolVersion = "0.1.0";

struct RankPair {
  int rank_c = 0;
  int rank_a = 0;
};

/// Numerical rank of the real span of {X phi : X in basis}; sigma_k counts iff sigma_k > tol * sigma_1.
inline int tangent_rank(const LieBasisSet& set, const TruncatedRep& rep, const StateVector& phi, double tol) {
  if (set.basis.empty()) return 0;
  const int N = rep.N;
  Eigen::MatrixXd m(2 * N, static_cast<Eigen::Index>(set.basis.size()));
  for (std::size_t k = 0; k < set.basis.size(); ++k) {
    Vector v = realize(set.basis[k], rep) * phi.amplitudes;
    m.col(static_cast<Eigen::Index>(k)) << v.real(), v.imag();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index k = 0; k < sv.size(); ++k)
    if (sv(k) > tol * sv(0)) ++rank;
  return rank;
}

inline RankPair check_rank_equality(const LieBasisSet& A, const LieBasisSet& C, const TruncatedRep& rep, const StateVector& phi,
                                    double tol = 1e-10) {
  if (phi.size() != rep.N) throw RepresentationError("state dimension does not match the representation");
  const double norm = phi.amplitudes.norm();
  if (norm < 1e-12) throw RepresentationError("degenerate test state");
  StateVector unit{phi.amplitudes / norm, phi.profile};
  return {tangent_rank(C, rep, unit, tol), tangent_rank(A, rep, unit, tol)};
}

enum class Verdict { CriterionSatisfiedAtCap, Condition1Fails, Condition2Fails, FiniteDimensional, Indeterminate };

inline std::string verdict_label(Verdict v) {
  switch (v) {
    case Verdict::CriterionSatisfiedAtCap:
      return "criterion-satisfied-at-cap";
    case Verdict::Condition1Fails:
      return "condition1-fails";
    case Verdict::Condition2Fails:
      return "condition2-fails";
    case Verdict::FiniteDimensional:
      return "finite-dimensional";
    case Verdict::Indeterminate:
      return "indeterminate";
  }
  return "indeterminate";
}

/// Process exit code for `qreach check`.
inline int verdict_exit_code(Verdict v) {
  switch (v) {
    case Verdict::CriterionSatisfiedAtCap:
      return 0;
    case Verdict::Condition1Fails:
    case Verdict::Condition2Fails:
      return 2;
    case Verdict::FiniteDimensional:
      return 3;
    case Verdict::Indeterminate:
      return 4;
  }
  return 4;
}

struct CapReport {
  int cap = 0;
  LieBasisSet A, B, C;
  ContainmentResult condition1;
};

struct RankRow {
  int cap = 0;
  int N = 0;
  std::string profile;
  RankPair ranks;
  double top_population = 0.0;
};

struct TheoremReport {
  std::vector<CapReport> caps;
  std::vector<RankRow> ranks;
  bool ranks_available = false;
  bool profile_sensitive = false;
  GrowthProfile growth;
  Verdict verdict = Verdict::Indeterminate;
  std::vector<std::string> witnesses;
  std::vector<std::string> notes;
};

inline TheoremReport theorem_verdict(const SystemDefinition& sys) {
  TheoremReport rep;
  const auto gens_a = sys.all_hamiltonians();
  std::vector<OperatorPoly> nonzero_a;
  for (const auto& g : gens_a)
    if (!g.is_zero()) nonzero_a.push_back(g);

  for (int cap : sys.caps) {
    CapReport cr;
    cr.cap = cap;
    cr.A = generate_closure(nonzero_a, cap, sys.max_rounds);
    cr.B = generate_closure(sys.controls, cap, sys.max_rounds);
    cr.C = build_C(sys.H0, sys.controls, cap, sys.max_ad_depth, sys.max_rounds);
    cr.condition1 = check_bracket_containment(cr.B, cr.C);
    if (const auto* f = std::get_if<ContainmentFails>(&cr.condition1)) rep.witnesses.push_back(f->residual.to_string());
    rep.growth.rows.push_back({cap, cr.A.dim(), cr.A.saturated_in_cap, cr.A.discarded_above_cap});
    rep.caps.push_back(std::move(cr));
  }

  if (sys.has_representation()) {
    rep.ranks_available = true;
    for (const auto& cr : rep.caps)
      for (int N : sys.truncations) {
        TruncatedRep tr = sys.representation(N);
        std::vector<int> seen_c, seen_a;
        for (const auto& prof : sys.profiles) {
          StateVector phi = smooth_state(prof, N);
          RankRow row{cr.cap, N, prof.label(), check_rank_equality(cr.A, cr.C, tr, phi, sys.tolerance), top_population(phi)};
          seen_c.push_back(row.ranks.rank_c);
          seen_a.push_back(row.ranks.rank_a);
          rep.ranks.push_back(row);
        }
        for (std::size_t k = 1; k < seen_c.size(); ++k)
          if (seen_c[k] != seen_c[0] || seen_a[k] != seen_a[0]) rep.profile_sensitive = true;
      }
  } else {
    rep.notes.push_back("no truncated representation for this algebra; condition 2 not evaluated");
  }

  bool finite = false;
  for (const auto& cr : rep.caps)
    if (cr.A.saturated_in_cap && !cr.A.discarded_above_cap) finite = true;
  if (rep.growth.rows.size() >= 2 && rep.growth.trend() == GrowthTrend::Stabilized) finite = true;

  bool c1_fails = false, c1_indeterminate = false;
  for (const auto& cr : rep.caps) {
    if (std::holds_alternative<ContainmentFails>(cr.condition1)) c1_fails = true;
    if (std::holds_alternative<ContainmentIndeterminate>(cr.condition1)) c1_indeterminate = true;
  }
  bool c2_fails = false;
  for (const auto& r : rep.ranks)
    if (r.ranks.rank_c != r.ranks.rank_a) c2_fails = true;

  if (finite)
    rep.verdict = Verdict::FiniteDimensional;
  else if (c1_fails)
    rep.verdict = Verdict::Condition1Fails;
  else if (c2_fails)
    rep.verdict = Verdict::Condition2Fails;
  else if (!c1_indeterminate && rep.ranks_available && rep.growth.trend() == GrowthTrend::StrictlyIncreasing)
    rep.verdict = Verdict::CriterionSatisfiedAtCap;
  else
    rep.verdict = Verdict::Indeterminate;

  if (rep.profile_sensitive) rep.notes.push_back("tangent-space ranks differ across test profiles");
  for (const auto& r : rep.ranks)
    if (r.top_population > kLeakageThreshold) {
      rep.notes.push_back("truncation leakage: test state has population above threshold in the top levels");
      break;
    }
  rep.notes.push_back("ranks are sampled at finitely many smooth states; sampling can refute condition 2 but not confirm it");
  rep.notes.push_back("growth across caps is a heuristic for infinite dimension, not a proof");
  return rep;
}

inline json containment_to_json(const ContainmentResult& r) {
  json j{{"result", containment_label(r)}};
  if (const auto* f = std::get_if<ContainmentFails>(&r)) {
    j["witness"] = f->residual.to_string();
    j["bracket"] = f->witness.to_string();
    j["b_index"] = f->b_index;
    j["c_index"] = f->c_index;
  }
  if (const auto* ind = std::get_if<ContainmentIndeterminate>(&r)) j["above_cap_count"] = ind->above_cap;
  return j;
}

inline json basis_to_json(const LieBasisSet& s) {
  return {{"dim", s.dim()},
          {"degree_cap", s.degree_cap},
          {"saturated_in_cap", s.saturated_in_cap},
          {"discarded_above_cap", s.discarded_above_cap},
          {"rounds", s.rounds},
          {"basis", s.basis_strings()}};
}

inline json growth_to_json(const GrowthProfile& g) {
  json rows = json::array();
  for (const auto& r : g.rows) rows.push_back({{"cap", r.cap}, {"dim", r.dim}, {"saturated", r.saturated}, {"discarded", r.discarded}});
  return {{"rows", rows}, {"trend", growth_trend_label(g.trend())}};
}

inline json report_to_json(const TheoremReport& r, const SystemDefinition& sys) {
  json caps = json::array();
  for (const auto& cr : r.caps)
    caps.push_back({{"cap", cr.cap},
                    {"dim_A", cr.A.dim()},
                    {"dim_B", cr.B.dim()},
                    {"dim_C", cr.C.dim()},
                    {"A_saturated", cr.A.saturated_in_cap},
                    {"A_discarded_above_cap", cr.A.discarded_above_cap},
                    {"condition1", containment_to_json(cr.condition1)}});
  json ranks = json::array();
  for (const auto& row : r.ranks)
    ranks.push_back({{"cap", row.cap}, {"N", row.N}, {"profile", row.profile}, {"rank_C", row.ranks.rank_c}, {"rank_A", row.ranks.rank_a}});
  return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"config", system_to_json(sys)},
          {"caps", caps},
          {"condition2_ranks", ranks},
          {"profile_sensitive", r.profile_sensitive},
          {"growth", growth_to_json(r.growth)},
          {"verdict", verdict_label(r.verdict)},
          {"witnesses", r.witnesses},
          {"notes", r.notes}};
}

}  // namespace qreach
