#pragma once

#include "qreach/representation.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace qreach {

class DynamicsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Dense scaling-and-squaring Pade exponential.
inline Matrix expm(const Matrix& m) {
  return m.exp();
}

/// |<psi, phi>|, invariant under global phases.
inline double fidelity(const StateVector& psi, const StateVector& phi) {
  if (psi.size() != phi.size()) throw DynamicsError("fidelity of states with different dimensions");
  return std::min(1.0, std::abs(psi.amplitudes.dot(phi.amplitudes)));
}

inline double infidelity(const StateVector& psi, const StateVector& phi) {
  return 1.0 - fidelity(psi, phi);
}

/// Phase-invariant state distance sqrt(1 - F^2); linear in small state perturbations, so
/// first-order product formulas show slope 1 in it.
inline double fidelity_error(const StateVector& psi, const StateVector& phi) {
  const double f = fidelity(psi, phi);
  return std::sqrt(std::max(0.0, 1.0 - f * f));
}

/// Realized generator, skew-projected so every flow is exactly unitary.
inline Matrix generator_matrix(const OperatorPoly& h, const TruncatedRep& rep) {
  return skew_project(realize(h, rep));
}

inline void require_skew(const OperatorPoly& h, const char* what) {
  if (!h.is_zero() && !is_skew_hermitian(h)) throw DynamicsError(std::string(what) + " is not skew-Hermitian: " + h.to_string());
}

// ---------------------------------------------------------------------------
// Piecewise-constant control

struct ControlSegment {
  double duration = 0.0;
  std::vector<double> controls;
};

struct ControlSchedule {
  std::vector<ControlSegment> segments;

  double total_time() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }

  void validate(std::size_t n_controls) const {
    for (const auto& s : segments) {
      if (!(s.duration > 0.0) || !std::isfinite(s.duration)) throw DynamicsError("segment durations must be positive");
      if (s.controls.size() != n_controls) throw DynamicsError("segment control count does not match the system");
      for (double u : s.controls)
        if (!std::isfinite(u)) throw DynamicsError("non-finite control value");
    }
  }

  void append(const ControlSchedule& other) {
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
  }
};

struct Diagnostics {
  double max_top_population = 0.0;
  bool leakage = false;
  std::vector<std::string> warnings;

  void observe(const StateVector& s) {
    const double pop = top_population(s);
    max_top_population = std::max(max_top_population, pop);
    if (pop > kLeakageThreshold && !leakage) {
      leakage = true;
      warnings.push_back("truncation leakage: top-level population " + std::to_string(pop) + " exceeds 1e-6");
    }
  }
};

/// Realized system dK/dt-generators with a cache of segment exponentials keyed by
/// (duration, controls).
class Propagator {
 public:
  Propagator(const TruncatedRep& rep, const OperatorPoly& h0, const std::vector<OperatorPoly>& controls) : rep_(&rep) {
    require_skew(h0, "H0");
    drift_ = h0.is_zero() ? Matrix::Zero(rep.N, rep.N) : generator_matrix(h0, rep);
    for (const auto& h : controls) {
      require_skew(h, "control Hamiltonian");
      control_matrices_.push_back(generator_matrix(h, rep));
    }
  }

  std::size_t n_controls() const { return control_matrices_.size(); }
  const Matrix& drift() const { return drift_; }
  const Matrix& control(std::size_t j) const { return control_matrices_.at(j); }

  Matrix segment_generator(const ControlSegment& seg) const {
    Matrix k = drift_;
    for (std::size_t j = 0; j < control_matrices_.size(); ++j)
      if (seg.controls[j] != 0.0) k += seg.controls[j] * control_matrices_[j];
    return k;
  }

  const Matrix& segment_propagator(const ControlSegment& seg) {
    std::vector<double> key;
    key.reserve(seg.controls.size() + 1);
    key.push_back(seg.duration);
    key.insert(key.end(), seg.controls.begin(), seg.controls.end());
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(std::move(key), expm(seg.duration * segment_generator(seg))).first->second;
  }

  StateVector run(const ControlSchedule& schedule, const StateVector& psi0, Diagnostics* diag = nullptr) {
    if (psi0.size() != rep_->N) throw DynamicsError("state dimension does not match the representation");
    schedule.validate(control_matrices_.size());
    StateVector psi = psi0;
    if (diag) diag->observe(psi);
    for (const auto& seg : schedule.segments) {
      psi.amplitudes = segment_propagator(seg) * psi.amplitudes;
      if (diag) diag->observe(psi);
    }
    return psi;
  }

 private:
  const TruncatedRep* rep_;
  Matrix drift_;
  std::vector<Matrix> control_matrices_;
  std::map<std::vector<double>, Matrix> cache_;
};

/// Solves d/dt psi = (H0 + sum_j u_j(t) H_j) psi for piecewise-constant controls.
inline StateVector propagate(const TruncatedRep& rep, const OperatorPoly& h0, const std::vector<OperatorPoly>& controls,
                             const ControlSchedule& schedule, const StateVector& psi0, Diagnostics* diag = nullptr) {
  Propagator prop(rep, h0, controls);
  return prop.run(schedule, psi0, diag);
}

/// exp(s * G) psi with G realized and skew-projected.
inline StateVector exact_flow(const OperatorPoly& g, double s, const TruncatedRep& rep, const StateVector& psi) {
  return {expm(s * generator_matrix(g, rep)) * psi.amplitudes, psi.profile};
}

// ---------------------------------------------------------------------------
// Product formulas

struct PlanStep {
  OperatorPoly generator;
  double time = 0.0;
};

/// A product of exponentials approximating exp(scale * target). Steps are stored in
/// application order: steps.front() acts on the state first.
struct PropagatorPlan {
  std::vector<PlanStep> steps;
  OperatorPoly target;
  double scale = 0.0;
  int refinement = 0;
};

/// [exp(sX/n) exp(sY/n)]^n.
inline PropagatorPlan trotter_sum(const OperatorPoly& x, const OperatorPoly& y, double s, int n) {
  if (n < 1) throw DynamicsError("trotter_sum needs n >= 1");
  require_skew(x, "X");
  require_skew(y, "Y");
  PropagatorPlan plan{{}, x + y, s, n};
  const double dt = s / n;
  for (int k = 0; k < n; ++k) {
    plan.steps.push_back({y, dt});
    plan.steps.push_back({x, dt});
  }
  return plan;
}

/// [exp(hX) exp(hY) exp(-hX) exp(-hY)]^n with h = sqrt(s/n), approximating exp(s[X, Y]).
inline PropagatorPlan trotter_bracket(const OperatorPoly& x, const OperatorPoly& y, double s, int n) {
  if (n < 1) throw DynamicsError("trotter_bracket needs n >= 1");
  if (!(s > 0.0)) throw DynamicsError("trotter_bracket needs s > 0; swap X and Y for negative times");
  require_skew(x, "X");
  require_skew(y, "Y");
  PropagatorPlan plan{{}, commutator(x, y), s, n};
  const double h = std::sqrt(s / n);
  for (int k = 0; k < n; ++k) {
    plan.steps.push_back({y, -h});
    plan.steps.push_back({x, -h});
    plan.steps.push_back({y, h});
    plan.steps.push_back({x, h});
  }
  return plan;
}

inline StateVector execute_plan(const PropagatorPlan& plan, const TruncatedRep& rep, const StateVector& psi) {
  std::map<std::pair<std::string, double>, Matrix> cache;
  std::map<std::string, Matrix> generators;
  StateVector out = psi;
  for (const auto& step : plan.steps) {
    require_skew(step.generator, "plan step");
    const std::string key = step.generator.to_string();
    auto it = cache.find({key, step.time});
    if (it == cache.end()) {
      auto g = generators.find(key);
      if (g == generators.end()) g = generators.emplace(key, generator_matrix(step.generator, rep)).first;
      it = cache.emplace(std::make_pair(key, step.time), expm(step.time * g->second)).first;
    }
    out.amplitudes = it->second * out.amplitudes;
  }
  return out;
}

/// Phase-invariant distance between the executed plan and exp(scale * target) psi.
inline double plan_error(const PropagatorPlan& plan, const TruncatedRep& rep, const StateVector& psi) {
  return fidelity_error(execute_plan(plan, rep, psi), exact_flow(plan.target, plan.scale, rep, psi));
}

// ---------------------------------------------------------------------------
// Conjugation and attainability limits

/// exp(tH) exp(sH0) exp(-tH) psi.
inline StateVector conjugate_flow(const OperatorPoly& h, double t, const OperatorPoly& h0, double s, const TruncatedRep& rep,
                                  const StateVector& psi) {
  require_skew(h, "H");
  require_skew(h0, "H0");
  const Matrix kh = generator_matrix(h, rep);
  const Matrix k0 = generator_matrix(h0, rep);
  Vector v = expm(-t * kh) * psi.amplitudes;
  v = expm(s * k0) * v;
  v = expm(t * kh) * v;
  return {v, psi.profile};
}

/// ad_H^k H0 for k = 0..order, computed exactly.
inline std::vector<OperatorPoly> nested_commutators(const OperatorPoly& h, const OperatorPoly& h0, int order) {
  std::vector<OperatorPoly> out{h0};
  for (int k = 1; k <= order; ++k) out.push_back(commutator(h, out.back()));
  return out;
}

/// exp(s * sum_k t^k/k! ad_H^k H0) psi: the conjugated flow predicted by the
/// Campbell-Baker-Hausdorff expansion, truncated at `order`.
inline StateVector conjugation_series_flow(const OperatorPoly& h, double t, const OperatorPoly& h0, double s, int order,
                                           const TruncatedRep& rep, const StateVector& psi) {
  auto terms = nested_commutators(h, h0, order);
  Matrix g = Matrix::Zero(rep.N, rep.N);
  double weight = 1.0;
  for (std::size_t k = 0; k < terms.size(); ++k) {
    if (k > 0) weight *= t / static_cast<double>(k);
    if (!terms[k].is_zero()) g += weight * generator_matrix(terms[k], rep);
  }
  return {expm(s * g) * psi.amplitudes, psi.profile};
}

/// Distance between exp((s/|t|)(H0 + t[H, H0])) psi and exp(sign(t) s [H, H0]) psi.
inline double attainability_limit_error(const OperatorPoly& h, const OperatorPoly& h0, double s, double t,
                                        const TruncatedRep& rep, const StateVector& psi) {
  if (t == 0.0) throw DynamicsError("attainability limit needs t != 0");
  if (!(s > 0.0)) throw DynamicsError("attainability limit needs s > 0");
  require_skew(h, "H");
  require_skew(h0, "H0");
  const OperatorPoly br = commutator(h, h0);
  const Matrix k0 = generator_matrix(h0, rep);
  const Matrix kb = br.is_zero() ? Matrix::Zero(rep.N, rep.N) : generator_matrix(br, rep);
  const double sign = t > 0 ? 1.0 : -1.0;
  StateVector approx{expm((s / std::abs(t)) * (k0 + t * kb)) * psi.amplitudes, psi.profile};
  StateVector limit{expm(sign * s * kb) * psi.amplitudes, psi.profile};
  return fidelity_error(approx, limit);
}

/// Distance between exp((s/u)(H0 + u H1)) psi and exp(s H1) psi.
inline double dominant_control_error(const OperatorPoly& h0, const OperatorPoly& h1, double s, double u,
                                     const TruncatedRep& rep, const StateVector& psi) {
  if (!(u > 0.0)) throw DynamicsError("dominant control needs u > 0");
  if (!(s > 0.0)) throw DynamicsError("dominant control needs s > 0");
  require_skew(h0, "H0");
  require_skew(h1, "H1");
  const Matrix k0 = h0.is_zero() ? Matrix::Zero(rep.N, rep.N) : generator_matrix(h0, rep);
  const Matrix k1 = generator_matrix(h1, rep);
  StateVector approx{expm((s / u) * (k0 + u * k1)) * psi.amplitudes, psi.profile};
  StateVector limit{expm(s * k1) * psi.amplitudes, psi.profile};
  return fidelity_error(approx, limit);
}

// ---------------------------------------------------------------------------
// Convergence studies

/// Negated least-squares slope of log(error) against log(parameter).
inline double estimate_order(const std::vector<double>& params, const std::vector<double>& errors) {
  if (params.size() != errors.size() || params.size() < 2) throw DynamicsError("order estimate needs matching series of length >= 2");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double x = std::log(std::abs(params[k]));
    const double y = std::log(std::max(errors[k], 1e-300));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

struct ConvergenceSeries {
  std::string parameter;
  std::vector<double> params;
  std::vector<double> errors;
  double order = 0.0;

  bool strictly_decreasing() const {
    for (std::size_t k = 1; k < errors.size(); ++k)
      if (!(errors[k] < errors[k - 1])) return false;
    return !errors.empty();
  }

  void write_csv(std::ostream& os) const {
    os << "param,error\n";
    os.precision(17);
    for (std::size_t k = 0; k < params.size(); ++k) os << params[k] << ',' << errors[k] << '\n';
  }
};

inline ConvergenceSeries make_series(std::string parameter, std::vector<double> params, std::vector<double> errors) {
  ConvergenceSeries s{std::move(parameter), std::move(params), std::move(errors), 0.0};
  if (s.params.size() >= 2) s.order = estimate_order(s.params, s.errors);
  return s;
}

inline ConvergenceSeries trotter_sum_series(const OperatorPoly& x, const OperatorPoly& y, double s, const std::vector<int>& ladder,
                                            const TruncatedRep& rep, const StateVector& psi) {
  std::vector<double> params, errors;
  for (int n : ladder) {
    params.push_back(n);
    errors.push_back(plan_error(trotter_sum(x, y, s, n), rep, psi));
  }
  return make_series("n", params, errors);
}

inline ConvergenceSeries trotter_bracket_series(const OperatorPoly& x, const OperatorPoly& y, double s,
                                                const std::vector<int>& ladder, const TruncatedRep& rep, const StateVector& psi) {
  std::vector<double> params, errors;
  for (int n : ladder) {
    params.push_back(n);
    errors.push_back(plan_error(trotter_bracket(x, y, s, n), rep, psi));
  }
  return make_series("n", params, errors);
}

inline ConvergenceSeries attainability_series(const OperatorPoly& h, const OperatorPoly& h0, double s,
                                              const std::vector<double>& ladder, const TruncatedRep& rep,
                                              const StateVector& psi) {
  std::vector<double> errors;
  for (double t : ladder) errors.push_back(attainability_limit_error(h, h0, s, t, rep, psi));
  return make_series("t", ladder, errors);
}

inline ConvergenceSeries dominant_control_series(const OperatorPoly& h0, const OperatorPoly& h1, double s,
                                                 const std::vector<double>& ladder, const TruncatedRep& rep,
                                                 const StateVector& psi) {
  std::vector<double> errors;
  for (double u : ladder) errors.push_back(dominant_control_error(h0, h1, s, u, rep, psi));
  return make_series("u", ladder, errors);
}

inline const std::vector<int>& default_n_ladder() {
  static const std::vector<int> ladder{4, 8, 16, 32, 64};
  return ladder;
}
inline const std::vector<double>& default_u_ladder() {
  static const std::vector<double> ladder{4, 8, 16, 32};
  return ladder;
}
inline const std::vector<double>& default_t_ladder() {
  static const std::vector<double> ladder{4, 8, 16, 32};
  return ladder;
}

}  // namespace qreach
