// qreach: controllability checks and product-formula experiments for bilinear quantum systems.

#include "qreach/synthesis.hpp"
#include "qreach/theorem.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace qreach;

namespace {

struct CommonOptions {
  std::string system_path;
  std::vector<int> caps;
  std::string caps_list;
  std::vector<int> truncations;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double tol = 0.0;
  std::string profile;
};

/// Files are staged in memory and written together, so a failure leaves nothing behind.
class Outputs {
 public:
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  void commit(const std::string& dir) {
    if (dir.empty()) return;
    std::vector<fs::path> written;
    try {
      fs::create_directories(dir);
      for (const auto& [name, content] : files_) {
        fs::path path = fs::path(dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
        written.push_back(path);
        out << content;
        if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
      }
    } catch (...) {
      std::error_code ec;
      for (const auto& p : written) fs::remove(p, ec);
      throw;
    }
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    int v = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad integer list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = std::stod(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad number list '" + s + "'");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty number list");
  return out;
}

SystemDefinition load_with_overrides(const CommonOptions& o) {
  SystemDefinition sys = load_system(o.system_path);
  std::vector<int> caps = o.caps;
  if (!o.caps_list.empty()) {
    auto extra = parse_int_list(o.caps_list);
    caps.insert(caps.end(), extra.begin(), extra.end());
  }
  if (!caps.empty()) {
    for (std::size_t k = 1; k < caps.size(); ++k)
      if (caps[k] <= caps[k - 1]) throw std::invalid_argument("caps must be strictly increasing");
    for (int c : caps)
      if (c < 1) throw std::invalid_argument("caps must be positive");
    sys.caps = caps;
  }
  if (!o.truncations.empty()) {
    for (int n : o.truncations)
      if (n < 4) throw std::invalid_argument("truncation N must be >= 4");
    sys.truncations = o.truncations;
  }
  if (o.tol > 0.0) sys.tolerance = o.tol;
  if (o.seed_set) sys.seed = o.seed;
  if (!o.profile.empty()) {
    ProfileType t = parse_profile_type(o.profile);
    std::vector<ProfileSpec> kept;
    for (const auto& p : sys.profiles)
      if (p.type == t) kept.push_back(p);
    if (kept.empty()) {
      ProfileSpec p;
      p.type = t;
      kept.push_back(p);
    }
    sys.profiles = kept;
  }
  return sys;
}

json header(const SystemDefinition& sys, const std::string& command, json flags) {
  return {{"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"command", command},
          {"flags", std::move(flags)},
          {"config", system_to_json(sys)}};
}

json state_to_json(const StateVector& s) {
  json re = json::array(), im = json::array();
  for (Eigen::Index k = 0; k < s.amplitudes.size(); ++k) {
    re.push_back(s.amplitudes(k).real());
    im.push_back(s.amplitudes(k).imag());
  }
  return {{"profile", s.profile}, {"re", re}, {"im", im}};
}

std::string state_csv(const StateVector& s) {
  std::ostringstream os;
  os.precision(17);
  os << "index,re,im\n";
  for (Eigen::Index k = 0; k < s.amplitudes.size(); ++k) os << k << ',' << s.amplitudes(k).real() << ',' << s.amplitudes(k).imag() << '\n';
  return os.str();
}

json schedule_to_json(const ControlSchedule& s) {
  json segs = json::array();
  for (const auto& seg : s.segments) segs.push_back({{"duration", seg.duration}, {"controls", seg.controls}});
  return {{"segments", segs}, {"total_time", s.total_time()}};
}

ControlSchedule schedule_from_json(const json& j, std::size_t m) {
  if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array())
    throw std::invalid_argument("schedule must be an object with a 'segments' array");
  ControlSchedule out;
  for (const auto& seg : j["segments"]) {
    if (!seg.is_object() || !seg.contains("duration") || !seg.contains("controls"))
      throw std::invalid_argument("each segment needs 'duration' and 'controls'");
    out.segments.push_back({seg["duration"].get<double>(), seg["controls"].get<std::vector<double>>()});
  }
  out.validate(m);
  return out;
}

int first_truncation(const SystemDefinition& sys) {
  return sys.truncations.front();
}

const OperatorPoly& hamiltonian_by_name(const SystemDefinition& sys, const std::string& name) {
  if (name == "H0") return sys.H0;
  if (name.size() >= 2 && name[0] == 'H') {
    std::size_t used = 0;
    int k = std::stoi(name.substr(1), &used);
    if (used == name.size() - 1 && k >= 1 && k <= static_cast<int>(sys.controls.size()))
      return sys.controls[static_cast<std::size_t>(k - 1)];
  }
  throw std::invalid_argument("unknown Hamiltonian '" + name + "' (use H0, H1, ...)");
}

std::string dump(const json& j) {
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------

int cmd_check(const CommonOptions& o) {
  SystemDefinition sys = load_with_overrides(o);
  TheoremReport r = theorem_verdict(sys);
  json out = report_to_json(r, sys);
  out["command"] = "check";
  Outputs files;
  files.add("report.json", dump(out));
  files.commit(o.out_dir);
  std::cout << dump(out);
  return verdict_exit_code(r.verdict);
}

int cmd_closure(const CommonOptions& o) {
  SystemDefinition sys = load_with_overrides(o);
  const int cap = sys.caps.back();
  std::vector<OperatorPoly> gens_a;
  for (const auto& g : sys.all_hamiltonians())
    if (!g.is_zero()) gens_a.push_back(g);
  LieBasisSet A = generate_closure(gens_a, cap, sys.max_rounds);
  LieBasisSet B = generate_closure(sys.controls, cap, sys.max_rounds);
  LieBasisSet C = build_C(sys.H0, sys.controls, cap, sys.max_ad_depth, sys.max_rounds);
  json out = header(sys, "closure", {{"cap", cap}});
  out["A"] = basis_to_json(A);
  out["B"] = basis_to_json(B);
  out["C"] = basis_to_json(C);
  out["condition1"] = containment_to_json(check_bracket_containment(B, C));
  Outputs files;
  files.add("closure.json", dump(out));
  files.commit(o.out_dir);
  std::cout << dump(out);
  return 0;
}

int cmd_growth(const CommonOptions& o) {
  SystemDefinition sys = load_with_overrides(o);
  std::vector<OperatorPoly> gens_a;
  for (const auto& g : sys.all_hamiltonians())
    if (!g.is_zero()) gens_a.push_back(g);
  GrowthProfile g = growth_profile(gens_a, sys.caps, sys.max_rounds);
  std::ostringstream csv;
  csv << "cap,dim,saturated,discarded\n";
  for (const auto& r : g.rows) csv << r.cap << ',' << r.dim << ',' << (r.saturated ? 1 : 0) << ',' << (r.discarded ? 1 : 0) << '\n';
  json out = header(sys, "growth", {{"caps", sys.caps}});
  out["growth"] = growth_to_json(g);
  out["note"] = "growth across caps is a heuristic for infinite dimension, not a proof";
  Outputs files;
  files.add("growth.csv", csv.str());
  files.add("growth.json", dump(out));
  files.commit(o.out_dir);
  std::cout << csv.str();
  return 0;
}

int cmd_simulate(const CommonOptions& o, const std::string& schedule_path) {
  SystemDefinition sys = load_with_overrides(o);
  const int N = first_truncation(sys);
  TruncatedRep rep = sys.representation(N);
  ControlSchedule schedule;
  json flags{{"N", N}};
  if (!schedule_path.empty()) {
    std::ifstream in(schedule_path);
    if (!in) throw std::invalid_argument("cannot open schedule '" + schedule_path + "'");
    schedule = schedule_from_json(json::parse(in), sys.controls.size());
    flags["schedule"] = schedule_path;
  }
  StateVector psi0 = smooth_state(sys.profiles.front(), N);
  Diagnostics diag;
  StateVector psi = propagate(rep, sys.H0, sys.controls, schedule, psi0, &diag);
  json out = header(sys, "simulate", flags);
  out["schedule"] = schedule_to_json(schedule);
  out["initial_state"] = state_to_json(psi0);
  out["final_state"] = state_to_json(psi);
  out["norm"] = psi.amplitudes.norm();
  out["fidelity_to_initial"] = fidelity(psi, psi0);
  out["max_top_population"] = diag.max_top_population;
  out["warnings"] = diag.warnings;
  Outputs files;
  files.add("simulate.json", dump(out));
  files.add("final_state.csv", state_csv(psi));
  files.commit(o.out_dir);
  std::cout << dump(out);
  return 0;
}

struct SynthesizeFlags {
  std::string word = "[H1,H2]";
  double s = 0.2;
  int n = 16;
  double u = 64.0;
  double T = 8.0;
  double shift = 0.0;
};

int cmd_synthesize(const CommonOptions& o, const SynthesizeFlags& f) {
  SystemDefinition sys = load_with_overrides(o);
  const int N = first_truncation(sys);
  TruncatedRep rep = sys.representation(N);
  BracketWord word = parse_word(f.word);
  Synthesis syn = synthesize(word, f.s, sys.H0, sys.controls, {f.n, f.u, f.T});
  ControlSchedule schedule = syn.schedule;
  if (f.shift < 0.0) throw std::invalid_argument("--shift must be nonnegative");
  if (f.shift > 0.0) schedule.segments.push_back({f.shift, std::vector<double>(sys.controls.size(), 0.0)});
  StateVector psi0 = smooth_state(sys.profiles.front(), N);
  StateVector target = exact_flow(syn.generator, f.s, rep, psi0);
  if (f.shift > 0.0) target = exact_flow(sys.H0, f.shift, rep, target);
  Diagnostics diag;
  StateVector psi = propagate(rep, sys.H0, sys.controls, schedule, psi0, &diag);
  json flags{{"word", f.word}, {"s", f.s}, {"n", f.n}, {"u", f.u}, {"T", f.T}, {"shift", f.shift}, {"N", N}};
  json out = header(sys, "synthesize", flags);
  out["generator"] = syn.generator.to_string();
  out["segments"] = schedule.segments.size();
  out["total_time"] = schedule.total_time();
  out["infidelity"] = infidelity(psi, target);
  out["fidelity_error"] = fidelity_error(psi, target);
  out["norm"] = psi.amplitudes.norm();
  out["max_top_population"] = diag.max_top_population;
  out["warnings"] = diag.warnings;
  Outputs files;
  files.add("schedule.json", dump(schedule_to_json(schedule)));
  files.add("synthesize.json", dump(out));
  files.commit(o.out_dir);
  std::cout << dump(out);
  return 0;
}

struct ConvergeFlags {
  std::string experiment = "trotter_sum";
  double s = 0.0;
  std::string ladder;
  std::string x;
  std::string y;
};

int cmd_converge(const CommonOptions& o, const ConvergeFlags& f) {
  SystemDefinition sys = load_with_overrides(o);
  const int N = first_truncation(sys);
  TruncatedRep rep = sys.representation(N);
  StateVector psi = smooth_state(sys.profiles.front(), N);
  const std::string& e = f.experiment;
  const bool ladder_n = e == "trotter_sum" || e == "trotter_bracket";
  if (!ladder_n && e != "attainability" && e != "dominant_control")
    throw std::invalid_argument("unknown experiment '" + e + "' (trotter_sum, trotter_bracket, attainability, dominant_control)");
  std::string xname = f.x, yname = f.y;
  if (xname.empty()) xname = (e == "attainability") ? "H1" : "H0";
  if (yname.empty()) yname = (e == "attainability") ? "H0" : "H1";
  const OperatorPoly& X = hamiltonian_by_name(sys, xname);
  const OperatorPoly& Y = hamiltonian_by_name(sys, yname);
  double s = f.s > 0.0 ? f.s : (e == "attainability" ? 0.3 : 0.5);

  ConvergenceSeries series;
  std::vector<double> ladder;
  if (!f.ladder.empty()) ladder = parse_double_list(f.ladder);
  if (ladder_n) {
    std::vector<int> ns;
    if (ladder.empty())
      ns = default_n_ladder();
    else
      for (double v : ladder) {
        if (v < 1 || v != std::floor(v)) throw std::invalid_argument("refinement ladder needs positive integers");
        ns.push_back(static_cast<int>(v));
      }
    series = e == "trotter_sum" ? trotter_sum_series(X, Y, s, ns, rep, psi) : trotter_bracket_series(X, Y, s, ns, rep, psi);
  } else if (e == "attainability") {
    series = attainability_series(X, Y, s, ladder.empty() ? default_t_ladder() : ladder, rep, psi);
  } else {
    series = dominant_control_series(X, Y, s, ladder.empty() ? default_u_ladder() : ladder, rep, psi);
  }

  std::ostringstream csv;
  series.write_csv(csv);
  json flags{{"experiment", e}, {"s", s}, {"X", xname}, {"Y", yname}, {"N", N}};
  json out = header(sys, "converge", flags);
  out["parameter"] = series.parameter;
  out["params"] = series.params;
  out["errors"] = series.errors;
  out["estimated_order"] = series.order;
  out["strictly_decreasing"] = series.strictly_decreasing();
  out["error_metric"] = "sqrt(1 - |<psi, phi>|^2)";
  Outputs files;
  files.add("converge.csv", csv.str());
  files.add("converge.json", dump(out));
  files.commit(o.out_dir);
  std::cout << csv.str();
  std::cout << "estimated_order," << series.order << "\n";
  return 0;
}

void add_common(CLI::App* sub, CommonOptions& o) {
  sub->add_option("system", o.system_path, "System definition JSON")->required();
  sub->add_option("--cap", o.caps, "Degree cap (repeatable)");
  sub->add_option("--caps", o.caps_list, "Comma-separated degree caps");
  sub->add_option("--N", o.truncations, "Truncation dimension (repeatable)");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--tol", o.tol, "Relative rank tolerance");
  sub->add_option("--profile", o.profile, "Test state profile: gaussian, exponential, poly-gaussian, basis");
  sub->add_option_function<std::uint64_t>(
      "--seed",
      [&o](const std::uint64_t& v) {
        o.seed = v;
        o.seed_set = true;
      },
      "Seed recorded in reports");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qreach: controllability checks for bilinear quantum control systems"};
  app.set_version_flag("--version", std::string(kToolVersion));
  app.require_subcommand(1);

  CommonOptions o;
  std::string schedule_path;
  SynthesizeFlags sf;
  ConvergeFlags cf;

  auto* check = app.add_subcommand("check", "Evaluate the two bracket conditions and growth across caps");
  auto* closure = app.add_subcommand("closure", "Print degree-capped bases of A, B and C");
  auto* growth = app.add_subcommand("growth", "Closure dimension at each cap");
  auto* simulate = app.add_subcommand("simulate", "Propagate a smooth state under a control schedule");
  auto* synth = app.add_subcommand("synthesize", "Compile a bracket word into a control schedule");
  auto* converge = app.add_subcommand("converge", "Convergence study of a product formula or limit");
  for (auto* sub : {check, closure, growth, simulate, synth, converge}) add_common(sub, o);

  simulate->add_option("--schedule", schedule_path, "Schedule JSON with a 'segments' array (default: empty)");
  synth->add_option("--word", sf.word, "Bracket word, e.g. [H1,[H1,H2]] or ad(H1)");
  synth->add_option("--s", sf.s, "Target flow time");
  synth->add_option("--n", sf.n, "Product-formula refinement");
  synth->add_option("--u", sf.u, "Control amplitude");
  synth->add_option("--T", sf.T, "Conjugation strength for ad(...)");
  synth->add_option("--shift", sf.shift, "Free evolution appended after the word");
  converge->add_option("--experiment", cf.experiment, "trotter_sum | trotter_bracket | attainability | dominant_control");
  converge->add_option("--s", cf.s, "Flow time");
  converge->add_option("--ladder", cf.ladder, "Comma-separated parameter ladder");
  converge->add_option("--x", cf.x, "First Hamiltonian (H0, H1, ...)");
  converge->add_option("--y", cf.y, "Second Hamiltonian (H0, H1, ...)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*check) return cmd_check(o);
    if (*closure) return cmd_closure(o);
    if (*growth) return cmd_growth(o);
    if (*simulate) return cmd_simulate(o, schedule_path);
    if (*synth) return cmd_synthesize(o, sf);
    if (*converge) return cmd_converge(o, cf);
  } catch (const SystemError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
