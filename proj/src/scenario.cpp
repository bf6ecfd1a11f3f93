#include "landauer/scenario.hpp"

#include "landauer/processes.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"

namespace landauer {

namespace {

using nlohmann::json;

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ScenarioError(std::string(what) + ": expected an object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key()))
      throw ScenarioError(std::string(what) + ": unknown field '" + it.key() + "'");
}

double number_at(const json& j, const char* key, const char* what) {
  if (!j.contains(key) || !j.at(key).is_number())
    throw ScenarioError(std::string(what) + ": missing numeric field '" + key + "'");
  return j.at(key).get<double>();
}

// beta accepts a number or the tokens "inf" / "-inf"
InverseTemp parse_beta(const json& j) {
  if (j.is_number()) return InverseTemp(j.get<double>());
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf" || s == "+inf") return InverseTemp::plus_infinity();
    if (s == "-inf") return InverseTemp::minus_infinity();
  }
  throw ScenarioError("reservoir.beta: expected a number, \"inf\", or \"-inf\"");
}

Matrix parse_matrix_file(const std::string& path, const std::string& base_dir) {
  namespace fs = std::filesystem;
  fs::path p(path);
  if (p.is_relative()) p = fs::path(base_dir) / p;
  std::ifstream in(p);
  if (!in) throw ScenarioError("matrix_file: cannot open " + p.string());
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ScenarioError("matrix_file " + p.string() + ": " + e.what());
  }
  require_object(j, "matrix_file");
  reject_unknown(j, {"re", "im"}, "matrix_file");
  if (!j.contains("re") || !j.at("re").is_array())
    throw ScenarioError("matrix_file: missing 're' array");
  const auto& re = j.at("re");
  const Index n = static_cast<Index>(re.size());
  Matrix m = Matrix::Zero(n, n);
  for (Index r = 0; r < n; ++r) {
    const auto& row = re.at(static_cast<size_t>(r));
    if (!row.is_array() || static_cast<Index>(row.size()) != n)
      throw ScenarioError("matrix_file: 're' must be a square array");
    for (Index c = 0; c < n; ++c) m(r, c) = row.at(static_cast<size_t>(c)).get<double>();
  }
  if (j.contains("im")) {
    const auto& im = j.at("im");
    if (!im.is_array() || static_cast<Index>(im.size()) != n)
      throw ScenarioError("matrix_file: 'im' must match 're' in shape");
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c)
        m(r, c) += Complex(0.0, im.at(static_cast<size_t>(r)).at(static_cast<size_t>(c)).get<double>());
  }
  return m;
}

RealVector parse_real_vector(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ScenarioError(std::string(what) + ": expected a nonempty array of numbers");
  RealVector v(static_cast<Index>(j.size()));
  for (Index i = 0; i < v.size(); ++i) v(i) = j.at(static_cast<size_t>(i)).get<double>();
  return v;
}

// state spec: {"spectrum": [...], "basis": "identity"|{"haar_seed": n}} |
//             {"preset": "maximally_mixed"|"pure_ground"} |
//             {"seed": n, "rank": r} | {"matrix_file": "..."}
QState parse_state(const json& j, Index dim, const std::string& base_dir, const char* what) {
  require_object(j, what);
  reject_unknown(j, {"spectrum", "basis", "preset", "seed", "rank", "matrix_file"}, what);
  if (j.contains("spectrum")) {
    RealVector p = parse_real_vector(j.at("spectrum"), what);
    if (dim > 0 && p.size() != dim)
      throw ScenarioError(std::string(what) + ": spectrum length does not match dim");
    QState diag = diagonal_state(p);
    if (j.contains("basis") && !(j.at("basis").is_string() && j.at("basis") == "identity")) {
      const json& b = j.at("basis");
      require_object(b, what);
      reject_unknown(b, {"haar_seed"}, what);
      const auto seed = static_cast<std::uint64_t>(number_at(b, "haar_seed", what));
      return apply_unitary(diag, haar_unitary(p.size(), seed));
    }
    return diag;
  }
  if (j.contains("preset")) {
    if (dim <= 0) throw ScenarioError(std::string(what) + ": preset needs an explicit dim");
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "maximally_mixed") return maximally_mixed(dim);
    if (preset == "pure_ground") {
      Vector e0 = Vector::Zero(dim);
      e0(0) = 1.0;
      return pure_state(e0);
    }
    throw ScenarioError(std::string(what) + ": unknown preset '" + preset + "'");
  }
  if (j.contains("seed")) {
    if (dim <= 0) throw ScenarioError(std::string(what) + ": seed needs an explicit dim");
    const auto seed = static_cast<std::uint64_t>(number_at(j, "seed", what));
    const Index rank = j.contains("rank")
                           ? static_cast<Index>(number_at(j, "rank", what))
                           : dim;
    return random_state(dim, rank, seed);
  }
  if (j.contains("matrix_file"))
    return QState(parse_matrix_file(j.at("matrix_file").get<std::string>(), base_dir));
  throw ScenarioError(std::string(what) + ": need spectrum, preset, seed, or matrix_file");
}

HermitianOp parse_hamiltonian(const json& j, Index dim, const std::string& base_dir) {
  require_object(j, "reservoir.hamiltonian");
  reject_unknown(j, {"eigenvalues", "basis", "preset", "matrix_file"}, "reservoir.hamiltonian");
  if (j.contains("eigenvalues")) {
    RealVector e = parse_real_vector(j.at("eigenvalues"), "reservoir.hamiltonian");
    if (dim > 0 && e.size() != dim)
      throw ScenarioError("reservoir.hamiltonian: eigenvalue count does not match dim");
    Matrix h = diag_matrix(e);
    if (j.contains("basis") && !(j.at("basis").is_string() && j.at("basis") == "identity")) {
      const json& b = j.at("basis");
      require_object(b, "reservoir.hamiltonian.basis");
      reject_unknown(b, {"haar_seed"}, "reservoir.hamiltonian.basis");
      const auto seed =
          static_cast<std::uint64_t>(number_at(b, "haar_seed", "reservoir.hamiltonian.basis"));
      const Matrix u = haar_unitary(e.size(), seed).matrix();
      h = u * h * u.adjoint();
    }
    return HermitianOp(std::move(h));
  }
  if (j.contains("preset")) {
    if (dim <= 0) throw ScenarioError("reservoir.hamiltonian: preset needs an explicit dim");
    const std::string preset = j.at("preset").get<std::string>();
    if (preset == "zero") return HermitianOp(Matrix::Zero(dim, dim));
    if (preset == "ladder") {
      RealVector e(dim);
      for (Index i = 0; i < dim; ++i) e(i) = static_cast<double>(i);
      return HermitianOp(diag_matrix(e));
    }
    throw ScenarioError("reservoir.hamiltonian: unknown preset '" + preset + "'");
  }
  if (j.contains("matrix_file"))
    return HermitianOp(parse_matrix_file(j.at("matrix_file").get<std::string>(), base_dir));
  throw ScenarioError("reservoir.hamiltonian: need eigenvalues, preset, or matrix_file");
}

std::vector<Index> parse_dims(const json& j, const char* what) {
  if (!j.is_array() || j.empty())
    throw ScenarioError(std::string(what) + ": dims must be a nonempty array");
  std::vector<Index> dims;
  for (const auto& v : j) dims.push_back(static_cast<Index>(v.get<double>()));
  return dims;
}

struct ParsedChecks {
  struct Item {
    std::string name;
    std::string field;  // for expect
    double value = 0.0;
    double tol = 0.0;
  };
  std::vector<Item> items;
};

ParsedChecks parse_checks(const json& j) {
  ParsedChecks out;
  if (!j.is_array()) throw ScenarioError("checks: expected an array");
  for (const auto& c : j) {
    require_object(c, "checks[]");
    reject_unknown(c, {"name", "tol", "field", "value"}, "checks[]");
    ParsedChecks::Item item;
    if (!c.contains("name")) throw ScenarioError("checks[]: missing 'name'");
    item.name = c.at("name").get<std::string>();
    item.tol = c.contains("tol") ? c.at("tol").get<double>() : 1e-8;
    if (item.name == "expect") {
      if (!c.contains("field")) throw ScenarioError("checks[]: expect needs 'field'");
      item.field = c.at("field").get<std::string>();
      item.value = number_at(c, "value", "checks[]");
    }
    out.items.push_back(std::move(item));
  }
  return out;
}

void push(ScenarioResult& r, const std::string& k, double v) { r.values.emplace_back(k, v); }

double lookup(const ScenarioResult& r, const std::string& k) {
  for (const auto& [key, v] : r.values)
    if (key == k) return v;
  throw ScenarioError("checks: unknown report field '" + k + "'");
}

void fill_process_values(ScenarioResult& out, const ProcessSpec& spec,
                         const ProcessReport& rep) {
  push(out, "delta_S", rep.delta_S);
  push(out, "delta", rep.delta);
  push(out, "delta_Q", rep.delta_Q);
  push(out, "beta_delta_Q", rep.beta_delta_Q);
  push(out, "mutual_info", rep.mutual_info_final);
  push(out, "rel_ent", rep.rel_ent_final);
  push(out, "equality_residual", rep.equality_residual);
  push(out, "second_law_residual", rep.second_law_residual);
  push(out, "landauer_margin", rep.margins.landauer);
  push(out, "finite_size_margin", rep.margins.finite_size);
  if (rep.margins.heat_extraction) push(out, "heat_extraction_margin", *rep.margins.heat_extraction);
  if (rep.margins.pureness) push(out, "pureness_margin", *rep.margins.pureness);
  if (!spec.reservoir.has_mask())
    push(out, "integral_residual", integral_version_residual(spec, rep));
}

void apply_checks(ScenarioResult& out, const ParsedChecks& checks) {
  out.all_passed = true;
  auto margin_check = [&](const std::string& label, const std::string& field, double tol) {
    CheckOutcome c{label, 0.0, tol, false, true};
    for (const auto& [k, v] : out.values)
      if (k == field) {
        c.applicable = true;
        c.observed = v;
        c.passed = v >= -tol;
      }
    return c;
  };
  auto residual_check = [&](const std::string& label, const std::string& field, double tol) {
    CheckOutcome c{label, 0.0, tol, false, true};
    for (const auto& [k, v] : out.values)
      if (k == field) {
        c.applicable = true;
        c.observed = v;
        c.passed = v <= tol;
      }
    return c;
  };
  for (const auto& item : checks.items) {
    CheckOutcome c{item.name, 0.0, item.tol, true, false};
    if (item.name == "equality")
      c = residual_check(item.name, "equality_residual", item.tol);
    else if (item.name == "second_law")
      c = residual_check(item.name, "second_law_residual", item.tol);
    else if (item.name == "integral")
      c = residual_check(item.name, "integral_residual", item.tol);
    else if (item.name == "landauer")
      c = margin_check(item.name, "landauer_margin", item.tol);
    else if (item.name == "finite_size")
      c = margin_check(item.name, "finite_size_margin", item.tol);
    else if (item.name == "heat_extraction")
      c = margin_check(item.name, "heat_extraction_margin", item.tol);
    else if (item.name == "pureness")
      c = margin_check(item.name, "pureness_margin", item.tol);
    else if (item.name == "expect") {
      c.label = "expect " + item.field;
      c.observed = lookup(out, item.field);
      c.applicable = true;
      c.passed = std::abs(c.observed - item.value) <= item.tol;
    } else {
      throw ScenarioError("checks: unknown check '" + item.name + "'");
    }
    if (c.applicable && !c.passed) out.all_passed = false;
    out.checks.push_back(std::move(c));
  }
}

}  // namespace

ScenarioResult run_scenario_text(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario parse error: ") + e.what());
  }
  require_object(root, "scenario");
  reject_unknown(root, {"system", "reservoir", "process", "checks"}, "scenario");
  if (!root.contains("process")) throw ScenarioError("scenario: missing 'process'");
  const json& proc = root.at("process");
  require_object(proc, "process");
  if (!proc.contains("kind")) throw ScenarioError("process: missing 'kind'");
  const std::string kind = proc.at("kind").get<std::string>();

  ScenarioResult out{};
  out.all_passed = true;

  auto parse_system = [&]() {
    if (!root.contains("system")) throw ScenarioError("scenario: missing 'system'");
    const json& sys = root.at("system");
    require_object(sys, "system");
    reject_unknown(sys, {"dim", "dims", "state"}, "system");
    Index dim = sys.contains("dim") ? static_cast<Index>(number_at(sys, "dim", "system")) : 0;
    if (!sys.contains("state")) throw ScenarioError("system: missing 'state'");
    QState st = parse_state(sys.at("state"), dim, base_dir, "system.state");
    if (sys.contains("dims")) st = st.with_dims(parse_dims(sys.at("dims"), "system.dims"));
    return st;
  };
  auto parse_reservoir = [&]() {
    if (!root.contains("reservoir")) throw ScenarioError("scenario: missing 'reservoir'");
    const json& res = root.at("reservoir");
    require_object(res, "reservoir");
    reject_unknown(res, {"dim", "dims", "beta", "hamiltonian", "mask"}, "reservoir");
    if (!res.contains("beta")) throw ScenarioError("reservoir: missing 'beta'");
    if (!res.contains("hamiltonian")) throw ScenarioError("reservoir: missing 'hamiltonian'");
    Index dim = res.contains("dim") ? static_cast<Index>(number_at(res, "dim", "reservoir")) : 0;
    HermitianOp h = parse_hamiltonian(res.at("hamiltonian"), dim, base_dir);
    InverseTemp beta = parse_beta(res.at("beta"));
    std::vector<Index> dims;
    if (res.contains("dims")) dims = parse_dims(res.at("dims"), "reservoir.dims");
    if (res.contains("mask")) {
      std::vector<Index> mask = parse_dims(res.at("mask"), "reservoir.mask");
      return Reservoir(std::move(h), beta, std::move(mask), std::move(dims));
    }
    return Reservoir(std::move(h), beta, std::move(dims));
  };

  try {
    if (kind == "identity" || kind == "unitary-matrix" || kind == "swap") {
      QState rho_s = parse_system();
      Reservoir res = parse_reservoir();
      Unitary u = identity_unitary(rho_s.dim() * res.dim());
      if (kind == "identity") {
        reject_unknown(proc, {"kind"}, "process");
      } else if (kind == "unitary-matrix") {
        reject_unknown(proc, {"kind", "haar_seed", "matrix_file"}, "process");
        if (proc.contains("haar_seed"))
          u = haar_unitary(rho_s.dim() * res.dim(),
                           static_cast<std::uint64_t>(number_at(proc, "haar_seed", "process")));
        else if (proc.contains("matrix_file"))
          u = Unitary(parse_matrix_file(proc.at("matrix_file").get<std::string>(), base_dir));
        else
          throw ScenarioError("process: unitary-matrix kind needs haar_seed or matrix_file");
      } else {  // swap
        reject_unknown(proc, {"kind", "d_sw", "d_s2", "d_r2"}, "process");
        const Index d_sw = proc.contains("d_sw")
                               ? static_cast<Index>(number_at(proc, "d_sw", "process"))
                               : rho_s.dim();
        const Index d_s2 = rho_s.dim() / d_sw;
        const Index d_r2 = res.dim() / d_sw;
        if (d_sw * d_s2 != rho_s.dim() || d_sw * d_r2 != res.dim())
          throw ScenarioError("process: swap dimension does not divide system/reservoir");
        rho_s = rho_s.with_dims({d_sw, d_s2});
        Reservoir res2(res.hamiltonian(), res.beta(), {d_sw, d_r2});
        u = swap_unitary({d_sw, d_s2, d_sw, d_r2}, 0, 2);
        ProcessSpec spec{std::move(rho_s), std::move(res2), std::move(u)};
        ProcessReport rep = run_process(spec);
        fill_process_values(out, spec, rep);
        apply_checks(out, parse_checks(root.contains("checks") ? root.at("checks") : json::array()));
        return out;
      }
      ProcessSpec spec{std::move(rho_s), std::move(res), std::move(u)};
      ProcessReport rep = run_process(spec);
      fill_process_values(out, spec, rep);
    } else if (kind == "kstep") {
      reject_unknown(proc, {"kind", "target", "k"}, "process");
      QState rho_s = parse_system();
      if (root.contains("reservoir"))
        throw ScenarioError("scenario: kstep builds its own reservoir; drop 'reservoir'");
      if (!proc.contains("target")) throw ScenarioError("process: kstep needs 'target'");
      QState target = parse_state(proc.at("target"), rho_s.dim(), base_dir, "process.target");
      KStepSpec ks{rho_s, target, static_cast<int>(number_at(proc, "k", "process")),
                   Interpolation::linear_mixture, {}};
      KStepReport rep = build_kstep_process(ks);
      push(out, "k", ks.k);
      push(out, "rank", static_cast<double>(rep.rank));
      push(out, "delta_S", rep.delta_S);
      push(out, "beta_delta_Q", rep.beta_delta_Q);
      push(out, "gap", rep.gap);
      push(out, "upper_bound", rep.upper_bound);
      push(out, "lower_bound", rep.lower_bound);
    } else if (kind == "tight") {
      reject_unknown(proc, {"kind", "delta_s", "d"}, "process");
      if (root.contains("system") || root.contains("reservoir"))
        throw ScenarioError("scenario: tight builds its own states; drop system/reservoir");
      const double ds = number_at(proc, "delta_s", "process");
      const Index d = static_cast<Index>(number_at(proc, "d", "process"));
      TightProcess tight = build_tight_process(ds, d);
      ProcessReport rep = run_process(tight.swap.spec);
      fill_process_values(out, tight.swap.spec, rep);
      push(out, "m_value", tight.optimum.value);
      push(out, "s_star", tight.optimum.s_star);
      push(out, "r_star", tight.optimum.r_star);
      push(out, "tight_gap", rep.beta_delta_Q - (rep.delta_S + tight.optimum.value));
    } else if (kind == "memory") {
      reject_unknown(proc, {"kind", "preset", "probs"}, "process");
      if (root.contains("system") || root.contains("reservoir"))
        throw ScenarioError("scenario: memory presets build their own states");
      if (!proc.contains("preset")) throw ScenarioError("process: memory needs 'preset'");
      const std::string preset = proc.at("preset").get<std::string>();
      RealVector probs(2);
      probs << 0.5, 0.5;
      if (proc.contains("probs")) probs = parse_real_vector(proc.at("probs"), "process.probs");
      MemoryProcessSpec spec = preset == "classical"   ? classical_memory_example(probs)
                               : preset == "entangled" ? entangled_memory_example(probs)
                                                       : throw ScenarioError(
                                                             "process: unknown memory preset '" +
                                                             preset + "'");
      MemoryReport rep = memory_process_report(spec);
      push(out, "delta_S_cond", rep.delta_S_cond);
      push(out, "delta", rep.delta);
      push(out, "delta_Q", rep.delta_Q);
      push(out, "beta_delta_Q", rep.beta_delta_Q);
      push(out, "mutual_info_SMR", rep.mutual_info_SM_R);
      push(out, "rel_ent", rep.rel_ent_final);
      push(out, "entropy_M_initial", rep.entropy_M_initial);
      push(out, "entropy_M_final", rep.entropy_M_final);
      push(out, "entropy_S_final", von_neumann_entropy(rep.rho_S_final));
      push(out, "second_law_margin", rep.second_law_margin);
      push(out, "landauer_margin", rep.landauer_margin);
    } else if (kind == "pure-erasure") {
      reject_unknown(proc, {"kind", "s1", "epsilon", "level"}, "process");
      if (root.contains("system") || root.contains("reservoir"))
        throw ScenarioError("scenario: pure-erasure builds its own states");
      PureErasureReport rep = pure_erasure_truncated(
          number_at(proc, "s1", "process"), number_at(proc, "epsilon", "process"),
          static_cast<int>(number_at(proc, "level", "process")));
      push(out, "delta_S", rep.delta_S);
      push(out, "rel_ent", rep.rel_ent);
      push(out, "beta_delta_Q", rep.beta_delta_Q);
      push(out, "purity_deficit", rep.final_purity_deficit);
      push(out, "tail_mass", rep.tail_mass);
      push(out, "expected_rel_ent", rep.expected_rel_ent);
      push(out, "equality_residual", std::abs(rep.beta_delta_Q - rep.delta_S - rep.rel_ent));
    } else {
      throw ScenarioError("process: unknown kind '" + kind + "'");
    }
  } catch (const ScenarioError&) {
    throw;
  } catch (const std::exception& e) {
    throw ScenarioError(std::string("scenario: ") + e.what());
  }

  apply_checks(out, parse_checks(root.contains("checks") ? root.at("checks") : json::array()));
  return out;
}

ScenarioResult run_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return run_scenario_text(buf.str(), std::filesystem::path(path).parent_path().string());
}

std::string format_scenario_result(const ScenarioResult& result) {
  std::ostringstream os;
  for (const auto& [k, v] : result.values) {
    char line[64];
    std::snprintf(line, sizeof(line), "%.12g", v);
    os << "  " << k << " = " << line << "\n";
  }
  for (const auto& c : result.checks) {
    char obs[64];
    std::snprintf(obs, sizeof(obs), "%.6g", c.observed);
    if (!c.applicable)
      os << "  n/a  " << c.label << "\n";
    else
      os << (c.passed ? "  PASS " : "  FAIL ") << c.label << " (observed " << obs << ", tol "
         << c.tol << ")\n";
  }
  return os.str();
}

}  // namespace landauer
