#include "dyadic/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "dyadic/core.hpp"
#include "dyadic/martingale.hpp"
#include "dyadic/walsh.hpp"

namespace dyadic {

namespace {

// ---------------------------------------------------------------------------
// Parameter objects

[[noreturn]] void bad(const std::string& what) { throw ValidationError(what); }

void reject_unknown(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; })) {
      bad("unknown field '" + key + "' in " + where);
    }
  }
}

double number_of(const Json& j, const std::string& where) {
  if (!j.is_number()) bad(where + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(where + " must be finite");
  return v;
}

std::int64_t integer_of(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) bad(where + " must be an integer");
  return j.get<std::int64_t>();
}

const std::vector<std::string> kSequenceFormulas = {"constant", "ceil_half", "floor_sqrt", "inv_log2", "harmonic",
                                                    "geometric"};

Json normalize_sequence(const Json& j, const std::string& where) {
  if (j.is_string()) return normalize_sequence(Json{{"formula", j.get<std::string>()}}, where);
  if (!j.is_object()) bad(where + " must be a formula tag or an object");
  if (j.contains("table")) {
    reject_unknown(j, {"table"}, where);
    const Json& t = j.at("table");
    if (!t.is_array() || t.empty()) bad(where + ".table must be a nonempty array");
    Json out = Json::array();
    for (std::size_t i = 0; i < t.size(); ++i) out.push_back(number_of(t[i], where + ".table[" + std::to_string(i) + "]"));
    return Json{{"table", out}};
  }
  reject_unknown(j, {"formula", "value"}, where);
  if (!j.contains("formula") || !j.at("formula").is_string()) bad(where + " needs a formula tag or a table");
  const std::string f = j.at("formula").get<std::string>();
  if (std::find(kSequenceFormulas.begin(), kSequenceFormulas.end(), f) == kSequenceFormulas.end()) {
    bad(where + ": unknown formula '" + f + "'");
  }
  if (f == "constant") {
    if (!j.contains("value")) bad(where + ": constant formula needs a value");
    return Json{{"formula", f}, {"value", number_of(j.at("value"), where + ".value")}};
  }
  if (j.contains("value")) bad(where + ": formula '" + f + "' takes no value");
  return Json{{"formula", f}};
}

const std::map<std::string, MatrixFamily>& matrix_families() {
  static const std::map<std::string, MatrixFamily> m = {
      {"partial_sum", MatrixFamily::partial_sum}, {"fejer", MatrixFamily::cesaro},
      {"cesaro", MatrixFamily::cesaro},           {"vallee_poussin", MatrixFamily::vallee_poussin},
      {"norlund_log", MatrixFamily::norlund_log}, {"norlund", MatrixFamily::norlund}};
  return m;
}

const char* matrix_param_key(const std::string& family) {
  if (family == "cesaro") return "alpha";
  if (family == "vallee_poussin") return "lambda";
  if (family == "norlund") return "q";
  return nullptr;
}

Json normalize_matrix(const Json& j, const std::string& where) {
  if (j.is_string()) return normalize_matrix(Json{{"family", j.get<std::string>()}}, where);
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    bad(where + " must be a family name or {\"family\": ...}");
  }
  const std::string f = j.at("family").get<std::string>();
  if (!matrix_families().count(f)) bad(where + ": unknown matrix family '" + f + "'");
  const char* key = matrix_param_key(f);
  if (!key) {
    reject_unknown(j, {"family"}, where);
    return Json{{"family", f}};
  }
  reject_unknown(j, {"family", key}, where);
  if (!j.contains(key)) bad(where + ": family '" + f + "' needs '" + key + "'");
  return Json{{"family", f}, {key, normalize_sequence(j.at(key), where + "." + key)}};
}

Json normalize_weights(const Json& j, const std::string& where) {
  if (j.is_string()) return normalize_weights(Json{{"family", j.get<std::string>()}}, where);
  if (!j.is_object() || !j.contains("family") || !j.at("family").is_string()) {
    bad(where + " must be a family name or {\"family\": ...}");
  }
  const std::string f = j.at("family").get<std::string>();
  Json out{{"family", f}};
  if (f == "ones" || f == "harmonic") {
    reject_unknown(j, {"family", "scale"}, where);
  } else if (f == "t3") {
    reject_unknown(j, {"family", "L", "scale"}, where);
    out["L"] = j.contains("L") ? number_of(j.at("L"), where + ".L") : 2.0;
  } else if (f == "from_matrix") {
    reject_unknown(j, {"family", "matrix", "scale"}, where);
    if (!j.contains("matrix")) bad(where + ": from_matrix needs 'matrix'");
    out["matrix"] = normalize_matrix(j.at("matrix"), where + ".matrix");
  } else {
    bad(where + ": unknown weight family '" + f + "'");
  }
  out["scale"] = j.contains("scale") ? number_of(j.at("scale"), where + ".scale") : 1.0;
  return out;
}

Json normalize_cone(const Json& j, const std::string& where) {
  if (!j.is_object()) bad(where + " must be {\"kappa\": k} or {\"omega\": sequence}");
  if (j.contains("kappa")) {
    reject_unknown(j, {"kappa"}, where);
    return Json{{"kappa", number_of(j.at("kappa"), where + ".kappa")}};
  }
  reject_unknown(j, {"omega"}, where);
  if (!j.contains("omega")) bad(where + " needs 'kappa' or 'omega'");
  return Json{{"omega", normalize_sequence(j.at("omega"), where + ".omega")}};
}

Json normalize_gamma(const Json& j, const std::string& where) {
  if (j.is_string()) return normalize_gamma(Json{{"formula", j.get<std::string>()}}, where);
  if (!j.is_object() || !j.contains("formula") || !j.at("formula").is_string()) bad(where + " needs a formula");
  reject_unknown(j, {"formula", "value"}, where);
  const std::string f = j.at("formula").get<std::string>();
  if (f == "half_order" || f == "order_minus_one") {
    if (j.contains("value")) bad(where + ": formula '" + f + "' takes no value");
    return Json{{"formula", f}};
  }
  if (f == "constant") {
    if (!j.contains("value")) bad(where + ": constant formula needs a value");
    return Json{{"formula", f}, {"value", integer_of(j.at("value"), where + ".value")}};
  }
  bad(where + ": unknown gamma formula '" + f + "'");
}

Json normalize_function(const Json& j, const std::string& where) {
  if (j.is_string()) return normalize_function(Json{{"kind", j.get<std::string>()}}, where);
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string()) bad(where + " needs a kind");
  const std::string k = j.at("kind").get<std::string>();
  if (k == "step") {
    reject_unknown(j, {"kind", "cut"}, where);
    const double cut = j.contains("cut") ? number_of(j.at("cut"), where + ".cut") : 1.0 / 3.0;
    if (!(cut > 0 && cut < 1)) bad(where + ".cut must lie in (0,1)");
    return Json{{"kind", k}, {"cut", cut}};
  }
  if (k == "walsh") {
    reject_unknown(j, {"kind", "index"}, where);
    const std::int64_t idx = j.contains("index") ? integer_of(j.at("index"), where + ".index") : 5;
    if (idx < 0) bad(where + ".index must be nonnegative");
    return Json{{"kind", k}, {"index", idx}};
  }
  if (k == "random") {
    reject_unknown(j, {"kind"}, where);
    return Json{{"kind", k}};
  }
  bad(where + ": unknown function kind '" + k + "'");
}

// ---------------------------------------------------------------------------
// Descriptor schema

enum class FieldType {
  integer,
  unsigned_integer,
  number,
  optional_number,
  string,
  boolean,
  integer_list,
  sequence,
  sequence_list,
  matrix,
  weights,
  cone,
  gamma,
  rule,
  function,
  choice,
};

struct Field {
  std::string name;
  FieldType type;
  Json fallback;  // null with required = true means no default
  bool required = false;
  std::vector<std::string> choices = {};
};

Field opt(std::string name, FieldType t, Json fallback) { return Field{std::move(name), t, std::move(fallback)}; }
Field req(std::string name, FieldType t) { return Field{std::move(name), t, nullptr, true}; }

const std::map<std::string, std::vector<Field>>& schemas() {
  static const std::map<std::string, std::vector<Field>> s = [] {
    std::map<std::string, std::vector<Field>> m;
    m["kernel_dump"] = {Field{"kernel", FieldType::choice, "dirichlet", false,
                              {"walsh", "rademacher", "dirichlet", "fejer_sum"}},
                        opt("parameter", FieldType::unsigned_integer, 3)};
    m["decompose_check"] = {req("matrix", FieldType::matrix), opt("n_list", FieldType::integer_list, Json::array()),
                            opt("count", FieldType::integer, 20), opt("tolerance", FieldType::number, 1e-8)};
    m["ratio_scan"] = {req("weights", FieldType::weights), opt("cone", FieldType::cone, Json{{"kappa", 0.5}}),
                       opt("order_lo", FieldType::integer, 4),   opt("order_hi", FieldType::integer, 20),
                       opt("per_order", FieldType::integer, 8),  opt("candidate", FieldType::number, 1.0),
                       opt("max_deviation", FieldType::optional_number, nullptr)};
    m["divergence_search"] = {req("weights", FieldType::weights), opt("cone", FieldType::cone, Json{{"kappa", 0.5}}),
                              opt("order_lo", FieldType::integer, 2), opt("order_hi", FieldType::integer, 20),
                              opt("per_order", FieldType::integer, 8),
                              Field{"expect", FieldType::choice, "any", false, {"any", "accept", "refuse"}}};
    m["omega_sum_sweep"] = {req("weights", FieldType::weights), opt("order_lo", FieldType::integer, 1),
                            opt("order_hi", FieldType::integer, 20), opt("per_order", FieldType::integer, 8)};
    m["witness_sweep"] = {opt("weights", FieldType::weights, "ones"),
                          opt("gamma", FieldType::gamma, "half_order"),
                          opt("etas", FieldType::integer_list, Json::array({4, 6, 8, 10})),
                          opt("rule", FieldType::rule, "literal"),
                          opt("c0", FieldType::number, 0.3),
                          opt("c_empirical", FieldType::number, 1.0),
                          opt("require_monotone", FieldType::boolean, false)};
    m["prop2"] = {req("q", FieldType::sequence), opt("k_max", FieldType::integer, 20),
                  opt("certificate_max", FieldType::optional_number, nullptr)};
    m["vp_dichotomy"] = {opt("lambdas", FieldType::sequence_list, Json::array({"ceil_half", "floor_sqrt"})),
                         opt("order_max", FieldType::integer, 16),
                         opt("tildes", FieldType::boolean, false),
                         opt("bounded_max", FieldType::optional_number, nullptr)};
    m["mean_convergence"] = {req("matrix", FieldType::matrix), opt("function", FieldType::function, "step"),
                             opt("n_random", FieldType::integer, 16)};
    return m;
  }();
  return s;
}

Json normalize_field(const Field& f, const Json& v, const std::string& where) {
  switch (f.type) {
    case FieldType::integer: return integer_of(v, where);
    case FieldType::unsigned_integer: {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
        bad(where + " must be a nonnegative integer");
      }
      return v.get<std::uint64_t>();
    }
    case FieldType::number: return number_of(v, where);
    case FieldType::optional_number: return v.is_null() ? Json(nullptr) : Json(number_of(v, where));
    case FieldType::string:
      if (!v.is_string()) bad(where + " must be a string");
      return v;
    case FieldType::boolean:
      if (!v.is_boolean()) bad(where + " must be true or false");
      return v;
    case FieldType::integer_list: {
      if (!v.is_array()) bad(where + " must be an array of integers");
      Json out = Json::array();
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(integer_of(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }
    case FieldType::sequence: return normalize_sequence(v, where);
    case FieldType::sequence_list: {
      if (!v.is_array() || v.empty()) bad(where + " must be a nonempty array of sequences");
      Json out = Json::array();
      for (std::size_t i = 0; i < v.size(); ++i) out.push_back(normalize_sequence(v[i], where + "[" + std::to_string(i) + "]"));
      return out;
    }
    case FieldType::matrix: return normalize_matrix(v, where);
    case FieldType::weights: return normalize_weights(v, where);
    case FieldType::cone: return normalize_cone(v, where);
    case FieldType::gamma: return normalize_gamma(v, where);
    case FieldType::rule:
      if (!v.is_string()) bad(where + " must be a rule name");
      parse_rule(v.get<std::string>());
      return v;
    case FieldType::function: return normalize_function(v, where);
    case FieldType::choice: {
      if (!v.is_string()) bad(where + " must be a string");
      const auto s = v.get<std::string>();
      if (std::find(f.choices.begin(), f.choices.end(), s) == f.choices.end()) {
        std::string list;
        for (const auto& c : f.choices) list += (list.empty() ? "" : ", ") + c;
        bad(where + ": '" + s + "' is not one of " + list);
      }
      return v;
    }
  }
  bad(where + ": unhandled field type");
}

}  // namespace

const std::vector<std::string>& experiment_kinds() {
  static const std::vector<std::string> kinds = [] {
    std::vector<std::string> k;
    for (const auto& [name, fields] : schemas()) k.push_back(name);
    return k;
  }();
  return kinds;
}

ExperimentDescriptor parse_descriptor(const Json& j) {
  if (!j.is_object()) bad("descriptor must be a JSON object");
  if (!j.contains("kind") || !j.at("kind").is_string()) bad("descriptor needs a string field 'kind'");
  const std::string kind = j.at("kind").get<std::string>();
  const auto it = schemas().find(kind);
  if (it == schemas().end()) bad("unknown experiment kind '" + kind + "'");

  std::vector<Field> fields = {opt("name", FieldType::string, kind), opt("resolution", FieldType::integer, 10),
                               opt("seed", FieldType::unsigned_integer, 1), opt("out", FieldType::string, nullptr)};
  fields.insert(fields.end(), it->second.begin(), it->second.end());

  for (const auto& [key, value] : j.items()) {
    if (key == "kind") continue;
    if (std::none_of(fields.begin(), fields.end(), [&](const Field& f) { return f.name == key; })) {
      bad("unknown field '" + key + "' in " + kind + " descriptor");
    }
  }

  ExperimentDescriptor d;
  d.kind = kind;
  d.params["kind"] = kind;
  for (const Field& f : fields) {
    const std::string where = kind + "." + f.name;
    if (j.contains(f.name)) {
      d.params[f.name] = normalize_field(f, j.at(f.name), where);
    } else if (f.required) {
      bad(where + " is required");
    } else if (f.name == "out") {
      d.params["out"] = d.params.at("name");
    } else {
      d.params[f.name] = normalize_field(f, f.fallback, where);
    }
  }
  const auto out = d.params.at("out").get<std::string>();
  if (out.empty() || out.find("..") != std::string::npos || out.front() == '/') {
    bad(kind + ".out must be a relative artifact stem without '..'");
  }
  const auto N = d.params.at("resolution").get<std::int64_t>();
  if (N < 0 || N > resolution_cap()) {
    bad(kind + ".resolution " + std::to_string(N) + " is outside [0, " + std::to_string(resolution_cap()) + "]");
  }
  return d;
}

Json serialize_descriptor(const ExperimentDescriptor& d) { return d.params; }

std::vector<ExperimentDescriptor> parse_descriptor_document(const Json& j) {
  std::vector<ExperimentDescriptor> out;
  if (j.is_object() && j.contains("experiments")) {
    reject_unknown(j, {"experiments"}, "descriptor document");
    const Json& list = j.at("experiments");
    if (!list.is_array() || list.empty()) bad("'experiments' must be a nonempty array");
    for (const auto& e : list) out.push_back(parse_descriptor(e));
  } else {
    out.push_back(parse_descriptor(j));
  }
  std::map<std::string, int> stems;
  for (const auto& d : out) {
    if (++stems[d.params.at("out").get<std::string>()] > 1) {
      bad("two experiments write the same artifact stem '" + d.params.at("out").get<std::string>() + "'");
    }
  }
  return out;
}

std::vector<ExperimentDescriptor> read_descriptor_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open descriptor file '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    bad("descriptor file '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_descriptor_document(j);
}

ParamSequence sequence_from_json(const Json& raw) {
  const Json j = normalize_sequence(raw, "sequence");
  if (j.contains("table")) {
    std::vector<double> v = j.at("table").get<std::vector<double>>();
    return table_sequence("table[" + std::to_string(v.size()) + "]", std::move(v));
  }
  const std::string f = j.at("formula").get<std::string>();
  if (f == "constant") return constant_sequence(j.at("value").get<double>());
  if (f == "ceil_half") return ceil_half_sequence();
  if (f == "floor_sqrt") return floor_sqrt_sequence();
  if (f == "inv_log2") return inv_log2_sequence();
  if (f == "harmonic") return harmonic_sequence();
  return geometric_sequence();
}

SummabilityMatrix matrix_from_json(const Json& raw) {
  const Json j = normalize_matrix(raw, "matrix");
  const std::string f = j.at("family").get<std::string>();
  if (f == "fejer") return make_matrix(MatrixFamily::cesaro, constant_sequence(1.0));
  if (f == "partial_sum" || f == "norlund_log") return make_matrix(matrix_families().at(f), ParamSequence{});
  return make_matrix(matrix_families().at(f), sequence_from_json(j.at(matrix_param_key(f))));
}

WeightFamily weights_from_json(const Json& raw) {
  const Json j = normalize_weights(raw, "weights");
  const std::string f = j.at("family").get<std::string>();
  const double scale = j.at("scale").get<double>();
  WeightFamily w = f == "ones"       ? WeightFamily::ones()
                   : f == "harmonic" ? WeightFamily::harmonic()
                   : f == "t3"       ? WeightFamily::t3(j.at("L").get<double>())
                                     : from_matrix(matrix_from_json(j.at("matrix")));
  if (!(scale > 0)) bad("weights.scale must be positive");
  return scale == 1.0 ? w : w.scaled(scale);
}

ConeSpec cone_from_json(const Json& raw) {
  const Json j = normalize_cone(raw, "cone");
  if (j.contains("kappa")) return ConeSpec::kappa(j.at("kappa").get<double>());
  return ConeSpec::omega(sequence_from_json(j.at("omega")));
}

GammaSpec gamma_from_json(const Json& raw) {
  const Json j = normalize_gamma(raw, "gamma");
  const std::string f = j.at("formula").get<std::string>();
  if (f == "half_order") return GammaSpec::half_order();
  if (f == "order_minus_one") return GammaSpec::order_minus_one();
  return GammaSpec::constant(j.at("value").get<std::int64_t>());
}

namespace {

// ---------------------------------------------------------------------------
// Experiment execution

struct Artifacts {
  std::filesystem::path dir;
  std::string stem;
  std::vector<std::filesystem::path> written;

  std::filesystem::path path(const std::string& suffix) const { return dir / (stem + suffix); }

  std::ofstream open(const std::string& suffix) {
    const auto p = path(suffix);
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) bad("cannot write artifact '" + p.string() + "'");
    written.push_back(p);
    return f;
  }
};

std::string fmt(double v) { return format_double(v); }

struct Context {
  const ExperimentDescriptor& d;
  int N;
  std::uint64_t seed;
  Artifacts art;
  Json summary = Json::object();
  int exit_code = kExitOk;
  std::string failure;

  const Json& p(const char* key) const { return d.params.at(key); }
  int integer(const char* key) const { return static_cast<int>(p(key).get<std::int64_t>()); }

  void fail(const std::string& message) {
    if (exit_code == kExitOk) failure = message;
    exit_code = kExitTolerance;
  }
};

void check_order_range(int lo, int hi, const std::string& kind) {
  if (lo < 0 || hi > 62 || lo > hi) bad(kind + ": need 0 <= order_lo <= order_hi <= 62");
}

void run_kernel_dump(Context& c) {
  const auto kind = c.p("kernel").get<std::string>();
  const auto param = c.p("parameter").get<std::uint64_t>();
  const KernelKind k = kind == "walsh"        ? KernelKind::walsh
                       : kind == "rademacher" ? KernelKind::rademacher
                       : kind == "dirichlet"  ? KernelKind::dirichlet
                                              : KernelKind::fejer_sum;
  const KernelGrid g = make_kernel(k, param, c.N);
  auto f = c.art.open(".csv");
  write_grid_csv(f, g.grid);
  c.summary["kernel"] = kernel_name(k);
  c.summary["parameter"] = param;
  c.summary["l1_norm"] = l1_norm(g.grid);
}

void run_decompose_check(Context& c) {
  const SummabilityMatrix T = matrix_from_json(c.p("matrix"));
  const double tol = c.p("tolerance").get<double>();
  if (c.N < 1) bad("decompose_check: resolution must be at least 1");
  const std::uint64_t top = std::uint64_t{1} << c.N;
  std::vector<std::uint64_t> ns;
  for (const auto& v : c.p("n_list")) {
    const auto n = v.get<std::int64_t>();
    if (n < 1 || static_cast<std::uint64_t>(n) >= top) {
      bad("decompose_check: n=" + std::to_string(n) + " is outside [1, 2^resolution)");
    }
    ns.push_back(static_cast<std::uint64_t>(n));
  }
  if (ns.empty()) {
    const int count = c.integer("count");
    if (count < 1) bad("decompose_check: count must be positive");
    std::mt19937_64 rng(c.seed);
    for (int i = 0; i < count; ++i) {
      ns.push_back(1 + static_cast<std::uint64_t>(unit_double(rng) * static_cast<double>(top - 1)));
    }
  }
  auto f = c.art.open(".csv");
  f << "n,order,abs_error,rel_error,weight_ratio_max,worst_index\n";
  double worst = 0;
  for (std::uint64_t n : ns) {
    const KernelDecomposition k = decompose(T, n, c.N);
    f << n << ',' << WalshIndex(n).order() << ',' << fmt(k.abs_error) << ',' << fmt(k.rel_error) << ','
      << fmt(k.weight_ratio_max) << ',' << k.worst_index << '\n';
    worst = std::max(worst, k.rel_error);
    if (!(k.rel_error <= tol)) {
      c.fail("decomposition identity V1+V2+V3 = w_n V_n fails for " + T.id() + " at n=" + std::to_string(n) +
             ", sample index " + std::to_string(k.worst_index) + ": relative error " + fmt(k.rel_error) +
             " > " + fmt(tol));
    }
  }
  c.summary["matrix"] = T.id();
  c.summary["count"] = ns.size();
  c.summary["max_rel_error"] = worst;
}

void run_ratio_scan(Context& c) {
  const WeightFamily omega = weights_from_json(c.p("weights"));
  const ConeSpec cone = cone_from_json(c.p("cone"));
  check_order_range(c.integer("order_lo"), c.integer("order_hi"), "ratio_scan");
  const auto ns = sample_indices(c.integer("order_lo"), c.integer("order_hi"), c.integer("per_order"), c.seed);
  const RatioScan scan = cone_ratio_scan(omega, cone, ns, c.p("candidate").get<double>());
  auto f = c.art.open(".csv");
  f << "order,count,min,max,mean,max_dev,top_dev\n";
  for (const auto& r : scan.rows) {
    f << r.order << ',' << r.count << ',' << fmt(r.min) << ',' << fmt(r.max) << ',' << fmt(r.mean) << ','
      << fmt(r.max_dev) << ',' << fmt(r.top_dev) << '\n';
  }
  c.summary["weights"] = omega.id();
  c.summary["cone"] = cone.id();
  c.summary["shrinking"] = scan.shrinking;
  if (!scan.rows.empty()) c.summary["last_max_dev"] = scan.rows.back().max_dev;
  if (!c.p("max_deviation").is_null()) {
    const double limit = c.p("max_deviation").get<double>();
    if (scan.rows.empty() || !(scan.rows.back().max_dev < limit)) {
      c.fail("cone ratio deviation at the top order " +
             (scan.rows.empty() ? std::string("(no rows)")
                                : std::to_string(scan.rows.back().order) + " is " + fmt(scan.rows.back().max_dev)) +
             ", not below " + fmt(limit));
    }
  }
}

Json certificate_json(const DivergenceResult& r) {
  Json j;
  j["refused"] = r.refused;
  j["gamma_grows"] = r.gamma_grows;
  j["c_empirical"] = r.c_empirical;
  j["sup_gamma_ratio"] = r.sup_gamma_ratio;
  j["ratio_floor"] = r.ratio_floor;
  j["top_scale_min"] = r.top_scale.min;
  j["top_scale_max"] = r.top_scale.max;
  j["log_bound"] = r.log_bound ? Json(*r.log_bound) : Json(nullptr);
  j["gamma_within_log_bound"] = r.gamma_within_log_bound;
  Json inf = Json::array();
  for (const auto& [m, g] : r.inf_gamma_by_order) inf.push_back(Json{{"order", m}, {"inf_gamma", g}});
  j["inf_gamma_by_order"] = inf;
  return j;
}

void run_divergence_search(Context& c) {
  const WeightFamily omega = weights_from_json(c.p("weights"));
  const ConeSpec cone = cone_from_json(c.p("cone"));
  const int lo = std::max(1, c.integer("order_lo"));
  check_order_range(lo, c.integer("order_hi"), "divergence_search");
  const auto ns = sample_indices(lo, c.integer("order_hi"), c.integer("per_order"), c.seed);
  const DivergenceResult r = divergence_search(omega, cone, ns);
  auto f = c.art.open(".csv");
  f << "n,order,variation_sum,omega_sum,gamma,LME_value\n";
  for (const auto& row : r.rows) {
    f << row.n << ',' << row.order << ',' << fmt(row.variation_sum) << ',' << fmt(row.omega_sum) << ','
      << row.gamma << ',' << fmt(row.lme) << '\n';
  }
  c.summary["weights"] = omega.id();
  c.summary["cone"] = cone.id();
  c.summary["refused"] = r.refused;
  c.summary["c_empirical"] = r.c_empirical;
  c.summary["certificate"] = certificate_json(r);
  const auto expect = c.p("expect").get<std::string>();
  if (expect == "accept" && r.refused) c.fail("divergence search refused " + omega.id() + " but acceptance was declared");
  if (expect == "refuse" && !r.refused) c.fail("divergence search accepted " + omega.id() + " but refusal was declared");
}

void run_omega_sum_sweep(Context& c) {
  const WeightFamily omega = weights_from_json(c.p("weights"));
  check_order_range(c.integer("order_lo"), c.integer("order_hi"), "omega_sum_sweep");
  const auto ns = sample_indices(c.integer("order_lo"), c.integer("order_hi"), c.integer("per_order"), c.seed);
  auto f = c.art.open(".csv");
  f << "n,order,omega_sum,variation_sum\n";
  double sup = 0;
  for (std::uint64_t n : ns) {
    const double s = omega_sum(omega, n);
    sup = std::max(sup, s);
    f << n << ',' << WalshIndex(n).order() << ',' << fmt(s) << ',' << fmt(variation_sum(omega, n)) << '\n';
  }
  c.summary["weights"] = omega.id();
  c.summary["max_omega_sum"] = sup;
}

void run_witness_sweep(Context& c) {
  const WeightFamily omega = weights_from_json(c.p("weights"));
  const GammaSpec gamma = gamma_from_json(c.p("gamma"));
  WitnessOptions opts;
  opts.rule = parse_rule(c.p("rule").get<std::string>());
  opts.c0 = c.p("c0").get<double>();
  opts.c_empirical = c.p("c_empirical").get<double>();
  if (c.p("etas").empty()) bad("witness_sweep: etas must be nonempty");
  auto f = c.art.open(".csv");
  f << "a,eta,l1_norm,e_a_measure,min_on_Ea,median_on_Ea,weak_ratio,lambda,c_empirical,closed_form_max_err,"
       "min_alignment\n";
  Json reports = Json::array();
  double previous = -1;
  for (const auto& e : c.p("etas")) {
    const auto eta = e.get<std::int64_t>();
    if (eta < 1 || eta > 30) bad("witness_sweep: eta=" + std::to_string(eta) + " is outside [1, 30]");
    const BlockParams bp = block_params(static_cast<int>(8 * eta + 1), gamma);
    const WitnessReport r = witness_eval(bp, omega, opts);
    f << r.a << ',' << r.eta << ',' << fmt(r.l1_norm) << ',' << fmt(r.e_a_measure) << ',' << fmt(r.min_on_Ea)
      << ',' << fmt(r.median_on_Ea) << ',' << fmt(r.weak_ratio) << ',' << fmt(r.lambda) << ','
      << fmt(r.c_empirical) << ',' << fmt(r.closed_form_max_err) << ',' << r.min_alignment << '\n';
    reports.push_back(Json::parse(to_json(r)));
    if (c.p("require_monotone").get<bool>() && r.weak_ratio < previous) {
      c.fail("weak ratio decreases at eta=" + std::to_string(r.eta) + ": " + fmt(r.weak_ratio) + " < " +
             fmt(previous));
    }
    previous = r.weak_ratio;
  }
  c.summary["weights"] = omega.id();
  c.summary["rule"] = c.p("rule");
  c.summary["reports"] = reports;
}

void run_prop2(Context& c) {
  const ParamSequence q = sequence_from_json(c.p("q"));
  const int k_max = c.integer("k_max");
  if (k_max < 1 || k_max > 26) bad("prop2: k_max must lie in [1, 26]");
  const Prop2Result r = prop2_search(norlund_dyadic_sequence(q, k_max));
  auto f = c.art.open(".csv");
  f << "m,n_m\n";
  for (const auto& [n, m] : r.pairs) f << m << ',' << n << '\n';
  c.summary["q"] = q.tag;
  c.summary["stopped"] = r.stopped;
  c.summary["stopped_at_m"] = r.stopped_at_m;
  c.summary["range_exhausted"] = r.range_exhausted;
  c.summary["certificate"] = r.certificate ? Json(*r.certificate) : Json(nullptr);
  c.summary["certificate_argmax"] = r.certificate_argmax;
  if (!c.p("certificate_max").is_null()) {
    const double limit = c.p("certificate_max").get<double>();
    if (!r.certificate || !(*r.certificate <= limit)) {
      c.fail("boundedness certificate sup A_n/a_n = " + (r.certificate ? fmt(*r.certificate) : std::string("none")) +
             " exceeds " + fmt(limit));
    }
  }
}

void run_vp_dichotomy(Context& c) {
  const int order_max = c.integer("order_max");
  if (order_max < 1 || order_max > 20) bad("vp_dichotomy: order_max must lie in [1, 20]");
  const std::uint64_t top = std::uint64_t{1} << order_max;
  auto f = c.art.open(".csv");
  f << "lambda,n,order,boundedness_index\n";
  std::ofstream tf;
  const bool tildes = c.p("tildes").get<bool>();
  if (tildes) {
    tf = c.art.open(".tildes.csv");
    tf << "lambda,n,s,tilde\n";
  }
  Json per = Json::array();
  bool first = true;
  for (const auto& spec : c.p("lambdas")) {
    const SummabilityMatrix T = make_matrix(MatrixFamily::vallee_poussin, sequence_from_json(spec));
    const std::string tag = T.parameter().tag;
    double sup = 0;
    std::map<int, double> max_by_order;
    for (std::uint64_t n = 1; n <= top; ++n) {
      const double b = boundedness_index(T, n);
      const int m = WalshIndex(n).order();
      sup = std::max(sup, b);
      max_by_order[m] = std::max(max_by_order[m], b);
      f << tag << ',' << n << ',' << m << ',' << fmt(b) << '\n';
      if (tildes) {
        const auto t = T.dyadic_tildes(n);
        for (std::size_t s = 0; s < t.size(); ++s) tf << tag << ',' << n << ',' << s << ',' << fmt(t[s]) << '\n';
      }
    }
    Json by_order = Json::array();
    for (const auto& [m, b] : max_by_order) by_order.push_back(Json{{"order", m}, {"max_index", b}});
    per.push_back(Json{{"lambda", tag}, {"sup_index", sup}, {"by_order", by_order}});
    if (first && !c.p("bounded_max").is_null() && !(sup <= c.p("bounded_max").get<double>())) {
      c.fail("boundedness index for lambda=" + tag + " reaches " + fmt(sup) + " > " +
             fmt(c.p("bounded_max").get<double>()));
    }
    first = false;
  }
  c.summary["lambdas"] = per;
}

DyadicGrid test_function(const Json& spec, int N, std::uint64_t seed) {
  const auto kind = spec.at("kind").get<std::string>();
  if (kind == "walsh") {
    const auto idx = spec.at("index").get<std::uint64_t>();
    if (N >= 64 || idx >= (std::uint64_t{1} << N)) bad("mean_convergence: walsh index exceeds 2^resolution");
    return walsh(idx, N);
  }
  if (kind == "random") {
    std::mt19937_64 rng(seed);
    return random_grid(N, rng);
  }
  const double cut = spec.at("cut").get<double>();
  DyadicGrid g(N);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = std::ldexp(static_cast<double>(i), -N) < cut ? 1.0 : 0.0;
  return g;
}

void run_mean_convergence(Context& c) {
  const SummabilityMatrix T = matrix_from_json(c.p("matrix"));
  const DyadicGrid fn = test_function(c.p("function"), c.N, c.seed);
  const std::uint64_t top = std::uint64_t{1} << c.N;
  auto f = c.art.open(".csv");
  f << "sweep,n,l1_error,max_error\n";
  auto emit = [&](const char* sweep, std::uint64_t n) {
    const DyadicGrid m = mean(T, fn, n);
    const DyadicGrid diff = m - fn;
    const double l1 = l1_norm(diff), mx = max_abs(diff);
    f << sweep << ',' << n << ',' << fmt(l1) << ',' << fmt(mx) << '\n';
    return l1;
  };
  double last = 0;
  for (int k = 0; k <= c.N; ++k) last = emit("dyadic", std::uint64_t{1} << k);
  std::mt19937_64 rng(c.seed ^ 0x9e3779b97f4a7c15ull);
  std::vector<std::uint64_t> picks;
  for (int i = 0; i < c.integer("n_random"); ++i) {
    picks.push_back(1 + static_cast<std::uint64_t>(unit_double(rng) * static_cast<double>(top)));
  }
  std::sort(picks.begin(), picks.end());
  for (std::uint64_t n : picks) emit("random", n);
  c.summary["matrix"] = T.id();
  c.summary["function"] = c.p("function");
  c.summary["final_dyadic_l1_error"] = last;
}

using Runner = void (*)(Context&);

const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r = {
      {"kernel_dump", run_kernel_dump},         {"decompose_check", run_decompose_check},
      {"ratio_scan", run_ratio_scan},           {"divergence_search", run_divergence_search},
      {"omega_sum_sweep", run_omega_sum_sweep}, {"witness_sweep", run_witness_sweep},
      {"prop2", run_prop2},                     {"vp_dichotomy", run_vp_dichotomy},
      {"mean_convergence", run_mean_convergence}};
  return r;
}

std::string one_line(const Json& summary) {
  std::string s;
  for (const auto& [k, v] : summary.items()) {
    if (v.is_array() || v.is_object()) continue;
    s += " " + k + "=" + (v.is_string() ? v.get<std::string>() : v.is_number_float() ? fmt(v.get<double>()) : v.dump());
  }
  return s;
}

}  // namespace

RunOutcome run_experiment(const ExperimentDescriptor& d, const RunContext& ctx) {
  const int N = ctx.resolution ? *ctx.resolution : static_cast<int>(d.params.at("resolution").get<std::int64_t>());
  check_resolution(N);
  const std::uint64_t seed = ctx.seed ? *ctx.seed : d.params.at("seed").get<std::uint64_t>();
  Context c{d, N, seed, Artifacts{ctx.out_dir, d.params.at("out").get<std::string>(), {}}, Json::object(), kExitOk, {}};
  runners().at(d.kind)(c);

  Json effective = serialize_descriptor(d);
  effective["resolution"] = N;
  effective["seed"] = seed;
  Json sidecar;
  sidecar["descriptor"] = effective;
  sidecar["prng"] = kPrngName;
  sidecar["seed"] = seed;
  sidecar["resolution"] = N;
  sidecar["status"] = c.exit_code == kExitOk ? "ok" : "tolerance_failure";
  if (!c.failure.empty()) sidecar["failure"] = c.failure;
  sidecar["summary"] = c.summary;
  {
    auto f = c.art.open(".json");
    f << sidecar.dump(2) << '\n';
  }

  RunOutcome out;
  out.exit_code = c.exit_code;
  out.artifacts = c.art.written;
  out.summary = d.name() + ": " + d.kind + (c.exit_code == kExitOk ? " ok" : " FAILED") + one_line(c.summary);
  if (!c.failure.empty()) out.summary += " | " + c.failure;
  return out;
}

int run_document(const std::vector<ExperimentDescriptor>& ds, const RunContext& ctx, std::ostream& out,
                 std::ostream& err) {
  int worst = kExitOk;
  for (const auto& d : ds) {
    try {
      const RunOutcome r = run_experiment(d, ctx);
      out << r.summary << '\n';
      worst = std::max(worst, r.exit_code);
    } catch (const ValidationError& e) {
      err << d.name() << ": validation error: " << e.what() << '\n';
      worst = std::max(worst, kExitValidation);
    } catch (const DomainError& e) {
      err << d.name() << ": domain error: " << e.what() << '\n';
      worst = std::max(worst, kExitValidation);
    }
  }
  return worst;
}

}  // namespace dyadic
