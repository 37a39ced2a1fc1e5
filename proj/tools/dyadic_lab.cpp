#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dyadic/core.hpp"
#include "dyadic/martingale.hpp"
#include "dyadic/runner.hpp"

using dyadic::Json;

namespace {

// A flag value that is either a JSON document or a bare tag.
Json flag_json(const std::string& text) {
  if (!text.empty() && (text.front() == '{' || text.front() == '[')) {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw dyadic::ValidationError("flag value is not valid JSON: " + std::string(e.what()));
    }
  }
  return Json(text);
}

struct Globals {
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<int> cap;
};

dyadic::RunContext context(const Globals& g) {
  dyadic::RunContext ctx;
  ctx.out_dir = g.out_dir;
  ctx.resolution = g.resolution;
  ctx.seed = g.seed;
  return ctx;
}

int run_single(const Json& descriptor, const Globals& g) {
  const auto d = dyadic::parse_descriptor(descriptor);
  return dyadic::run_document({d}, context(g), std::cout, std::cerr);
}

struct WeaknormArgs {
  std::string input;
  std::string op = "doob";
  std::uint64_t n = 1;
  std::string weights = "ones";
  double tolerance = 1e-12;
};

int run_weaknorm(const WeaknormArgs& a, const Globals& g) {
  dyadic::DyadicGrid f;
  if (!a.input.empty()) {
    f = dyadic::read_grid_csv(a.input);
  } else {
    const int N = g.resolution.value_or(12);
    dyadic::check_resolution(N);
    std::mt19937_64 rng(g.seed.value_or(1));
    f = dyadic::random_grid(N, rng, 0.0, 1.0);
  }
  f.check_finite();
  const double f_l1 = dyadic::l1_norm(f);
  dyadic::DyadicGrid out;
  std::string sidecar;
  if (a.op == "doob") {
    out = dyadic::doob_max(f);
  } else {
    const auto omega = dyadic::weights_from_json(flag_json(a.weights));
    dyadic::TransformResult r = a.op == "mtransform"
                                    ? dyadic::mtransform(f, a.n, omega)
                                    : dyadic::carleson_max(f, omega, dyadic::IndexSet::range(1, a.n));
    sidecar = dyadic::sidecar_json(r);
    out = std::move(r.grid);
  }
  const dyadic::Norms nm = dyadic::norms(out);
  Json report;
  report["operator"] = a.op;
  report["resolution"] = f.resolution();
  report["f_l1"] = f_l1;
  report["weak_l1"] = nm.weak_l1;
  report["ratio"] = f_l1 > 0 ? nm.weak_l1 / f_l1 : 0.0;
  report["prng"] = dyadic::kPrngName;
  report["seed"] = g.seed.value_or(1);
  std::filesystem::create_directories(g.out_dir);
  const auto stem = std::filesystem::path(g.out_dir) / ("weaknorm_" + a.op);
  dyadic::write_grid_csv(stem.string() + ".csv", out);
  {
    std::ofstream j(stem.string() + ".json", std::ios::binary);
    j << (sidecar.empty() ? report.dump(2) : sidecar) << '\n';
  }
  std::cout << report.dump() << '\n';
  // Doob's inequality is a declared bound: lambda |{E* f >= lambda}| <= ||f||_1.
  if (a.op == "doob" && nm.weak_l1 > f_l1 + a.tolerance) {
    std::cerr << "weak-(1,1) bound fails: " << dyadic::format_double(nm.weak_l1) << " > "
              << dyadic::format_double(f_l1) << '\n';
    return dyadic::kExitTolerance;
  }
  return dyadic::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dyadic martingale, Walsh summability and divergence-witness experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--resolution", g.resolution, "Grid resolution N (overrides descriptors)");
  app.add_option("--seed", g.seed, "PRNG seed (overrides descriptors)");
  app.add_option("--out-dir", g.out_dir, "Directory for CSV/JSON artifacts");
  app.add_option("--cap", g.cap, "Resolution cap override (default from DYADIC_RESOLUTION_CAP or 26)");

  std::string descriptor_path;
  auto* run = app.add_subcommand("run", "Run an experiment descriptor file");
  run->add_option("descriptor", descriptor_path, "Descriptor JSON file")->required();

  std::string kernel_kind = "dirichlet";
  std::uint64_t kernel_n = 3;
  auto* kernel = app.add_subcommand("kernel", "Dump a Walsh, Rademacher, Dirichlet or Fejer-sum kernel");
  kernel->add_option("--kind", kernel_kind, "walsh | rademacher | dirichlet | fejer_sum");
  kernel->add_option("--n", kernel_n, "Kernel parameter");

  std::string dec_matrix;
  std::vector<std::int64_t> dec_ns;
  int dec_count = 20;
  double dec_tol = 1e-8;
  auto* dec = app.add_subcommand("decompose-check", "Check the three-part kernel decomposition");
  dec->add_option("--matrix", dec_matrix, "Matrix family tag or JSON object")->required();
  dec->add_option("--n", dec_ns, "Indices to check (default: random)");
  dec->add_option("--count", dec_count, "Number of random indices");
  dec->add_option("--tolerance", dec_tol, "Relative error tolerance");

  std::string rs_weights, rs_cone = R"({"kappa":0.5})";
  int rs_lo = 4, rs_hi = 20, rs_per = 8;
  std::optional<double> rs_max;
  auto* rs = app.add_subcommand("ratio-scan", "Scan Omega_k/Omega_{k-1} over a cone");
  rs->add_option("--weights", rs_weights, "Weight family tag or JSON object")->required();
  rs->add_option("--cone", rs_cone, "Cone JSON");
  rs->add_option("--order-lo", rs_lo);
  rs->add_option("--order-hi", rs_hi);
  rs->add_option("--per-order", rs_per);
  rs->add_option("--max-deviation", rs_max, "Declared bound on the top-order deviation");

  std::string ds_weights, ds_cone = R"({"kappa":0.5})", ds_expect = "any";
  int ds_lo = 2, ds_hi = 20, ds_per = 8;
  auto* ds = app.add_subcommand("divergence-search", "Search for a divergence sequence gamma(n)");
  ds->add_option("--weights", ds_weights, "Weight family tag or JSON object")->required();
  ds->add_option("--cone", ds_cone, "Cone JSON");
  ds->add_option("--order-lo", ds_lo);
  ds->add_option("--order-hi", ds_hi);
  ds->add_option("--per-order", ds_per);
  ds->add_option("--expect", ds_expect, "any | accept | refuse");

  std::vector<std::int64_t> w_etas{4, 6, 8, 10};
  std::string w_rule = "literal", w_weights = "ones", w_gamma = "half_order";
  bool w_monotone = false;
  auto* wit = app.add_subcommand("witness", "Evaluate the block witness polynomials");
  wit->add_option("--eta", w_etas, "Block lengths");
  wit->add_option("--rule", w_rule, "literal | coarse_pair");
  wit->add_option("--weights", w_weights, "Weight family tag or JSON object");
  wit->add_option("--gamma", w_gamma, "half_order | order_minus_one | JSON");
  wit->add_flag("--require-monotone", w_monotone, "Fail unless weak ratios are nondecreasing");

  std::string p_q;
  int p_kmax = 20;
  std::optional<double> p_cert;
  auto* prop2 = app.add_subcommand("prop2", "Greedy (n_m, gamma_m) search for a Norlund sequence");
  prop2->add_option("--q", p_q, "Sequence tag or JSON object")->required();
  prop2->add_option("--k-max", p_kmax);
  prop2->add_option("--certificate-max", p_cert, "Declared bound on sup A_n/a_n");

  WeaknormArgs wn;
  auto* weak = app.add_subcommand("weaknorm", "Weak-L1 quotient of a maximal operator on a grid");
  weak->add_option("--input", wn.input, "Grid CSV (default: seeded random nonnegative grid)");
  weak->add_option("--operator", wn.op, "doob | mtransform | carleson")
      ->check(CLI::IsMember({"doob", "mtransform", "carleson"}));
  weak->add_option("--n", wn.n, "Index n (mtransform) or largest index (carleson)");
  weak->add_option("--weights", wn.weights, "Weight family tag or JSON object");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dyadic::kExitValidation;
  }

  try {
    if (g.cap) dyadic::set_resolution_cap(*g.cap);
    if (*run) {
      const auto docs = dyadic::read_descriptor_file(descriptor_path);
      return dyadic::run_document(docs, context(g), std::cout, std::cerr);
    }
    if (*kernel) return run_single(Json{{"kind", "kernel_dump"}, {"kernel", kernel_kind}, {"parameter", kernel_n}}, g);
    if (*dec) {
      return run_single(Json{{"kind", "decompose_check"},
                             {"matrix", flag_json(dec_matrix)},
                             {"n_list", dec_ns},
                             {"count", dec_count},
                             {"tolerance", dec_tol}},
                        g);
    }
    if (*rs) {
      Json d{{"kind", "ratio_scan"},     {"weights", flag_json(rs_weights)}, {"cone", flag_json(rs_cone)},
             {"order_lo", rs_lo},        {"order_hi", rs_hi},                {"per_order", rs_per}};
      if (rs_max) d["max_deviation"] = *rs_max;
      return run_single(d, g);
    }
    if (*ds) {
      return run_single(Json{{"kind", "divergence_search"},
                             {"weights", flag_json(ds_weights)},
                             {"cone", flag_json(ds_cone)},
                             {"order_lo", ds_lo},
                             {"order_hi", ds_hi},
                             {"per_order", ds_per},
                             {"expect", ds_expect}},
                        g);
    }
    if (*wit) {
      return run_single(Json{{"kind", "witness_sweep"},
                             {"weights", flag_json(w_weights)},
                             {"gamma", flag_json(w_gamma)},
                             {"etas", w_etas},
                             {"rule", w_rule},
                             {"require_monotone", w_monotone}},
                        g);
    }
    if (*prop2) {
      Json d{{"kind", "prop2"}, {"q", flag_json(p_q)}, {"k_max", p_kmax}};
      if (p_cert) d["certificate_max"] = *p_cert;
      return run_single(d, g);
    }
    if (*weak) return run_weaknorm(wn, g);
  } catch (const dyadic::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return dyadic::kExitValidation;
  } catch (const dyadic::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return dyadic::kExitValidation;
  }
  return dyadic::kExitValidation;
}
