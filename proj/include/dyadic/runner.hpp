#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dyadic/summability.hpp"
#include "dyadic/weight_analysis.hpp"
#include "dyadic/weights.hpp"
#include "dyadic/witness.hpp"

namespace dyadic {

using Json = nlohmann::ordered_json;

// Exit codes of run().
constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitTolerance = 2;

// Descriptor fields common to every kind.
//   kind, name (default = kind), resolution (default 10), seed (default 1),
//   out (artifact stem relative to the output directory, default = name).
// Kind-specific fields are listed in README.md. Parsing fills every default,
// normalises shorthand forms and rejects unknown fields, so
// parse(serialize(parse(j))) == parse(j).
struct ExperimentDescriptor {
  std::string kind;
  Json params;  // every field, including kind, in schema order

  std::string name() const { return params.at("name").get<std::string>(); }
};

const std::vector<std::string>& experiment_kinds();

ExperimentDescriptor parse_descriptor(const Json& j);
Json serialize_descriptor(const ExperimentDescriptor& d);
// A single descriptor object or {"experiments": [...]}.
std::vector<ExperimentDescriptor> parse_descriptor_document(const Json& j);
std::vector<ExperimentDescriptor> read_descriptor_file(const std::string& path);

// Builders for the parameter objects used in descriptors.
//   sequence: "ceil_half" | {"formula": tag[, "value": c]} | {"table": [...]}
//   matrix:   "fejer" | {"family": f[, "alpha" | "lambda" | "q": sequence]}
//   weights:  "ones" | {"family": "ones"|"harmonic"|"t3"|"from_matrix",
//             "L": base, "matrix": matrix, "scale": c}
//   cone:     {"kappa": k} | {"omega": sequence}
//   gamma:    "half_order" | "order_minus_one" | {"formula": "constant", "value": c}
ParamSequence sequence_from_json(const Json& j);
SummabilityMatrix matrix_from_json(const Json& j);
WeightFamily weights_from_json(const Json& j);
ConeSpec cone_from_json(const Json& j);
GammaSpec gamma_from_json(const Json& j);

struct RunContext {
  std::filesystem::path out_dir = ".";
  // Overrides for the descriptor's resolution and seed (global CLI flags).
  std::optional<int> resolution;
  std::optional<std::uint64_t> seed;
};

struct RunOutcome {
  int exit_code = kExitOk;
  std::string summary;  // one line
  std::vector<std::filesystem::path> artifacts;
};

// Runs one experiment and writes its artifacts. ValidationError and
// DomainError propagate; tolerance failures are reported through the
// outcome with exit code 2.
RunOutcome run_experiment(const ExperimentDescriptor& d, const RunContext& ctx);

// Runs every experiment of a document in order, printing one summary line
// per experiment to `out` and errors to `err`. Returns the worst exit code.
int run_document(const std::vector<ExperimentDescriptor>& ds, const RunContext& ctx, std::ostream& out,
                 std::ostream& err);

// Name of the PRNG recorded in sidecars.
constexpr const char* kPrngName = "mt19937_64";

}  // namespace dyadic
