#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gelfand/error.hpp"
#include "gelfand/io.hpp"

namespace gelfand {

enum class ProblemKind { Q, Navier, Dirichlet, System };
enum class OutputFormat { Csv, Json };

/// Effective settings of one command. Keys (config file and flags alike):
/// problem nl nl-g dim grid lambda lambdas sigma sigmas lambda-init ds steps
/// tol seed starts output format plot.
struct RunConfig {
  ProblemKind problem = ProblemKind::Q;
  std::string nl = "exp";
  std::string nl_g;  // second nonlinearity of the system; empty means nl
  int dim = 2;
  std::size_t grid = 256;
  std::optional<double> lambda;
  std::vector<double> lambdas;
  double sigma = 1.0;
  std::vector<double> sigmas;
  double lambda_init = 0.0;  // <= 0: 0.05 (divided by sigma for sigma > 1)
  double ds = 0.0;           // <= 0: lambda_init / 4
  int steps = 400;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::size_t starts = 20;
  std::string output;  // empty: stdout
  OutputFormat format = OutputFormat::Csv;
  std::string plot;
};

using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

const std::vector<std::string>& config_keys();

/// Flat key=value lines ('#' comments, blank lines ignored) or a flat JSON
/// object. Duplicate keys keep the last value.
ConfigEntries parse_config_text(std::string_view text);

/// Applies entries in order. Unknown keys and malformed values throw RejectedInput.
void apply_config(RunConfig& cfg, const ConfigEntries& entries);
void validate(const RunConfig& cfg);
/// The effective configuration as key=value pairs, in config_keys() order.
ConfigEntries echo(const RunConfig& cfg);

const char* to_string(ProblemKind p);

/// Branch CSV (or JSON rows) for the configured problem; fills `svg` when a plot is requested.
std::string cmd_branch(const RunConfig& cfg, std::string* svg = nullptr);
nlohmann::json cmd_lambda_star(const RunConfig& cfg);
nlohmann::json cmd_probe(const RunConfig& cfg);
nlohmann::json cmd_identities(const RunConfig& cfg);
nlohmann::json cmd_system_curve(const RunConfig& cfg);
nlohmann::json cmd_lemma(const RunConfig& cfg);

/// Exit codes: 0 success, 2 configuration error, 3 solver failure, 4 I/O error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitIo = 4;

int exit_code_for(ErrorKind kind);

/// The whole command line front end: `<verb> [--config file] [--key value ...]`.
int run_cli(int argc, const char* const* argv);

}  // namespace gelfand
