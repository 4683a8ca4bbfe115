#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gelfand/branch.hpp"
#include "gelfand/system.hpp"

namespace gelfand {

/// 17 significant digits, enough for an exact binary round trip.
std::string format_real(double x);
/// Parses a full token as a double; throws RejectedInput otherwise.
double parse_real(std::string_view s);

inline constexpr std::string_view kBranchHeader =
    "index,lambda,gamma,sigma,arclength,sup_u,sup_v,eta1,newton_iters,residual";

struct BranchRow {
  std::size_t index = 0;
  double lambda = 0.0;
  std::optional<double> gamma;  // system only
  std::optional<double> sigma;  // system only
  double arclength = 0.0;
  double sup_u = 0.0;
  std::optional<double> sup_v;  // system only
  std::optional<double> eta1;
  int newton_iters = 0;
  double residual = 0.0;
};

/// A branch as written to disk. `meta` lines become "# key=value" above the header.
struct BranchTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<BranchRow> rows;
  std::optional<std::size_t> fold;  // row position of the fold, echoed as "# fold_index="
};

BranchTable table_from_branch(const Branch& branch);
BranchTable table_from_ray(const Ray& ray);

std::string to_csv(const BranchTable& table);
/// Inverse of to_csv: to_csv(parse_csv(text)) == text for any text to_csv produced.
BranchTable parse_csv(std::string_view text);

/// lambda across, sup u up, the fold as a red dot.
std::string bifurcation_svg(const BranchTable& table, const std::string& title);

/// Writes through a sibling temp file and rename(2). Throws Io.
void write_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace gelfand
