#include "gelfand/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <unistd.h>

#include "gelfand/error.hpp"

namespace gelfand {

std::string format_real(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_real(std::string_view s) {
  const std::string str(s);
  if (str.empty()) throw Error(ErrorKind::RejectedInput, "empty number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(str.c_str(), &end);
  if (end != str.c_str() + str.size()) throw Error(ErrorKind::RejectedInput, "not a number: '" + str + "'");
  if (errno == ERANGE && std::isinf(v)) throw Error(ErrorKind::RejectedInput, "out of range: '" + str + "'");
  return v;
}

BranchTable table_from_branch(const Branch& branch) {
  BranchTable t;
  t.rows.reserve(branch.points.size());
  for (std::size_t k = 0; k < branch.points.size(); ++k) {
    const BranchPoint& p = branch.points[k];
    BranchRow r;
    r.index = k;
    r.lambda = p.lambda;
    r.arclength = p.arclength;
    r.sup_u = p.sup_norm;
    r.eta1 = p.eta1;
    r.newton_iters = p.newton_iters;
    r.residual = p.residual;
    t.rows.push_back(r);
  }
  if (branch.fold) t.fold = branch.fold->index;
  return t;
}

BranchTable table_from_ray(const Ray& ray) {
  BranchTable t;
  t.rows.reserve(ray.points.size());
  for (std::size_t k = 0; k < ray.points.size(); ++k) {
    const SystemPoint& p = ray.points[k];
    BranchRow r;
    r.index = k;
    r.lambda = p.lambda;
    r.gamma = p.gamma;
    r.sigma = ray.sigma;
    r.arclength = p.arclength;
    r.sup_u = p.u.sup();
    r.sup_v = p.v.sup();
    r.newton_iters = p.newton_iters;
    r.residual = p.residual;
    t.rows.push_back(r);
  }
  t.fold = ray.fold;
  return t;
}

namespace {

std::string opt_real(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

std::optional<double> parse_opt(std::string_view s) {
  if (s.empty()) return std::nullopt;
  return parse_real(s);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::size_t parse_index(std::string_view s) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw Error(ErrorKind::RejectedInput, "not an index: '" + std::string(s) + "'");
  }
  return static_cast<std::size_t>(std::stoull(std::string(s)));
}

}  // namespace

std::string to_csv(const BranchTable& table) {
  std::string out;
  for (const auto& [k, v] : table.meta) out += "# " + k + "=" + v + "\n";
  if (table.fold) out += "# fold_index=" + std::to_string(*table.fold) + "\n";
  out += kBranchHeader;
  out += '\n';
  for (const BranchRow& r : table.rows) {
    out += std::to_string(r.index) + ',' + format_real(r.lambda) + ',' + opt_real(r.gamma) + ',' +
           opt_real(r.sigma) + ',' + format_real(r.arclength) + ',' + format_real(r.sup_u) + ',' +
           opt_real(r.sup_v) + ',' + opt_real(r.eta1) + ',' + std::to_string(r.newton_iters) + ',' +
           format_real(r.residual) + '\n';
  }
  return out;
}

BranchTable parse_csv(std::string_view text) {
  BranchTable t;
  bool header = false;
  std::size_t line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    if (line.empty()) continue;
    if (!header && line.substr(0, 2) == "# ") {
      const std::string_view body = line.substr(2);
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::RejectedInput, "line " + std::to_string(line_no) + ": comment without '='");
      }
      const std::string key(body.substr(0, eq));
      const std::string value(body.substr(eq + 1));
      if (key == "fold_index") {
        t.fold = parse_index(value);
      } else {
        t.meta.emplace_back(key, value);
      }
      continue;
    }
    if (!header) {
      if (line != kBranchHeader) throw Error(ErrorKind::RejectedInput, "unexpected CSV header");
      header = true;
      continue;
    }
    const auto f = split(line, ',');
    if (f.size() != 10) {
      throw Error(ErrorKind::RejectedInput, "line " + std::to_string(line_no) + ": expected 10 fields");
    }
    BranchRow r;
    r.index = parse_index(f[0]);
    r.lambda = parse_real(f[1]);
    r.gamma = parse_opt(f[2]);
    r.sigma = parse_opt(f[3]);
    r.arclength = parse_real(f[4]);
    r.sup_u = parse_real(f[5]);
    r.sup_v = parse_opt(f[6]);
    r.eta1 = parse_opt(f[7]);
    r.newton_iters = static_cast<int>(parse_index(f[8]));
    r.residual = parse_real(f[9]);
    t.rows.push_back(r);
  }
  if (!header) throw Error(ErrorKind::RejectedInput, "missing CSV header");
  return t;
}

namespace {

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x, int digits = 2) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

// Round tick step: 1, 2 or 5 times a power of ten.
double tick_step(double span) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) return m * mag;
  }
  return 10.0 * mag;
}

std::string label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

}  // namespace

std::string bifurcation_svg(const BranchTable& table, const std::string& title) {
  constexpr double W = 640, H = 440, L = 70, R = 20, T = 40, B = 50;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const BranchRow& r : table.rows) {
    if (!std::isfinite(r.lambda) || !std::isfinite(r.sup_u)) continue;
    x0 = std::min(x0, r.lambda);
    x1 = std::max(x1, r.lambda);
    y0 = std::min(y0, r.sup_u);
    y1 = std::max(y1, r.sup_u);
  }
  if (!(x0 <= x1)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  x0 = std::min(x0, 0.0);
  y0 = std::min(y0, 0.0);
  if (x1 == x0) x1 = x0 + 1.0;
  if (y1 == y0) y1 = y0 + 1.0;
  const double dx = tick_step(x1 - x0), dy = tick_step(y1 - y0);
  x1 = std::ceil(x1 / dx) * dx;
  y1 = std::ceil(y1 / dy) * dy;
  auto px = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(title)
    << "</text>\n";
  s << "<g stroke=\"#999\" stroke-width=\"1\">\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  s << "</g>\n<g fill=\"#333\">\n";
  for (double x = x0; x <= x1 + 1e-9 * dx; x += dx) {
    s << "<text x=\"" << fixed(px(x)) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << label(x)
      << "</text>\n";
  }
  for (double y = y0; y <= y1 + 1e-9 * dy; y += dy) {
    s << "<text x=\"" << L - 6 << "\" y=\"" << fixed(py(y) + 4) << "\" text-anchor=\"end\">" << label(y)
      << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">lambda</text>\n";
  s << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (T + H - B) / 2 << ")\">sup u</text>\n";
  s << "</g>\n";
  s << "<polyline fill=\"none\" stroke=\"#1f5fa8\" stroke-width=\"1.5\" points=\"";
  bool first = true;
  for (const BranchRow& r : table.rows) {
    if (!std::isfinite(r.lambda) || !std::isfinite(r.sup_u)) continue;
    s << (first ? "" : " ") << fixed(px(r.lambda)) << ',' << fixed(py(r.sup_u));
    first = false;
  }
  s << "\"/>\n";
  if (table.fold && *table.fold < table.rows.size()) {
    const BranchRow& f = table.rows[*table.fold];
    s << "<circle class=\"fold\" cx=\"" << fixed(px(f.lambda)) << "\" cy=\"" << fixed(py(f.sup_u))
      << "\" r=\"4\" fill=\"#c0392b\"/>\n";
    s << "<text x=\"" << fixed(px(f.lambda) - 6) << "\" y=\"" << fixed(py(f.sup_u) - 8)
      << "\" text-anchor=\"end\" fill=\"#c0392b\">lambda* = " << label(f.lambda) << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorKind::Io, "write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot rename onto '" + path + "'");
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::Io, "read of '" + path + "' failed");
  return s.str();
}

}  // namespace gelfand
