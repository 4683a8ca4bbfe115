#include "gelfand/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <iomanip>

#include "gelfand/error.hpp"

namespace gelfand {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double parse_real(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw Error(ErrorKind::RejectedInput, "cannot parse " + std::string(what) + " from '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::RejectedInput, "cannot parse " + std::string(what) + " from '" + s + "'");
  }
  return value;
}

std::string format_parameter(double p) {
  std::ostringstream os;
  os << std::setprecision(17) << p;
  return os.str();
}

}  // namespace

Nonlinearity Nonlinearity::exponential() {
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::Exp;
  nl.class_ = NonlinearityClass::R;
  nl.log_convex_ = true;
  return nl;
}

Nonlinearity Nonlinearity::power(double p) {
  if (!(p > 1.0)) {
    throw Error(ErrorKind::RejectedInput, "power nonlinearity needs p > 1");
  }
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::PowerR;
  nl.class_ = NonlinearityClass::R;
  nl.log_convex_ = false;
  nl.p_ = p;
  return nl;
}

Nonlinearity Nonlinearity::mems(double p) {
  if (!(p > 0.0)) {
    throw Error(ErrorKind::RejectedInput, "mems nonlinearity needs p > 0");
  }
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::MemsS;
  nl.class_ = NonlinearityClass::S;
  nl.log_convex_ = true;
  nl.p_ = p;
  return nl;
}

Nonlinearity Nonlinearity::custom(std::string name, NonlinearityClass cls, bool log_convex,
                                  NonlinearityEvaluators ev) {
  if (!ev.f || !ev.fprime || !ev.fsecond || !ev.antiderivative) {
    throw Error(ErrorKind::RejectedInput, "custom nonlinearity needs f, f', f'' and F");
  }
  Nonlinearity nl;
  nl.kind_ = NonlinearityKind::Custom;
  nl.class_ = cls;
  nl.log_convex_ = log_convex;
  nl.name_ = std::move(name);
  nl.custom_ = std::move(ev);
  return nl;
}

Nonlinearity Nonlinearity::parse(std::string_view spec) {
  if (spec == "exp") {
    return exponential();
  }
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw Error(ErrorKind::RejectedInput, "unknown nonlinearity '" + std::string(spec) + "'");
  }
  const auto head = spec.substr(0, colon);
  const auto tail = spec.substr(colon + 1);
  if (tail.substr(0, 2) != "p=") {
    throw Error(ErrorKind::RejectedInput, "expected p=<real> in '" + std::string(spec) + "'");
  }
  const double p = parse_real(tail.substr(2), "p");
  if (head == "power") {
    return power(p);
  }
  if (head == "mems") {
    return mems(p);
  }
  throw Error(ErrorKind::RejectedInput, "unknown nonlinearity '" + std::string(spec) + "'");
}

double Nonlinearity::domain_max() const noexcept {
  return class_ == NonlinearityClass::S ? 1.0 : kInf;
}

std::string Nonlinearity::spec() const {
  switch (kind_) {
    case NonlinearityKind::Exp: return "exp";
    case NonlinearityKind::PowerR: return "power:p=" + format_parameter(p_);
    case NonlinearityKind::MemsS: return "mems:p=" + format_parameter(p_);
    case NonlinearityKind::Custom: return name_;
  }
  return name_;
}

double Nonlinearity::f(double t) const {
  switch (kind_) {
    case NonlinearityKind::Exp:
      return std::exp(t);
    case NonlinearityKind::PowerR:
      if (t >= 0.0) return std::pow(1.0 + t, p_);
      return 1.0 + p_ * t + 0.5 * p_ * (p_ - 1.0) * t * t;
    case NonlinearityKind::MemsS:
      if (t >= 1.0) return kInf;
      return std::pow(1.0 - t, -p_);
    case NonlinearityKind::Custom:
      return custom_.f(t);
  }
  return 0.0;
}

double Nonlinearity::fprime(double t) const {
  switch (kind_) {
    case NonlinearityKind::Exp:
      return std::exp(t);
    case NonlinearityKind::PowerR:
      if (t >= 0.0) return p_ * std::pow(1.0 + t, p_ - 1.0);
      return p_ + p_ * (p_ - 1.0) * t;
    case NonlinearityKind::MemsS:
      if (t >= 1.0) return kInf;
      return p_ * std::pow(1.0 - t, -p_ - 1.0);
    case NonlinearityKind::Custom:
      return custom_.fprime(t);
  }
  return 0.0;
}

double Nonlinearity::fsecond(double t) const {
  switch (kind_) {
    case NonlinearityKind::Exp:
      return std::exp(t);
    case NonlinearityKind::PowerR:
      if (t >= 0.0) return p_ * (p_ - 1.0) * std::pow(1.0 + t, p_ - 2.0);
      return p_ * (p_ - 1.0);
    case NonlinearityKind::MemsS:
      if (t >= 1.0) return kInf;
      return p_ * (p_ + 1.0) * std::pow(1.0 - t, -p_ - 2.0);
    case NonlinearityKind::Custom:
      return custom_.fsecond(t);
  }
  return 0.0;
}

double Nonlinearity::antiderivative(double t) const {
  switch (kind_) {
    case NonlinearityKind::Exp:
      return std::expm1(t);
    case NonlinearityKind::PowerR:
      if (t >= 0.0) return std::expm1((p_ + 1.0) * std::log1p(t)) / (p_ + 1.0);
      return t + 0.5 * p_ * t * t + p_ * (p_ - 1.0) * t * t * t / 6.0;
    case NonlinearityKind::MemsS: {
      if (t >= 1.0) return kInf;
      const double log1m = std::log1p(-t);
      if (p_ == 1.0) return -log1m;
      // ((1-t)^(1-p) - 1) / (p - 1)
      return std::expm1((1.0 - p_) * log1m) / (p_ - 1.0);
    }
    case NonlinearityKind::Custom:
      return custom_.antiderivative(t);
  }
  return 0.0;
}

double Nonlinearity::log_f(double t) const {
  switch (kind_) {
    case NonlinearityKind::Exp:
      return t;
    case NonlinearityKind::PowerR:
      if (t >= 0.0) return p_ * std::log1p(t);
      return std::log(f(t));
    case NonlinearityKind::MemsS:
      if (t >= 1.0) return kInf;
      return -p_ * std::log1p(-t);
    case NonlinearityKind::Custom:
      return custom_.log_f ? custom_.log_f(t) : std::log(custom_.f(t));
  }
  return 0.0;
}

double Nonlinearity::checked_f(double t) const {
  if (!in_domain(t) || std::isnan(t)) {
    throw Error(ErrorKind::SingularEvaluation,
                "f evaluated at t = " + format_parameter(t) + " outside its domain");
  }
  return f(t);
}

}  // namespace gelfand
