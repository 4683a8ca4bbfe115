#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace gelfand {

enum class NonlinearityKind { Exp, PowerR, MemsS, Custom };

/// (R): positive on all of R, superlinear at infinity. (S): positive on (-inf, 1), f(1-) = inf.
enum class NonlinearityClass { R, S };

/// Caller-supplied evaluators for a custom nonlinearity. `log_f` is optional.
struct NonlinearityEvaluators {
  std::function<double(double)> f;
  std::function<double(double)> fprime;
  std::function<double(double)> fsecond;
  std::function<double(double)> antiderivative;
  std::function<double(double)> log_f;
};

/// Smooth, increasing, convex nonlinearity with f(0) = 1 and its antiderivative F(t) = int_0^t f.
///
/// Built-ins are evaluated through a switch so they stay cheap inside the
/// solver loops. Evaluation at or past the pole of a class-S member returns
/// +inf; callers that need a hard failure use `checked_f`.
class Nonlinearity {
public:
  static Nonlinearity exponential();
  /// (1+t)^p for t >= 0, continued below zero by its second-order Taylor polynomial.
  static Nonlinearity power(double p);
  /// (1-t)^(-p), the MEMS-type nonlinearity.
  static Nonlinearity mems(double p);
  static Nonlinearity custom(std::string name, NonlinearityClass cls, bool log_convex,
                             NonlinearityEvaluators ev);

  /// Parses "exp", "power:p=<real>" or "mems:p=<real>".
  static Nonlinearity parse(std::string_view spec);

  double f(double t) const;
  double fprime(double t) const;
  double fsecond(double t) const;
  double antiderivative(double t) const;
  double log_f(double t) const;

  /// f(t), throwing SingularEvaluation outside the open domain.
  double checked_f(double t) const;

  NonlinearityKind kind() const noexcept { return kind_; }
  NonlinearityClass class_tag() const noexcept { return class_; }
  bool log_convex() const noexcept { return log_convex_; }
  double parameter() const noexcept { return p_; }
  /// Supremum of the domain: +inf for class R, 1 for class S.
  double domain_max() const noexcept;
  bool in_domain(double t) const noexcept { return t < domain_max(); }
  /// Round-trippable spec string ("exp", "power:p=3", ...); the name for custom members.
  std::string spec() const;

private:
  Nonlinearity() = default;

  NonlinearityKind kind_ = NonlinearityKind::Exp;
  NonlinearityClass class_ = NonlinearityClass::R;
  bool log_convex_ = true;
  double p_ = 0.0;
  std::string name_;
  NonlinearityEvaluators custom_;
};

}  // namespace gelfand
