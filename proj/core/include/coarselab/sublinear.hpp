#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace coarselab {

inline constexpr double kTol = 1e-9;

// Raised when a scan cannot decide (tail not settled, too few samples, ...).
class Inconclusive : public std::runtime_error {
 public:
  Inconclusive(const std::string& what, std::vector<std::pair<double, double>> profile = {})
      : std::runtime_error(what), profile_(std::move(profile)) {}
  const std::vector<std::pair<double, double>>& profile() const { return profile_; }

 private:
  std::vector<std::pair<double, double>> profile_;
};

class NotSublinear : public std::invalid_argument {
 public:
  NotSublinear(const std::string& what, double witness_t)
      : std::invalid_argument(what), witness_t_(witness_t) {}
  double witness_t() const { return witness_t_; }

 private:
  double witness_t_;
};

// Immutable; copies share the underlying callable.
class SublinearFn {
 public:
  using Eval = std::function<double(double)>;

  SublinearFn() : SublinearFn("1", [](double) { return 1.0; }) {}
  SublinearFn(std::string tag, Eval f, double grid_cap = 1e6)
      : tag_(std::move(tag)), f_(std::make_shared<const Eval>(std::move(f))), grid_cap_(grid_cap) {}

  // throws std::domain_error for t < 0
  double operator()(double t) const;
  const std::string& tag() const { return tag_; }
  double grid_cap() const { return grid_cap_; }
  bool is_constant() const { return tag_ == "1"; }

 private:
  std::string tag_;
  std::shared_ptr<const Eval> f_;
  double grid_cap_;
};

double evaluate(const SublinearFn& f, double t);

// {0} plus n-1 log-spaced points from 1e-3 to cap.
std::vector<double> default_grid(double cap = 1e6, std::size_t n = 512);

struct Concavified {
  SublinearFn fn;
  double C = 1;  // max of kbar/f on the grid
  double C_at = 0;
  std::vector<double> hull_t;  // hull vertices
};

// Discrete upper concave hull. Between adjacent grid points that are both
// hull vertices the original function is kept, across bridges the chord.
Concavified concavify(const std::string& tag, const SublinearFn::Eval& raw,
                      const std::vector<double>& grid);

struct ScalingCheck {
  bool ok = true;
  double worst_ratio = 0;  // max f(lambda t) / (lambda f(t))
  double worst_t = 0;
};
ScalingCheck check_scaling(const SublinearFn& f, double lambda, const std::vector<double>& grid);

// D <= r / (2 f(r))
bool small_compared(double D, double r, const SublinearFn& f);
// least integer r with small_compared(D, r, f); throws Inconclusive past cap
double least_small_radius(double D, const SublinearFn& f, double cap = 1e13);

struct EstimationConstant {
  double c = 0;
  double m = 1;
  double witness_t = 0;
  double tail_bound = 1;  // 1 + c, valid past tail_from
  double tail_from = 0;   // first grid t with f(t) <= t
};
EstimationConstant estimation_constant(const SublinearFn& f, double c);

struct ShapeReport {
  bool at_least_one = true;
  bool monotone = true;
  bool midpoint_concave = true;
  double decay_T = 0;  // grid point past which f(t)/t <= decay_eps
  double decay_eps = 0.05;
  std::string first_violation;
};
ShapeReport check_shape(const SublinearFn& f, const std::vector<double>& grid);

// "1", "log", "log^p", "sqrt", "t^a" (0<a<1). "linear" and anything not
// sublinear is rejected.
SublinearFn kappa_from_tag(const std::string& tag);
std::vector<std::string> registered_tags();

// Two-column text file (t value), linearly interpolated then concavified.
SublinearFn kappa_from_table(const std::string& path);

}  // namespace coarselab
