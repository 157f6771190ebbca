#pragma once

#include <optional>
#include <string>

#include "massart/core.hpp"
#include "massart/synth.hpp"

namespace massart {

enum class VerifyMode { Surrogate, SurrogatePlusThreshold };

VerifyMode parse_verify_mode(const std::string& name);
std::string verify_mode_name(VerifyMode mode);

// G(w) = E[phi(y <w, x>)] under the label laws.
double surrogate_objective(const SurrogateLoss& phi, const FiniteDistribution& dist, const Vector& w);
// Gradient of G built from right derivatives of phi.
Vector surrogate_gradient(const SurrogateLoss& phi, const FiniteDistribution& dist, const Vector& w);

struct SurrogateMinimum {
  Vector w;
  double value = 0.0;
};

// Minimizes G over the unit disk: dense polar grid (angles x radii, plus the
// origin) followed by a pattern search that only accepts strict improvements.
SurrogateMinimum minimize_surrogate(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                    std::size_t angles = 10000, std::size_t radii = 100);

struct KktCheck {
  bool certified = false;
  double tangential = 0.0;  // <grad G(v), v_perp>
  double radial = 0.0;      // <grad G(v), v>
};

// Whether the unit vector v satisfies the first-order conditions for
// minimizing G over the unit disk: gradient = -mu v with mu >= 0.
KktCheck certify_boundary_minimizer(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                    const Vector& v);

// Smallest one-sided derivative of G along rotations of w by +-h.
double min_tangential_derivative(const SurrogateLoss& phi, const FiniteDistribution& dist,
                                 const Vector& w, double h = 1e-7);

// Exact Pr[sign(<w, x>) != y].
double sign_error(const FiniteDistribution& dist, const Vector& w);

// Smallest exact conditional error of sign(<w, x>) over regions {|<w, x>| >= T}
// with positive mass, T ranging over the support's scores.
double best_threshold_error(const FiniteDistribution& dist, const Vector& w);

struct LowerBoundReport {
  std::string phi_id;
  double eta = 0.0;
  double gamma = 0.0;
  VerifyMode mode = VerifyMode::Surrogate;
  bool case1_predicate = false;
  bool case1_certified = false;
  LowerBoundInstance instance;
  Vector w_hat;
  double objective = 0.0;
  double stationarity = 0.0;
  double sign_error = 0.0;
  double measured_error = 0.0;  // sign_error, or the best thresholded error
  double predicted_error_bound = 0.0;
  double theorem_bound = 0.0;
  bool passed = false;
};

inline constexpr double kLowerBoundTolerance = 1e-6;

// Throws std::invalid_argument for an unknown phi or gamma outside the mode's range.
LowerBoundReport verify_lower_bound(const std::string& phi_id, double eta, double gamma,
                                    VerifyMode mode);

}  // namespace massart
