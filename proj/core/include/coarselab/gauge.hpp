#pragma once

#include <string>
#include <vector>

#include "coarselab/morse.hpp"
#include "coarselab/sublinear.hpp"

namespace coarselab {

struct GaugeInputs {
  double q = 2;
  double Q = 0;
  double C1 = 0.5;
  double C2 = 0;
  double D1 = 1;
  double D2 = 0;
};

struct GaugeDerivation {
  GaugeInputs in;
  std::string kappa;
  double m0 = 0;
  double m1 = 0;
  double C3 = 0;
  double A = 0;  // fraktur A, least on the kappa grid
  double A_at = 0;
  EstimationConstant est2;
  EstimationConstant est4;
  double m2 = 1;
  double m3 = 0;
  double m4 = 1;
  double mZ = 0;
};

// Constant stack of the weakly-contracting => Morse theorem. q > 1 and
// 0 < C1 <= 1/2 required.
GaugeDerivation derive_gauge(const GaugeInputs& in, const SublinearFn& kappa);

// (q, Q) -> m_Z for fixed contraction/projection constants. Arguments with
// q below q_floor are evaluated at q_floor: a (q, Q)-quasi-geodesic is also a
// (q_floor, Q)-quasi-geodesic, so the value is still a valid gauge.
MorseGauge derived_gauge(double C1, double C2, double D1, double D2, const SublinearFn& kappa,
                         double q_floor = 1.5);

// Least integer R with m0 m1 k(R) + m1 k'(R) + A k(R) <= (R - Q)/q - r.
double theorem_radius(const GaugeDerivation& g, const SublinearFn& kappa, const SublinearFn& kappa_prime, double r);

// sup{ s : s <= 4r and s <= 18 m(12r/s, 0) }, bisection to 1e-6 r.
double radius_contraction_rho(const MorseGauge& gauge, double r);

}  // namespace coarselab
