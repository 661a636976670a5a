#pragma once

#include <vector>

#include "ris/cxmat.hpp"
#include "ris/system.hpp"

namespace ris {

struct ChannelSet;

// Raised when a requested max-min SINR level is not supportable (the
// power closed form has spectral radius >= 1).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Zero-forcing initialization: with the phase shifts held fixed, each
// user's beam is the unit vector in the null space of the other users'
// composite channels with the largest projection onto its own channel,
// and the power budget is split equally across users. Requires M >= K.
CMatrix init_method1_zf(const ChannelSet& ch, const std::vector<CVector>& phases,
                        double p_t);

struct MaxMinResult {
  CMatrix F;                     // M x K, trace(F^H F) == P_t
  bool converged = false;
  std::size_t iterations = 0;
  double min_sinr = 0.0;         // minimum per-user SINR achieved by F
  std::vector<double> q;         // dual uplink powers, sum P_t
  std::vector<double> p;         // downlink powers, sum P_t
  std::vector<CVector> directions;   // unit-norm beam directions
  // minimum dual uplink SINR per sweep; nondecreasing toward the optimum
  std::vector<double> min_sinr_trace;
};

// Max-min SINR initialization via the uplink-downlink duality fixed point:
// per sweep, the dual auxiliary variables and uplink powers are updated and
// renormalized to the power budget, the beam directions are refreshed from
// the regularized solves, and the downlink powers are rebalanced from the
// achieved SINRs. Convergence is declared when the per-user SINR spread
// (max-min)/min falls below tol. On non-convergence the best iterate is
// returned with converged=false.
//
// Internally powers are carried in per-user normalized units (sum K), in
// which the 1/rho_0 regularizer with rho_0 = P_t/(K sigma^2) reproduces the
// physical SINRs exactly; the exported q/p vectors are rescaled to watts.
MaxMinResult init_method2_maxmin(const ChannelSet& ch, const std::vector<CVector>& phases,
                                 double p_t, double noise_power, double tol = 1e-6,
                                 std::size_t max_iter = 500);

// Closed-form power vector p = (eta/rho0) (I - eta G F0)^{-1} G 1 for the
// SINR-equalizing allocation. gamma is the diagonal matrix of inverse
// effective channel gains, f0 the zero-diagonal coupling matrix. Throws
// InfeasibleError when eta exceeds the supportable level (spectral radius
// of eta*gamma*f0 reaching one).
std::vector<double> maxmin_power_closed_form(const CMatrix& gamma, const CMatrix& f0,
                                             double eta, double rho0);

// Spectral radius of a small entrywise-nonnegative matrix (power iteration).
double spectral_radius_nonneg(const CMatrix& m);

}  // namespace ris
