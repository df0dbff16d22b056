#pragma once

#include <numbers>
#include <vector>

#include "noisydmd/snapshots.hpp"

namespace noisydmd::pde {

// All solvers raise BlowupError once any state magnitude exceeds this.
inline constexpr double kBlowupThreshold = 1e6;

enum class NlseProfile { soliton_sech, custom };

/// dp/dt = (i/2) d2p/dw2 + i |p|^2 p on a periodic grid.
struct NlseConfig {
  double w_min = -15.0;
  double w_max = 15.0;
  int n_w = 512;  // power of two
  double t_max = 8.0 * std::numbers::pi;
  int n_t = 200;
  NlseProfile initial_profile = NlseProfile::soliton_sech;
  double amplitude = 2.0;             // p(w, 0) = amplitude * sech(w)
  std::vector<Complex> custom_initial;  // n_w samples when profile == custom
  double max_step = 2.5e-4;           // cap on the internal split-step size

  void validate() const;
};

/// FitzHugh-Nagumo system with zero-flux boundaries:
///   V_t = D V_xx + V (a - V)(V - 1) - W,   W_t = b V - c W.
struct FneConfig {
  double x_min = -10.0;
  double x_max = 10.0;
  int n_x = 256;
  double t_max = 400.0;
  int n_t = 300;
  double d_coeff = 0.01;
  double a_param = 0.1;
  double b_param = 0.01;
  double c_param = 0.02;
  bool stack_w = true;  // Q = 2 n_x (V over W) when true, else V only
  // Empty means V0 = exp(-x^2), W0 = 0.2 exp(-(x+2)^2).
  std::vector<double> v0;
  std::vector<double> w0;
  double max_step = 0.05;

  void validate() const;
};

/// Gaussian perturbation of the resting height.
struct GaussianDrop {
  double center_x = 5.0;
  double center_y = 5.0;
  double width = 1.0;
  double amplitude = 0.5;
};

/// Shallow water equations in conservative form on [0, lx] x [0, ly] with
/// reflective walls. Only the height field kappa is exported.
struct SweConfig {
  int nx = 64;
  int ny = 64;
  double lx = 10.0;
  double ly = 10.0;
  double g = 9.81;
  double rho = 1.0;
  double kappa0 = 1.0;
  GaussianDrop initial_drop;
  double t_max = 4.0;
  int n_t = 150;
  double cfl = 0.45;
  double max_step = 0.0;  // 0 = limited by CFL only
  long max_substeps = 100000;

  void validate() const;
};

SnapshotMatrix solve_nlse(const NlseConfig& cfg);
SnapshotMatrix solve_fne(const FneConfig& cfg);
SnapshotMatrix solve_swe(const SweConfig& cfg);

}  // namespace noisydmd::pde
