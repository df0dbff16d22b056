#include "noisydmd/pde.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <unsupported/Eigen/FFT>

#include "noisydmd/errors.hpp"

namespace noisydmd::pde {
namespace {

int substeps_for(double interval, double max_step) {
  return std::max(1, static_cast<int>(std::ceil(interval / max_step - 1e-9)));
}

void check_blowup(double magnitude, const char* solver) {
  if (!std::isfinite(magnitude) || magnitude > kBlowupThreshold) {
    throw BlowupError(std::string(solver) + ": solution exceeded blow-up threshold");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// NLSE

void NlseConfig::validate() const {
  if (!(w_min < w_max)) throw ConfigError("nlse: w_min must be < w_max");
  if (n_w < 2 || (n_w & (n_w - 1)) != 0) throw ConfigError("nlse: n_w must be a power of two");
  if (n_t < 3) throw ConfigError("nlse: n_t must be >= 3");
  if (!(t_max > 0.0)) throw ConfigError("nlse: t_max must be positive");
  if (!(max_step > 0.0)) throw ConfigError("nlse: max_step must be positive");
  if (initial_profile == NlseProfile::custom &&
      custom_initial.size() != static_cast<std::size_t>(n_w)) {
    throw ConfigError("nlse: custom initial profile needs n_w samples");
  }
}

SnapshotMatrix solve_nlse(const NlseConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_w;
  const double length = cfg.w_max - cfg.w_min;
  const double dw = length / n;

  std::vector<Complex> p(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const double w = cfg.w_min + k * dw;
    p[k] = cfg.initial_profile == NlseProfile::custom ? cfg.custom_initial[k]
                                                      : Complex(cfg.amplitude / std::cosh(w), 0.0);
  }

  // Angular wavenumbers in FFT order.
  std::vector<double> kappa(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const int m = k < n / 2 ? k : k - n;
    kappa[k] = 2.0 * std::numbers::pi * m / length;
  }

  const double interval = cfg.t_max / (cfg.n_t - 1);
  const int nsub = substeps_for(interval, cfg.max_step);
  const double h = interval / nsub;

  std::vector<Complex> half_linear(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) half_linear[k] = std::exp(Complex(0.0, -0.25 * kappa[k] * kappa[k] * h));

  SnapshotMatrix out;
  out.values.resize(n, cfg.n_t);
  out.is_complex = true;
  out.dt = interval;
  out.t0 = 0.0;
  out.grid = GridMeta::line(static_cast<std::uint64_t>(n), cfg.w_min, cfg.w_min + (n - 1) * dw);

  Eigen::FFT<double> fft;
  std::vector<Complex> spec(static_cast<std::size_t>(n));
  auto store = [&](int col) {
    for (int k = 0; k < n; ++k) out.values(k, col) = p[k];
  };
  store(0);

  // Strang splitting: half linear step, full nonlinear phase rotation, half linear step.
  for (int col = 1; col < cfg.n_t; ++col) {
    for (int s = 0; s < nsub; ++s) {
      fft.fwd(spec, p);
      for (int k = 0; k < n; ++k) spec[k] *= half_linear[k];
      fft.inv(p, spec);
      for (auto& v : p) v *= std::exp(Complex(0.0, std::norm(v) * h));
      fft.fwd(spec, p);
      for (int k = 0; k < n; ++k) spec[k] *= half_linear[k];
      fft.inv(p, spec);
    }
    double peak = 0.0;
    for (const auto& v : p) peak = std::max(peak, std::abs(v));
    check_blowup(peak, "nlse");
    store(col);
  }
  return out;
}

// ---------------------------------------------------------------------------
// FitzHugh-Nagumo

void FneConfig::validate() const {
  if (!(x_min < x_max)) throw ConfigError("fne: x_min must be < x_max");
  if (n_x < 3) throw ConfigError("fne: n_x must be >= 3");
  if (n_t < 3) throw ConfigError("fne: n_t must be >= 3");
  if (!(t_max > 0.0)) throw ConfigError("fne: t_max must be positive");
  if (!(d_coeff >= 0.0)) throw ConfigError("fne: d_coeff must be nonnegative");
  if (!(max_step > 0.0)) throw ConfigError("fne: max_step must be positive");
  if (!v0.empty() && v0.size() != static_cast<std::size_t>(n_x)) {
    throw ConfigError("fne: v0 needs n_x samples");
  }
  if (!w0.empty() && w0.size() != static_cast<std::size_t>(n_x)) {
    throw ConfigError("fne: w0 needs n_x samples");
  }
}

namespace {

struct FneRhs {
  const FneConfig& cfg;
  double inv_dx2;

  // state = [V; W]
  void operator()(const Vector& state, Vector& deriv) const {
    const Eigen::Index n = state.size() / 2;
    auto v = state.head(n);
    auto w = state.tail(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      // Ghost points mirror the first interior neighbour (zero-flux).
      const double left = i == 0 ? v(1) : v(i - 1);
      const double right = i == n - 1 ? v(n - 2) : v(i + 1);
      const double lap = (left - 2.0 * v(i) + right) * inv_dx2;
      const double vi = v(i);
      deriv(i) = cfg.d_coeff * lap + vi * (cfg.a_param - vi) * (vi - 1.0) - w(i);
      deriv(n + i) = cfg.b_param * vi - cfg.c_param * w(i);
    }
  }
};

}  // namespace

SnapshotMatrix solve_fne(const FneConfig& cfg) {
  cfg.validate();
  const int n = cfg.n_x;
  const double dx = (cfg.x_max - cfg.x_min) / (n - 1);

  Vector state(2 * n);
  for (int i = 0; i < n; ++i) {
    const double x = cfg.x_min + i * dx;
    state(i) = cfg.v0.empty() ? std::exp(-x * x) : cfg.v0[i];
    state(n + i) = cfg.w0.empty() ? 0.2 * std::exp(-(x + 2.0) * (x + 2.0)) : cfg.w0[i];
  }

  const double interval = cfg.t_max / (cfg.n_t - 1);
  double step_cap = cfg.max_step;
  if (cfg.d_coeff > 0.0) {
    // RK4 real-axis stability limit is ~2.78 / |lambda_max|, lambda_max = 4 D / dx^2.
    step_cap = std::min(step_cap, 0.6 * dx * dx / cfg.d_coeff);
  }
  const int nsub = substeps_for(interval, step_cap);
  const double h = interval / nsub;

  const int q = cfg.stack_w ? 2 * n : n;
  SnapshotMatrix out;
  out.values.resize(q, cfg.n_t);
  out.is_complex = false;
  out.dt = interval;
  out.t0 = 0.0;
  out.grid = GridMeta::line(static_cast<std::uint64_t>(n), cfg.x_min, cfg.x_max);
  if (cfg.stack_w) {
    // Two stacked fields on the same line: encode as a 2-point second axis.
    out.grid = GridMeta::plane(static_cast<std::uint64_t>(n), cfg.x_min, cfg.x_max, 2, 0.0, 1.0);
  }
  auto store = [&](int col) { out.values.col(col) = state.head(q).cast<Complex>(); };
  store(0);

  const FneRhs rhs{cfg, 1.0 / (dx * dx)};
  Vector k1(2 * n), k2(2 * n), k3(2 * n), k4(2 * n), tmp(2 * n);
  for (int col = 1; col < cfg.n_t; ++col) {
    for (int s = 0; s < nsub; ++s) {
      rhs(state, k1);
      tmp = state + 0.5 * h * k1;
      rhs(tmp, k2);
      tmp = state + 0.5 * h * k2;
      rhs(tmp, k3);
      tmp = state + h * k3;
      rhs(tmp, k4);
      state += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    check_blowup(state.cwiseAbs().maxCoeff(), "fne");
    store(col);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shallow water

void SweConfig::validate() const {
  if (nx < 8 || ny < 8) throw ConfigError("swe: nx and ny must be >= 8");
  if (!(lx > 0.0) || !(ly > 0.0)) throw ConfigError("swe: extents must be positive");
  if (!(g > 0.0)) throw ConfigError("swe: g must be positive");
  if (!(rho > 0.0)) throw ConfigError("swe: rho must be positive");
  if (!(kappa0 > 0.0)) throw ConfigError("swe: kappa0 must be positive");
  if (n_t < 3) throw ConfigError("swe: n_t must be >= 3");
  if (!(t_max > 0.0)) throw ConfigError("swe: t_max must be positive");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("swe: cfl must be in (0, 1]");
  if (!(max_step >= 0.0)) throw ConfigError("swe: max_step must be nonnegative");
  if (initial_drop.width <= 0.0) throw ConfigError("swe: drop width must be positive");
}

namespace {

// Conserved variables on an (nx+2) x (ny+2) array with one ghost layer.
// Density is constant and divides out of every equation, so the state is
// (kappa, kappa u, kappa v).
class ShallowWater {
public:
  explicit ShallowWater(const SweConfig& cfg)
      : cfg_(cfg),
        nx_(cfg.nx),
        ny_(cfg.ny),
        dx_(cfg.lx / cfg.nx),
        dy_(cfg.ly / cfg.ny),
        h_(Matrix::Constant(nx_ + 2, ny_ + 2, cfg.kappa0)),
        u_(Matrix::Zero(nx_ + 2, ny_ + 2)),
        v_(Matrix::Zero(nx_ + 2, ny_ + 2)),
        hx_(nx_ + 1, ny_), ux_(nx_ + 1, ny_), vx_(nx_ + 1, ny_),
        hy_(nx_, ny_ + 1), uy_(nx_, ny_ + 1), vy_(nx_, ny_ + 1) {
    const auto& d = cfg.initial_drop;
    for (int j = 1; j <= ny_; ++j) {
      for (int i = 1; i <= nx_; ++i) {
        const double rx = x_center(i) - d.center_x;
        const double ry = y_center(j) - d.center_y;
        h_(i, j) += d.amplitude * std::exp(-(rx * rx + ry * ry) / (d.width * d.width));
      }
    }
  }

  double x_center(int i) const { return (i - 0.5) * dx_; }
  double y_center(int j) const { return (j - 0.5) * dy_; }
  double dx() const { return dx_; }
  double dy() const { return dy_; }

  double max_signal_speed() const {
    double s = 0.0;
    for (int j = 1; j <= ny_; ++j) {
      for (int i = 1; i <= nx_; ++i) {
        const double h = h_(i, j);
        if (!(h > 0.0)) throw BlowupError("swe: non-positive fluid height");
        const double c = std::sqrt(cfg_.g * h);
        s = std::max(s, std::max(std::abs(u_(i, j)), std::abs(v_(i, j))) / h + c);
      }
    }
    return s;
  }

  double max_magnitude() const {
    return std::max({h_.cwiseAbs().maxCoeff(), u_.cwiseAbs().maxCoeff(), v_.cwiseAbs().maxCoeff()});
  }

  // Two-step (Richtmyer) Lax-Wendroff.
  void step(double dt) {
    apply_walls();
    const double g2 = 0.5 * cfg_.g;

    // Half step on x-faces (i+1/2, j), i = 0..nx.
    for (int j = 0; j < ny_; ++j) {
      const int jj = j + 1;
      for (int i = 0; i <= nx_; ++i) {
        const double hl = h_(i, jj), hr = h_(i + 1, jj);
        const double ul = u_(i, jj), ur = u_(i + 1, jj);
        const double vl = v_(i, jj), vr = v_(i + 1, jj);
        const double c = dt / (2.0 * dx_);
        hx_(i, j) = 0.5 * (hl + hr) - c * (ur - ul);
        ux_(i, j) = 0.5 * (ul + ur) - c * ((ur * ur / hr + g2 * hr * hr) - (ul * ul / hl + g2 * hl * hl));
        vx_(i, j) = 0.5 * (vl + vr) - c * (ur * vr / hr - ul * vl / hl);
      }
    }
    // Half step on y-faces (i, j+1/2), j = 0..ny.
    for (int j = 0; j <= ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        const int ii = i + 1;
        const double hb = h_(ii, j), ht = h_(ii, j + 1);
        const double ub = u_(ii, j), ut = u_(ii, j + 1);
        const double vb = v_(ii, j), vt = v_(ii, j + 1);
        const double c = dt / (2.0 * dy_);
        hy_(i, j) = 0.5 * (hb + ht) - c * (vt - vb);
        uy_(i, j) = 0.5 * (ub + ut) - c * (vt * ut / ht - vb * ub / hb);
        vy_(i, j) = 0.5 * (vb + vt) - c * ((vt * vt / ht + g2 * ht * ht) - (vb * vb / hb + g2 * hb * hb));
      }
    }
    // Full step from face fluxes.
    const double cx = dt / dx_;
    const double cy = dt / dy_;
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) {
        const int ii = i + 1, jj = j + 1;
        const double fx_h = ux_(i + 1, j) - ux_(i, j);
        const double fy_h = vy_(i, j + 1) - vy_(i, j);

        const double fx_u = flux_normal(ux_(i + 1, j), hx_(i + 1, j), g2) - flux_normal(ux_(i, j), hx_(i, j), g2);
        const double fy_u = vy_(i, j + 1) * uy_(i, j + 1) / hy_(i, j + 1) - vy_(i, j) * uy_(i, j) / hy_(i, j);

        const double fx_v = ux_(i + 1, j) * vx_(i + 1, j) / hx_(i + 1, j) - ux_(i, j) * vx_(i, j) / hx_(i, j);
        const double fy_v = flux_normal(vy_(i, j + 1), hy_(i, j + 1), g2) - flux_normal(vy_(i, j), hy_(i, j), g2);

        h_(ii, jj) -= cx * fx_h + cy * fy_h;
        u_(ii, jj) -= cx * fx_u + cy * fy_u;
        v_(ii, jj) -= cx * fx_v + cy * fy_v;
      }
    }
  }

  void store_height(CMatrix& out, int col) const {
    for (int j = 0; j < ny_; ++j) {
      for (int i = 0; i < nx_; ++i) out(i + nx_ * j, col) = h_(i + 1, j + 1);
    }
  }

private:
  static double flux_normal(double m, double h, double g2) { return m * m / h + g2 * h * h; }

  void apply_walls() {
    for (int j = 1; j <= ny_; ++j) {
      h_(0, j) = h_(1, j);
      u_(0, j) = -u_(1, j);
      v_(0, j) = v_(1, j);
      h_(nx_ + 1, j) = h_(nx_, j);
      u_(nx_ + 1, j) = -u_(nx_, j);
      v_(nx_ + 1, j) = v_(nx_, j);
    }
    for (int i = 1; i <= nx_; ++i) {
      h_(i, 0) = h_(i, 1);
      u_(i, 0) = u_(i, 1);
      v_(i, 0) = -v_(i, 1);
      h_(i, ny_ + 1) = h_(i, ny_);
      u_(i, ny_ + 1) = u_(i, ny_);
      v_(i, ny_ + 1) = -v_(i, ny_);
    }
  }

  const SweConfig& cfg_;
  int nx_, ny_;
  double dx_, dy_;
  Matrix h_, u_, v_;
  Matrix hx_, ux_, vx_;
  Matrix hy_, uy_, vy_;
};

}  // namespace

SnapshotMatrix solve_swe(const SweConfig& cfg) {
  cfg.validate();
  ShallowWater sw(cfg);

  SnapshotMatrix out;
  out.values.resize(static_cast<Eigen::Index>(cfg.nx) * cfg.ny, cfg.n_t);
  out.is_complex = false;
  out.dt = cfg.t_max / (cfg.n_t - 1);
  out.t0 = 0.0;
  out.grid = GridMeta::plane(static_cast<std::uint64_t>(cfg.nx), sw.x_center(1), sw.x_center(cfg.nx),
                             static_cast<std::uint64_t>(cfg.ny), sw.y_center(1), sw.y_center(cfg.ny));
  sw.store_height(out.values, 0);

  for (int col = 1; col < cfg.n_t; ++col) {
    double step_cap = cfg.cfl * std::min(sw.dx(), sw.dy()) / sw.max_signal_speed();
    if (cfg.max_step > 0.0) step_cap = std::min(step_cap, cfg.max_step);
    const double needed = std::ceil(out.dt / step_cap - 1e-9);
    if (needed > static_cast<double>(cfg.max_substeps)) {
      throw CflError("swe: CFL bound needs more than " + std::to_string(cfg.max_substeps) +
                     " sub-steps per snapshot interval");
    }
    const int nsub = std::max(1, static_cast<int>(needed));
    const double h = out.dt / nsub;
    for (int s = 0; s < nsub; ++s) sw.step(h);
    check_blowup(sw.max_magnitude(), "swe");
    sw.store_height(out.values, col);
  }
  return out;
}

}  // namespace noisydmd::pde
