#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "noisydmd/snapshots.hpp"

namespace noisydmd {

/// Rank-r truncated SVD, X ~= u * diag(s) * v^*.
struct SvdTriple {
  CMatrix u;
  Vector s;
  CMatrix v;
};

/// Exact-DMD model: X(t) = phi * exp(omega (t - t0)) * b.
struct DmdModel {
  CMatrix phi;
  CVector lambda;
  CVector omega;
  CVector b;
  int rank = 0;
  double dt = 1.0;
  double t0 = 0.0;
  CMatrix w_eigvecs;
  // Condition number of w_eigvecs; large values flag near-degenerate eigenvalues.
  double eigvec_condition = 1.0;
};

namespace dmd {

/// Default energy fraction for automatic rank selection.
inline constexpr double kEnergyFraction = 0.999;
/// Retained singular values below this fraction of s_1 raise SingularError.
inline constexpr double kSingularCutoff = 1e-12;

SvdTriple truncated_svd(const CMatrix& x, int r);

/// Smallest r whose leading singular values hold at least `fraction` of the
/// total squared energy. Returns 0 for an all-zero spectrum.
int energy_rank(std::span<const double> singular_values, double fraction = kEnergyFraction);
int energy_rank(const Vector& singular_values, double fraction = kEnergyFraction);

/// Fits exact DMD on the shift pair. r <= 0 selects the rank with energy_rank.
DmdModel fit(const SplitPair& pair, int r, double dt);

/// Builds a model from an already computed SVD of X1 (shared by TLS-DMD).
DmdModel fit_from_svd(const SvdTriple& svd, const CMatrix& x1, const CMatrix& x2, double dt,
                      double t0);

CMatrix reconstruct(const DmdModel& model, std::span<const double> times);

/// Per-column |pred - truth|_2 / |truth|_2.
Vector relative_error_series(const CMatrix& pred, const CMatrix& truth);

nlohmann::json to_json(const DmdModel& model);
DmdModel model_from_json(const nlohmann::json& doc);

}  // namespace dmd
}  // namespace noisydmd
