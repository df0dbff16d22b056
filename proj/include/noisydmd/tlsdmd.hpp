#pragma once

#include "noisydmd/dmd.hpp"
#include "noisydmd/snapshots.hpp"

namespace noisydmd {

/// Dominant eigenvectors of Z = X1^* X1 + X2^* X2.
struct TlsProjection {
  CMatrix vn;          // (P-1) x r, orthonormal columns
  int r = 0;
  Vector eigenvalues;  // r leading eigenvalues of Z, descending
  Vector all_eigenvalues;
};

struct TlsProjected {
  CMatrix x1;  // X1 Vn Vn^*
  CMatrix x2;  // X2 Vn Vn^*
  TlsProjection proj;
};

namespace tls {

/// Projects both halves of the shift pair onto the r-dimensional dominant
/// right subspace of the stacked data. r <= 0 selects r with the dmd energy
/// rule applied to sqrt(eigenvalues of Z).
TlsProjected project(const SplitPair& pair, int r);

/// Total-least-squares DMD: project, then exact DMD on the projected pair.
DmdModel fit(const SplitPair& pair, int r, double dt);

/// Same as fit() but also returns the projection, for filtered-rank reports.
DmdModel fit(const SplitPair& pair, int r, double dt, TlsProjected* projected);

namespace detail {
/// Singular values of [X1; X2] computed directly; cross-check for Z's spectrum.
Vector stacked_singular_values(const SplitPair& pair);
}  // namespace detail

}  // namespace tls
}  // namespace noisydmd
