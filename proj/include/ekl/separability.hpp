#pragma once

#include "ekl/tensor.hpp"

namespace ekl {

struct PptReport {
  bool ppt_holds = true;        // partial transpose has no eigenvalue below -tolerance
  bool entangled = false;       // !ppt_holds
  double min_eigenvalue = 0.0;  // smallest eigenvalue of the partial transpose
                                // of the trace-normalised input
  double tolerance = 0.0;       // absolute threshold used (rel_tol * spectral norm)
  double trace = 0.0;           // trace of the raw input (the normaliser)
};

/// Positive-partial-transpose test on a symmetric psd block matrix.  The
/// input is normalised to unit trace, its blocks are transposed in place,
/// and the verdict is "entangled" iff the smallest eigenvalue of the result
/// falls below -rel_tol times the spectral norm of the normalised input.
///
/// A negative eigenvalue certifies that the matrix is NOT a mixture of
/// Kronecker products (it is entangled); the converse does not hold, so
/// ppt_holds = true never certifies separability.
///
/// Throws std::invalid_argument when the input is not symmetric psd within
/// the tolerance, or has non-positive trace.
PptReport ppt_check(const BlockMatrix& a, double rel_tol = 1e-8);

}  // namespace ekl
