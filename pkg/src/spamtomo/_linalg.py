"""Closed-form 3x3 determinant, adjugate and guarded inverse.

The corner blocks of an expectation matrix are inverted many times per
analysis, so the inverse is computed branch-free from the adjugate rather
than through a factorization.  The singularity guard compares the
determinant against the Frobenius scale of the matrix, which separates a
degenerate choice of settings from an actual correlated error.
"""

import numpy as np

from .errors import SingularMatrixError

DET_RTOL = 1e-10


def det3(m):
    return (
        m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
        - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
        + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
    )


def adjugate3(m):
    adj = np.empty((3, 3), dtype=m.dtype)
    adj[0, 0] = m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
    adj[0, 1] = m[0, 2] * m[2, 1] - m[0, 1] * m[2, 2]
    adj[0, 2] = m[0, 1] * m[1, 2] - m[0, 2] * m[1, 1]
    adj[1, 0] = m[1, 2] * m[2, 0] - m[1, 0] * m[2, 2]
    adj[1, 1] = m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
    adj[1, 2] = m[0, 2] * m[1, 0] - m[0, 0] * m[1, 2]
    adj[2, 0] = m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]
    adj[2, 1] = m[0, 1] * m[2, 0] - m[0, 0] * m[2, 1]
    adj[2, 2] = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
    return adj


def guarded_inv3(m, rtol=DET_RTOL, where="matrix"):
    """Invert a 3x3 matrix, raising :class:`SingularMatrixError` when its
    determinant is small relative to the matrix scale.

    The scale is ``(|m|_F / sqrt(3))**3``, the determinant magnitude of a
    well-conditioned matrix with the same Frobenius norm.
    """
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        raise SingularMatrixError(f"{where} must be 3x3, got shape {m.shape}", where=where)
    det = det3(m)
    scale = (np.linalg.norm(m) / np.sqrt(3.0)) ** 3
    if scale == 0.0 or abs(det) <= rtol * scale:
        raise SingularMatrixError(
            f"near-singular {where}: |det| = {abs(det):.3e} at scale {scale:.3e}",
            where=where,
        )
    return adjugate3(m) / det
