"""Pure-numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def esp(lam):
    """All elementary symmetric polynomials ``S_0..S_n`` of each row of ``lam``."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    K, n = lam.shape
    out = np.zeros((K, n + 1))
    out[:, 0] = 1.0
    for i in range(n):
        x = lam[:, i]
        # descending p so each column is updated from the previous stage
        for p in range(i + 1, 0, -1):
            out[:, p] += x * out[:, p - 1]
    return out


def deleted_esp(lam):
    """``out[k, i, p] = S_p(lam[k] without entry i)`` for ``p = 0..n-1``."""
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    K, n = lam.shape
    out = np.zeros((K, n, n))
    for i in range(n):
        keep = np.delete(lam, i, axis=1)
        out[:, i, :] = esp(keep)
    return out
