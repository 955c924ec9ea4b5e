"""Pure numpy implementations of the compiled kernels."""
import numpy as np
import scipy.sparse


def countsketch_rows(A, rows, signs, s):
    m = A.shape[0]
    X = scipy.sparse.csc_matrix(
        (np.asarray(signs, dtype=np.float64), (np.asarray(rows), np.arange(m))),
        shape=(s, m),
    )
    return np.asfortranarray(X @ A)


def lowrank_apply(W, S, scale, x):
    k = W.shape[1]
    t = W.T @ x
    t *= S[:k]
    return scale * (x - W @ t)
