"""Pure numpy implementations of the objective kernels.

Same call signatures as the compiled ``_ckernels`` module; used when the
extension is not built or when ``HCCLSGO_PURE_PYTHON=1`` is set.
"""
import numpy as np

SCHWEFEL, ELLIPTIC, RASTRIGIN, ACKLEY = 0, 1, 2, 3


def t_osz(v):
    v = np.asarray(v, dtype=np.float64)
    out = np.zeros_like(v)
    nz = v != 0
    xh = np.log(np.abs(v[nz]))
    pos = v[nz] > 0
    c1 = np.where(pos, 10.0, 5.5)
    c2 = np.where(pos, 7.9, 3.1)
    out[nz] = np.sign(v[nz]) * np.exp(xh + 0.049 * (np.sin(c1 * xh) + np.sin(c2 * xh)))
    return out


def t_asy(v, beta):
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    if n < 2:
        return v.copy()
    ramp = beta * np.arange(n) / (n - 1)
    out = v.copy()
    pos = v > 0
    # broadcast the positional ramp over leading (batch) axes
    expo = 1.0 + np.broadcast_to(ramp, v.shape)[pos] * np.sqrt(v[pos])
    out[pos] = v[pos] ** expo
    return out


def base_eval(z, base_id):
    """Evaluate a base function along the last axis of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    n = z.shape[-1]
    if base_id == SCHWEFEL:
        return np.sum(np.cumsum(z, axis=-1) ** 2, axis=-1)
    if base_id == ELLIPTIC:
        if n < 2:
            return np.sum(z**2, axis=-1)
        coef = 10.0 ** (6.0 * np.arange(n) / (n - 1))
        return np.sum(coef * z**2, axis=-1)
    if base_id == RASTRIGIN:
        return np.sum(z**2 - 10.0 * np.cos(2.0 * np.pi * z) + 10.0, axis=-1)
    if base_id == ACKLEY:
        # 20 (1 - e^-u) + e (1 - e^(v-1)) via expm1: exact 0 at the optimum
        u = 0.2 * np.sqrt(np.mean(z**2, axis=-1))
        v = np.mean(np.cos(2.0 * np.pi * z), axis=-1)
        return -20.0 * np.expm1(-u) - np.e * np.expm1(v - 1.0)
    raise ValueError(f"unknown base function id {base_id}")


def composite_eval(Y, idx_flat, idx_off, rot_flat, rot_off, weights, base_id):
    """Weighted sum of transformed base functions over (possibly shared) subspaces.

    ``Y`` holds shifted points row-wise, shape (n, D).  Subspace ``i`` is
    ``idx_flat[idx_off[i]:idx_off[i+1]]`` and its rotation is the row-major
    square block ``rot_flat[rot_off[i]:rot_off[i+1]]``.
    """
    Y = np.asarray(Y, dtype=np.float64)
    total = np.zeros(Y.shape[0])
    for i in range(len(weights)):
        idx = idx_flat[idx_off[i]:idx_off[i + 1]]
        k = idx.shape[0]
        R = rot_flat[rot_off[i]:rot_off[i + 1]].reshape(k, k)
        # one 1xk product per row: a plain (n,k) matmul rounds differently
        # for n = 1 and n > 1, and a point must score the same in any batch
        z = t_asy(t_osz((Y[:, None, idx] @ R.T)[:, 0, :]), 0.2)
        total += weights[i] * base_eval(z, base_id)
    return total
