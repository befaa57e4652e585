"""Independent brute-force oracles shared by the test modules.

These deliberately avoid the library's vectorized code paths: attention
is computed per location with explicit loops over keys, matrix products
by triple loops, and masks are assembled as one full joint matrix.
"""

import math

import numpy as np


def naive_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Triple-loop matrix product."""
    n, k = a.shape
    k2, m = b.shape
    assert k == k2
    out = np.zeros((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for p in range(k):
                acc += a[i, p] * b[p, j]
            out[i, j] = acc
    return out


def naive_self_attention(values: np.ndarray, wq, wk, wv) -> np.ndarray:
    """Per-location attention with explicit loops over key positions."""
    h, w, d = values.shape
    f = values.reshape(-1, d)
    n = f.shape[0]
    out = np.zeros_like(f)
    for s in range(n):
        q = f[s] @ wq
        logits = np.array([q @ (f[t] @ wk) / math.sqrt(d) for t in range(n)])
        p = np.exp(logits - logits.max())
        p /= p.sum()
        for t in range(n):
            out[s] += p[t] * (f[t] @ wv)
    return out.reshape(h, w, d)


def naive_multiview_attention(view_values, wq, wk, wv, pair_masks):
    """Masked joint attention over one big (n*hw) x (n*hw) matrix.

    ``pair_masks[(i, j)]`` restricts view i attending into view j; the
    diagonal blocks are all-true.  Returns one output array per view.
    """
    n = len(view_values)
    h, w, d = view_values[0].shape
    hw = h * w
    cat = np.vstack([v.reshape(-1, d) for v in view_values])
    q = cat @ wq
    k = cat @ wk
    v = cat @ wv
    logits = q @ k.T / math.sqrt(d)
    allowed = np.zeros((n * hw, n * hw), dtype=bool)
    for i in range(n):
        for j in range(n):
            block = (
                np.ones((hw, hw), dtype=bool) if i == j else pair_masks[(i, j)]
            )
            allowed[i * hw : (i + 1) * hw, j * hw : (j + 1) * hw] = block
    z = np.where(allowed, logits, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)
    out = p @ v
    return [out[i * hw : (i + 1) * hw].reshape(h, w, d) for i in range(n)]


def cfg_reference(e_null, e_t, e_tc, e_tce, e_full, s_t, s_c, s_e, s_p):
    """Guidance composition evaluated literally, difference by difference."""
    return (
        e_null
        + s_t * (e_t - e_null)
        + s_c * (e_tc - e_t)
        + s_e * (e_tce - e_tc)
        + s_p * (e_full - e_tce)
    )
