"""Pure-Python versions of the compiled kernels.

The Jacobi sweep is vectorised over the batch axis, so a stack of small
matrices costs roughly the same number of numpy calls as a single one.
"""

import numpy as np


def jacobi_eigh(mats, tol=1e-15, max_sweeps=64):
    """Eigendecompose a stack ``(n, d, d)`` of Hermitian matrices.

    Returns ``(w, v)`` with eigenvalues ascending along the last axis.
    """
    a = np.array(mats, dtype=np.complex128, copy=True)
    n, d, _ = a.shape
    v = np.broadcast_to(np.eye(d, dtype=np.complex128), (n, d, d)).copy()
    scale = np.einsum("nij,nij->n", a.conj(), a).real
    iu = np.triu_indices(d, 1)

    for _ in range(max_sweeps):
        off = np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1)
        if np.all(off <= tol * tol * scale):
            break
        for p, q in zip(*iu):
            apq = a[:, p, q]
            mag = np.abs(apq)
            live = mag > 0.0
            ph = np.where(live, apq / np.where(live, mag, 1.0), 1.0)
            cph = ph.conj()
            theta = 0.5 * np.arctan2(2.0 * mag, a[:, q, q].real - a[:, p, p].real)
            c = np.cos(theta)[:, None]
            s = np.sin(theta)[:, None]
            cph_ = cph[:, None]
            ph_ = ph[:, None]

            akp = a[:, :, p].copy()
            akq = a[:, :, q].copy()
            a[:, :, p] = c * akp - s * cph_ * akq
            a[:, :, q] = s * akp + c * cph_ * akq
            apk = a[:, p, :].copy()
            aqk = a[:, q, :].copy()
            a[:, p, :] = c * apk - s * ph_ * aqk
            a[:, q, :] = s * apk + c * ph_ * aqk
            vkp = v[:, :, p].copy()
            vkq = v[:, :, q].copy()
            v[:, :, p] = c * vkp - s * cph_ * vkq
            v[:, :, q] = s * vkp + c * cph_ * vkq

            a[:, p, q] = 0.0
            a[:, q, p] = 0.0
            a[:, p, p] = a[:, p, p].real
            a[:, q, q] = a[:, q, q].real
    else:
        off = np.sum(np.abs(a[:, iu[0], iu[1]]) ** 2, axis=1)
        if not np.all(off <= tol * tol * scale):
            raise ArithmeticError("Jacobi did not converge")

    w = np.diagonal(a, axis1=1, axis2=2).real.copy()
    order = np.argsort(w, axis=1, kind="stable")
    w = np.take_along_axis(w, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return w, v


def ordered_product(steps):
    """Cumulative left products ``U_k = S_{k-1} ... S_0`` with ``U_0 = I``."""
    steps = np.asarray(steps, dtype=np.complex128)
    n, d, _ = steps.shape
    out = np.empty((n + 1, d, d), dtype=np.complex128)
    out[0] = np.eye(d)
    for k in range(n):
        out[k + 1] = steps[k] @ out[k]
    return out
