"""Pure numpy implementation of the numerical kernels.

Selected automatically when the compiled ``_kernels`` extension is not
built, or when ``ICNASH_PURE_PYTHON=1`` is set.  Every function here has a
twin with the same signature in ``_kernels.pyx``.

Array conventions: ``P`` is ``(N, n)`` float64, ``gains`` is ``(S, N, N)``
with ``gains[s, i, j]`` the gain from transmitter ``j`` to receiver ``i``,
and ``idx`` is the ``(N, S)`` map from joint states to visible states.
"""

import numpy as np

from .errors import NonConvergence

_CHUNK = 256


def project(x, w, budget, max_iter=200):
    """Weighted projection onto ``{p >= 0, sum(w * p) == budget}``.

    Returns ``(p, lam, iterations)`` with ``p = max(0, x - lam)``.  ``lam``
    is bracketed by bisection until no breakpoint of the piecewise-linear
    budget function lies strictly inside the bracket, then solved in closed
    form on the identified active set.
    """
    x = np.asarray(x, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    lo = x.min() - budget / w.sum()
    hi = x.max()
    for it in range(max_iter + 1):
        inside = (x > lo) & (x < hi)
        if not inside.any() or hi - lo <= 4e-16 * max(1.0, abs(lo), abs(hi)):
            act = x >= hi
            wa = w[act].sum()
            if wa > 0:
                lam = (w[act] @ x[act] - budget) / wa
                return np.maximum(0.0, x - lam), lam, it
        if it == max_iter:
            break
        mid = 0.5 * (lo + hi)
        if w @ np.maximum(0.0, x - mid) > budget:
            lo = mid
        else:
            hi = mid
    raise NonConvergence(f"projection bisection exceeded {max_iter} iterations")


def _project_rows(Y, W, budgets, out):
    lams = np.empty(Y.shape[0])
    for i in range(Y.shape[0]):
        out[i], lams[i], _ = project(Y[i], W[i], budgets[i])
    return lams


def affine_input(P, gains, tau):
    """``P - tau * F(P)`` for the full-knowledge affine operator."""
    direct = np.einsum("sii->is", gains)
    total = np.einsum("sij,js->is", gains, P)
    floor = (1.0 + total - direct * P) / direct
    return P - tau * (P + floor)


def t_affine(P, gains, w, budgets, tau, out):
    """Write ``T(P)`` for the full-knowledge game into ``out``; return the merit."""
    P = np.asarray(P, dtype=np.float64)
    Y = affine_input(P, gains, tau)
    W = np.broadcast_to(w, P.shape)
    _project_rows(Y, W, budgets, out)
    return float(np.sqrt(((P - out) ** 2).sum()))


def partial_gradient(P, idx, gains, pi):
    """Exact rate gradient of each user w.r.t. its own visible powers."""
    P = np.asarray(P, dtype=np.float64)
    n_users, nv = P.shape
    expanded = np.take_along_axis(P, idx, axis=1)
    direct = np.einsum("sii->is", gains)
    total = np.einsum("sij,js->is", gains, expanded)
    term = pi * direct / (1.0 + total)
    grad = np.empty((n_users, nv))
    for i in range(n_users):
        grad[i] = np.bincount(idx[i], weights=term[i], minlength=nv)
    return grad


def partial_input(P, idx, gains, pi, wvis, tau):
    """Ascent point ``P + tau * D`` where ``D`` is the rate gradient in the
    ``wvis``-weighted metric, scaled so uniform weights give the plain gradient."""
    grad = partial_gradient(P, idx, gains, pi)
    nv = P.shape[1]
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = np.where(wvis > 0, grad / (nv * wvis), 0.0)
    return P + tau * scaled


def t_partial(P, idx, gains, pi, wvis, budgets, tau, out):
    """Write the better-response map for partial knowledge into ``out``."""
    P = np.asarray(P, dtype=np.float64)
    Y = partial_input(P, idx, gains, pi, wvis, tau)
    _project_rows(Y, wvis, budgets, out)
    return float(np.sqrt(((P - out) ** 2).sum()))


def _warm_lambda(Y, w, budget, lam0, max_iter=100):
    """Row-wise exact water levels of ``Y`` by Newton from ``lam0``.

    The budget function is convex, decreasing and piecewise linear, so the
    iteration terminates once the active set stops changing.
    """
    lam = np.full(Y.shape[0], lam0, dtype=np.float64)
    for _ in range(max_iter):
        act = Y > lam[:, None]
        wa = act @ w
        bad = wa <= 0
        if bad.any():
            for r in np.flatnonzero(bad):
                lam[r] = project(Y[r], w, budget)[1]
            act = Y > lam[:, None]
            wa = act @ w
        new = ((act * Y) @ w - budget) / wa
        if np.array_equal(new, lam):
            return lam
        lam = new
    for r in range(Y.shape[0]):
        lam[r] = project(Y[r], w, budget)[1]
    return lam


def fd_grad_affine(P, user, gains, w, budgets, tau, rel_step, out):
    """Forward-difference gradient of ``||P - T(P)||^2`` w.r.t. ``P[user]``.

    Each coordinate is bumped separately and the squared merit re-evaluated
    exactly on the raw perturbed profile.  A bump of ``P[user, h]`` only
    changes projection inputs at state ``h``; the difference
    ``f(P + e) - f(P)`` is accumulated term by term.
    """
    P = np.asarray(P, dtype=np.float64)
    n_users, S = P.shape
    Y = affine_input(P, gains, tau)
    T = np.empty_like(P)
    lams = _project_rows(Y, np.broadcast_to(w, P.shape), budgets, T)
    R = P - T
    steps = rel_step * np.maximum(1.0, np.abs(P[user]))
    direct = np.einsum("sii->is", gains)
    for start in range(0, S, _CHUNK):
        rows = np.arange(start, min(S, start + _CHUNK))
        k = np.arange(rows.size)
        diff = np.zeros(rows.size)
        for j in range(n_users):
            if j == user:
                dy = (1.0 - tau) * steps[rows]
            else:
                dy = -tau * gains[rows, j, user] / direct[j, rows] * steps[rows]
            Yp = np.repeat(Y[j][None, :], rows.size, axis=0)
            Yp[k, rows] += dy
            lam = _warm_lambda(Yp, w, budgets[j], lams[j])
            Rp = P[j][None, :] - np.maximum(0.0, Yp - lam[:, None])
            if j == user:
                Rp[k, rows] += steps[rows]
            diff += ((Rp - R[j]) * (Rp + R[j])).sum(axis=1)
        out[rows] = diff / steps[rows]
    return out
