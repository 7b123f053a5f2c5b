"""Hot numeric kernels, each in a numba and a pure-numpy flavour.

The cumulative-link likelihood works on *patterns*: distinct rows of
(target category, parent codes) with integer weights. For every pattern
the kernel needs the linear predictor, the two cut arguments and the link
density at both; the numba version does this in one pass without building
dense design matrices.

Set ``ORDCD_DISABLE_NUMBA=1`` to force the numpy path (also used
automatically when numba cannot be imported). Both paths are importable
explicitly for tests and benchmarks.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy import special

PROBIT = 0
LOGIT = 1

_SQRT2 = math.sqrt(2.0)
_INV_SQRT2PI = 1.0 / math.sqrt(2.0 * math.pi)
TINY = 1e-300

_disabled = os.environ.get("ORDCD_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _disabled:
        raise ImportError("numba disabled by ORDCD_DISABLE_NUMBA")
    import numba

    HAVE_NUMBA = True
except ImportError:
    numba = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


# --------------------------------------------------------------------------
# numpy path


def cdf_np(x, link):
    x = np.asarray(x, dtype=float)
    if link == PROBIT:
        return special.ndtr(x)
    return special.expit(x)


def pdf_np(x, link):
    x = np.asarray(x, dtype=float)
    if link == PROBIT:
        return np.exp(-0.5 * x * x) * _INV_SQRT2PI
    F = special.expit(x)
    return F * special.expit(-x)


def dpdf_np(x, link):
    x = np.asarray(x, dtype=float)
    if link == PROBIT:
        return -x * pdf_np(x, link)
    F = special.expit(x)
    return F * special.expit(-x) * (1.0 - 2.0 * F)


def _pattern_terms_np(cat, bidx, phi, L, link):
    """Per-pattern eta, u, l, P and link densities (numpy, vectorised)."""
    C = cat.shape[0]
    eta = np.full(C, phi[0])
    if bidx.shape[1]:
        vals = np.where(bidx >= 0, phi[np.maximum(bidx, 0)], 0.0)
        eta = eta + vals.sum(axis=1)
    goff = phi.shape[0] - (L - 2)
    # cut vector gamma_0..gamma_L with -inf/0/+inf sentinels
    cuts = np.concatenate(([-np.inf, 0.0], phi[goff:], [np.inf]))
    top = cat == L
    bot = cat == 1
    u = np.where(top, 0.0, cuts[cat] - eta)
    lo = np.where(bot, 0.0, cuts[cat - 1] - eta)
    Fu = np.where(top, 1.0, cdf_np(u, link))
    Fl = np.where(bot, 0.0, cdf_np(lo, link))
    # upper-tail cells: difference of survival functions avoids cancellation
    upper = (~bot) & (lo > 0)
    P = np.where(upper, np.where(top, cdf_np(-lo, link), cdf_np(-lo, link) - cdf_np(-u, link)), Fu - Fl)
    P = np.maximum(P, TINY)
    fu = np.where(top, 0.0, pdf_np(u, link))
    fl = np.where(bot, 0.0, pdf_np(lo, link))
    dfu = np.where(top, 0.0, dpdf_np(u, link))
    dfl = np.where(bot, 0.0, dpdf_np(lo, link))
    return P, fu, fl, dfu, dfl


def nll_grad_hess_np(cat, bidx, w, phi, L, link, order):
    """NLL (and gradient / Hessian w.r.t. phi for ``order`` 1 / 2).

    ``phi = (alpha, betas..., gamma_2..gamma_{L-1})``; ``bidx[c, k]`` is the
    phi index of parent ``k``'s coefficient in pattern ``c`` or -1 for a
    coefficient fixed at zero.
    """
    P, fu, fl, dfu, dfl = _pattern_terms_np(cat, bidx, phi, L, link)
    nll = -float(np.dot(w, np.log(P)))
    d = phi.shape[0]
    if order == 0:
        return nll, None, None
    C = cat.shape[0]
    goff = d - (L - 2)
    rows = np.arange(C)
    # dense cut-argument design rows: u = a_u . phi, l = a_l . phi (+ const)
    Ab = np.zeros((C, d))
    Ab[:, 0] = -1.0
    for k in range(bidx.shape[1]):
        ok = bidx[:, k] >= 0
        Ab[rows[ok], bidx[ok, k]] = -1.0
    Au = Ab.copy()
    Al = Ab.copy()
    iu = cat - 2 + goff
    okU = (cat >= 2) & (cat <= L - 1)
    Au[rows[okU], iu[okU]] = 1.0
    il = cat - 3 + goff
    okL = (cat >= 3) & (cat <= L)
    Al[rows[okL], il[okL]] = 1.0
    G = (fu / P)[:, None] * Au - (fl / P)[:, None] * Al
    grad = -(w @ G)
    if order == 1:
        return nll, grad, None
    cu = w * dfu / P
    cl = w * dfl / P
    H = -(Au.T @ (cu[:, None] * Au) - Al.T @ (cl[:, None] * Al) - G.T @ (w[:, None] * G))
    return nll, grad, H


def encode_rows_np(cols, radices):
    """Mixed-radix code of each row of ``cols`` (0-based digits)."""
    code = np.zeros(cols.shape[0], dtype=np.int64)
    for k in range(cols.shape[1]):
        code = code * radices[k] + cols[:, k]
    return code


def sample_codes_np(eta, cuts, u, link):
    """Category 1 + #{l : U > F(cut_l - eta)} for each row (inverse-CDF draw)."""
    cum = cdf_np(cuts[None, :] - eta[:, None], link)
    return 1 + np.sum(u[:, None] > cum, axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# numba path

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def _cdf(x, link):
        if link == PROBIT:
            return 0.5 * math.erfc(-x / _SQRT2)
        if x >= 0:
            return 1.0 / (1.0 + math.exp(-x))
        e = math.exp(x)
        return e / (1.0 + e)

    @numba.njit(cache=True, nogil=True)
    def _pdf(x, link):
        if link == PROBIT:
            return math.exp(-0.5 * x * x) * _INV_SQRT2PI
        F = _cdf(x, link)
        return F * _cdf(-x, link)

    @numba.njit(cache=True, nogil=True)
    def _dpdf(x, link):
        if link == PROBIT:
            return -x * math.exp(-0.5 * x * x) * _INV_SQRT2PI
        F = _cdf(x, link)
        return F * _cdf(-x, link) * (1.0 - 2.0 * F)

    @numba.njit(cache=True, nogil=True)
    def nll_grad_hess_nb(cat, bidx, w, phi, L, link, order):
        d = phi.shape[0]
        C = cat.shape[0]
        m = bidx.shape[1]
        goff = d - (L - 2)
        grad = np.zeros(d)
        H = np.zeros((d, d))
        idx = np.empty(m + 3, dtype=np.int64)
        au = np.empty(m + 3)
        al = np.empty(m + 3)
        g = np.empty(m + 3)
        nll = 0.0
        for c in range(C):
            ell = cat[c]
            eta = phi[0]
            for k in range(m):
                b = bidx[c, k]
                if b >= 0:
                    eta += phi[b]
            top = ell == L
            bot = ell == 1
            u = 0.0
            lo = 0.0
            if not top:
                u = (0.0 if ell == 1 else phi[goff + ell - 2]) - eta
            if not bot:
                lo = (0.0 if ell == 2 else phi[goff + ell - 3]) - eta
            if bot:
                P = _cdf(u, link)
            elif top:
                P = _cdf(-lo, link)
            elif lo > 0:
                P = _cdf(-lo, link) - _cdf(-u, link)
            else:
                P = _cdf(u, link) - _cdf(lo, link)
            if P < TINY:
                P = TINY
            wc = w[c]
            nll -= wc * math.log(P)
            if order == 0:
                continue
            fu = 0.0 if top else _pdf(u, link)
            fl = 0.0 if bot else _pdf(lo, link)
            # sparse rows of the cut-argument design
            nz = 0
            idx[nz] = 0
            au[nz] = -1.0
            al[nz] = -1.0
            nz += 1
            for k in range(m):
                b = bidx[c, k]
                if b >= 0:
                    idx[nz] = b
                    au[nz] = -1.0
                    al[nz] = -1.0
                    nz += 1
            if 2 <= ell <= L - 1:
                idx[nz] = goff + ell - 2
                au[nz] = 1.0
                al[nz] = 0.0
                nz += 1
            if 3 <= ell <= L:
                idx[nz] = goff + ell - 3
                au[nz] = 0.0
                al[nz] = 1.0
                nz += 1
            for a in range(nz):
                g[a] = (fu * au[a] - fl * al[a]) / P
                grad[idx[a]] -= wc * g[a]
            if order < 2:
                continue
            dfu = 0.0 if top else _dpdf(u, link)
            dfl = 0.0 if bot else _dpdf(lo, link)
            cu = dfu / P
            cl = dfl / P
            for a in range(nz):
                ia = idx[a]
                for b2 in range(nz):
                    H[ia, idx[b2]] -= wc * (cu * au[a] * au[b2] - cl * al[a] * al[b2] - g[a] * g[b2])
        return nll, grad, H

    @numba.njit(cache=True, nogil=True)
    def encode_rows_nb(cols, radices):
        n, q = cols.shape
        code = np.zeros(n, dtype=np.int64)
        for i in range(n):
            c = 0
            for k in range(q):
                c = c * radices[k] + cols[i, k]
            code[i] = c
        return code

    @numba.njit(cache=True, nogil=True)
    def sample_codes_nb(eta, cuts, u, link):
        n = eta.shape[0]
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            code = 1
            for l in range(cuts.shape[0]):
                if u[i] > _cdf(cuts[l] - eta[i], link):
                    code += 1
                else:
                    break
            out[i] = code
        return out


# --------------------------------------------------------------------------
# dispatch


def nll_grad_hess(cat, bidx, w, phi, L, link, order=2):
    if HAVE_NUMBA:
        nll, grad, H = nll_grad_hess_nb(cat, bidx, w, phi, L, link, order)
        if order == 0:
            return nll, None, None
        return nll, grad, (H if order == 2 else None)
    return nll_grad_hess_np(cat, bidx, w, phi, L, link, order)


def encode_rows(cols, radices):
    cols = np.ascontiguousarray(cols, dtype=np.int64)
    radices = np.ascontiguousarray(radices, dtype=np.int64)
    if HAVE_NUMBA:
        return encode_rows_nb(cols, radices)
    return encode_rows_np(cols, radices)


def sample_codes(eta, cuts, u, link):
    eta = np.ascontiguousarray(eta, dtype=float)
    cuts = np.ascontiguousarray(cuts, dtype=float)
    u = np.ascontiguousarray(u, dtype=float)
    if HAVE_NUMBA:
        return sample_codes_nb(eta, cuts, u, link)
    return sample_codes_np(eta, cuts, u, link)
