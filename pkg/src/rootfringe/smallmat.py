"""Dense kernels for small complex matrices.

Everything here is compiled with numba in ``nogil`` mode so the per-pixel
estimator can call it from worker threads. The public wrappers at the
bottom validate input and raise; the ``_nb`` functions report failure
through return codes because they run inside compiled loops.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba as nb
import numpy as np

from .errors import DegreeZero, NoConvergence, NonFiniteInput

EPS = np.finfo(np.float64).eps
MAX_SWEEPS = 100
ABERTH_MAX_ITER = 200

# status codes shared with the rootmusic kernel
OK = 0
ERR_NONFINITE = 1
ERR_NOCONVERGE = 2
ERR_DEGREE = 3


@dataclass(frozen=True)
class SvdResult:
    U: np.ndarray
    S: np.ndarray
    Vh: np.ndarray


@nb.njit(cache=True, nogil=True)
def _svd_nb(a, u, s, v, want_v=True):
    """One-sided (Hestenes) Jacobi SVD of a square complex matrix.

    Fills ``u``, ``s`` and ``v`` in place so that ``a = u @ diag(s) @ v^H``.
    Returns a status code. Columns are held transposed with split real and
    imaginary parts so the rotation loops run over contiguous memory. With
    ``want_v`` false the right factor is not accumulated and ``v`` is left
    untouched.
    """
    m = a.shape[0]
    br = np.empty((m, m))
    bi = np.empty((m, m))
    vr = np.zeros((m, m))
    vi = np.zeros((m, m))
    fro2 = 0.0
    for i in range(m):
        for j in range(m):
            x = a[i, j]
            if not (np.isfinite(x.real) and np.isfinite(x.imag)):
                return ERR_NONFINITE
            br[j, i] = x.real
            bi[j, i] = x.imag
            fro2 += x.real * x.real + x.imag * x.imag
        vr[i, i] = 1.0
    tiny = (EPS * EPS) * fro2
    tol = m * EPS
    nrm = np.empty(m)

    converged = False
    for _sweep in range(MAX_SWEEPS):
        for p in range(m):
            acc = 0.0
            for i in range(m):
                acc += br[p, i] * br[p, i] + bi[p, i] * bi[p, i]
            nrm[p] = acc
        rotated = False
        for p in range(m - 1):
            for q in range(p + 1, m):
                alpha = nrm[p]
                beta = nrm[q]
                if alpha <= tiny or beta <= tiny:
                    continue
                gr = 0.0
                gi = 0.0
                for i in range(m):
                    gr += br[p, i] * br[q, i] + bi[p, i] * bi[q, i]
                    gi += br[p, i] * bi[q, i] - bi[p, i] * br[q, i]
                ag = np.sqrt(gr * gr + gi * gi)
                if ag <= tol * np.sqrt(alpha * beta):
                    continue
                rotated = True
                phr = gr / ag
                phi = gi / ag
                zeta = (beta - alpha) / (2.0 * ag)
                if zeta >= 0.0:
                    t = 1.0 / (zeta + np.sqrt(1.0 + zeta * zeta))
                else:
                    t = -1.0 / (-zeta + np.sqrt(1.0 + zeta * zeta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                sn = c * t
                # b_p <- c b_p - sn conj(ph) b_q ; b_q <- sn ph b_p + c b_q
                smr = sn * phr
                smi = -sn * phi
                spr = sn * phr
                spi = sn * phi
                for i in range(m):
                    xr = br[p, i]
                    xi = bi[p, i]
                    yr = br[q, i]
                    yi = bi[q, i]
                    br[p, i] = c * xr - (smr * yr - smi * yi)
                    bi[p, i] = c * xi - (smr * yi + smi * yr)
                    br[q, i] = (spr * xr - spi * xi) + c * yr
                    bi[q, i] = (spr * xi + spi * xr) + c * yi
                if not want_v:
                    nrm[p] = alpha - t * ag
                    nrm[q] = beta + t * ag
                    continue
                for i in range(m):
                    xr = vr[p, i]
                    xi = vi[p, i]
                    yr = vr[q, i]
                    yi = vi[q, i]
                    vr[p, i] = c * xr - (smr * yr - smi * yi)
                    vi[p, i] = c * xi - (smr * yi + smi * yr)
                    vr[q, i] = (spr * xr - spi * xi) + c * yr
                    vi[q, i] = (spr * xi + spi * xr) + c * yi
                nrm[p] = alpha - t * ag
                nrm[q] = beta + t * ag
        if not rotated:
            converged = True
            break
    if not converged:
        return ERR_NOCONVERGE

    norms = np.empty(m)
    for j in range(m):
        acc = 0.0
        for i in range(m):
            acc += br[j, i] * br[j, i] + bi[j, i] * bi[j, i]
        norms[j] = np.sqrt(acc)
    order = np.argsort(-norms, kind="mergesort")

    smax = norms[order[0]]
    cutoff = m * EPS * np.sqrt(fro2)
    rank = 0
    for k in range(m):
        j = order[k]
        s[k] = norms[j]
        if want_v:
            for i in range(m):
                v[i, k] = vr[j, i] + 1j * vi[j, i]
        if norms[j] > cutoff and smax > 0.0:
            rank = k + 1
            inv = 1.0 / norms[j]
            for i in range(m):
                u[i, k] = (br[j, i] + 1j * bi[j, i]) * inv
        else:
            for i in range(m):
                u[i, k] = 0.0

    # complete U with an orthonormal basis of the orthogonal complement
    for k in range(rank, m):
        best = -1.0
        best_e = 0
        for e in range(m):
            r2 = 1.0
            for col in range(k):
                r2 -= u[e, col].real ** 2 + u[e, col].imag ** 2
            if r2 > best + 1e-12:
                best = r2
                best_e = e
        w = np.zeros(m, dtype=np.complex128)
        w[best_e] = 1.0
        for _rep in range(2):
            for col in range(k):
                proj = 0.0j
                for i in range(m):
                    proj += u[i, col].conjugate() * w[i]
                for i in range(m):
                    w[i] -= proj * u[i, col]
        wn = 0.0
        for i in range(m):
            wn += w[i].real ** 2 + w[i].imag ** 2
        wn = np.sqrt(wn)
        for i in range(m):
            u[i, k] = w[i] / wn

    # gauge: largest-magnitude entry of each U column real positive
    for k in range(m):
        big = -1.0
        ib = 0
        for i in range(m):
            mag = abs(u[i, k])
            if mag > big:
                big = mag
                ib = i
        phc = (u[ib, k] / abs(u[ib, k])).conjugate()
        for i in range(m):
            u[i, k] *= phc
        if want_v:
            for i in range(m):
                v[i, k] *= phc
    return OK


@nb.njit(cache=True, nogil=True)
def _balance_nb(h):
    """Parlett-Reinsch diagonal balancing, radix 2, in place."""
    n = h.shape[0]
    radix = 2.0
    done = False
    while not done:
        done = True
        for i in range(n):
            c = 0.0
            r = 0.0
            for j in range(n):
                if j != i:
                    c += abs(h[j, i])
                    r += abs(h[i, j])
            if c == 0.0 or r == 0.0:
                continue
            g = r / radix
            f = 1.0
            tot = c + r
            while c < g:
                f *= radix
                c *= radix * radix
            g = r * radix
            while c > g:
                f /= radix
                c /= radix * radix
            if (c + r) / f < 0.95 * tot:
                done = False
                g = 1.0 / f
                for j in range(n):
                    h[i, j] *= g
                for j in range(n):
                    h[j, i] *= f


@nb.njit(cache=True, nogil=True)
def _hessenberg_eig_nb(h, out):
    """Eigenvalues of an upper-Hessenberg complex matrix by shifted QR.

    Single Wilkinson shift with Givens sweeps on the active block;
    ``h`` is destroyed. Returns a status code.
    """
    n = h.shape[0]
    hi = n - 1
    its = 0
    total = 0
    cs = np.empty(n)
    ss = np.empty(n, dtype=np.complex128)
    while hi >= 0:
        if hi == 0:
            out[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            scale = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if scale == 0.0:
                scale = 1.0
            if abs(h[lo, lo - 1]) <= EPS * scale:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            out[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        its += 1
        total += 1
        if total > 60 * n:
            return ERR_NOCONVERGE

        a = h[hi - 1, hi - 1]
        b = h[hi - 1, hi]
        c = h[hi, hi - 1]
        d = h[hi, hi]
        if its % 11 == 10:
            # exceptional shift breaks cycles
            mu = d + 0.75 * abs(h[hi, hi - 1]) * (1.0 + 0.5j)
        else:
            half = 0.5 * (a - d)
            disc = np.sqrt(half * half + b * c)
            m1 = 0.5 * (a + d) + disc
            m2 = 0.5 * (a + d) - disc
            mu = m1 if abs(m1 - d) <= abs(m2 - d) else m2

        for k in range(lo, hi + 1):
            h[k, k] -= mu
        for k in range(lo, hi):
            x = h[k, k]
            y = h[k + 1, k]
            ax = abs(x)
            r = np.sqrt(ax * ax + abs(y) ** 2)
            if r == 0.0:
                cs[k] = 1.0
                ss[k] = 0.0
                continue
            if ax == 0.0:
                cg = 0.0
                sg = y.conjugate() / r
            else:
                cg = ax / r
                sg = (x / ax) * y.conjugate() / r
            cs[k] = cg
            ss[k] = sg
            for j in range(k, hi + 1):
                t1 = h[k, j]
                t2 = h[k + 1, j]
                h[k, j] = cg * t1 + sg * t2
                h[k + 1, j] = -sg.conjugate() * t1 + cg * t2
        for k in range(lo, hi):
            cg = cs[k]
            sg = ss[k]
            top = min(k + 2, hi)
            for i in range(lo, top + 1):
                t1 = h[i, k]
                t2 = h[i, k + 1]
                h[i, k] = cg * t1 + sg.conjugate() * t2
                h[i, k + 1] = -sg * t1 + cg * t2
        for k in range(lo, hi + 1):
            h[k, k] += mu
    return OK


@nb.njit(cache=True, nogil=True)
def _trim_nb(coeffs):
    """Return (first_nonzero, last_nonzero) indices of ascending coeffs."""
    hi = coeffs.shape[0] - 1
    while hi >= 0 and coeffs[hi] == 0.0:
        hi -= 1
    lo = 0
    while lo < hi and coeffs[lo] == 0.0:
        lo += 1
    return lo, hi


@nb.njit(cache=True, nogil=True)
def _companion_roots_nb(coeffs, out):
    """Roots of an ascending-order polynomial via its balanced companion.

    ``out`` must hold at least the trimmed degree; returns (status, count).
    Zero roots from vanishing low-order coefficients are emitted directly.
    """
    lo, hi = _trim_nb(coeffs)
    if hi < 1:
        return ERR_DEGREE, 0
    for k in range(hi + 1):
        if not (np.isfinite(coeffs[k].real) and np.isfinite(coeffs[k].imag)):
            return ERR_NONFINITE, 0
    nz = lo
    for k in range(nz):
        out[k] = 0.0
    d = hi - lo
    if d == 0:
        return OK, nz
    lead = coeffs[hi]
    comp = np.zeros((d, d), dtype=np.complex128)
    for j in range(d):
        comp[0, j] = -coeffs[hi - 1 - j] / lead
    for i in range(1, d):
        comp[i, i - 1] = 1.0
    _balance_nb(comp)
    eig = np.empty(d, dtype=np.complex128)
    status = _hessenberg_eig_nb(comp, eig)
    if status != OK:
        status = _aberth_nb(coeffs[lo:hi + 1], eig)
        if status != OK:
            return status, 0
    for k in range(d):
        out[nz + k] = eig[k]
    return OK, nz + d


@nb.njit(cache=True, nogil=True)
def _newton_polygon_start(absc, out):
    """Initial Aberth guesses from the upper convex hull of log|c_k|."""
    d = absc.shape[0] - 1
    lc = np.empty(d + 1)
    for k in range(d + 1):
        lc[k] = np.log(absc[k]) if absc[k] > 0.0 else -1e30
    hull = np.empty(d + 1, dtype=np.int64)
    nh = 0
    for k in range(d + 1):
        while nh >= 2:
            i = hull[nh - 2]
            j = hull[nh - 1]
            if (lc[j] - lc[i]) * (k - i) <= (lc[k] - lc[i]) * (j - i):
                nh -= 1
            else:
                break
        hull[nh] = k
        nh += 1
    pos = 0
    for h in range(nh - 1):
        a = hull[h]
        b = hull[h + 1]
        n = b - a
        r = np.exp((lc[a] - lc[b]) / n)
        for i in range(n):
            ang = 2.0 * np.pi * i / n + 2.0 * np.pi * a / d + 0.4
            out[pos] = r * (np.cos(ang) + 1j * np.sin(ang))
            pos += 1


@nb.njit(cache=True, nogil=True)
def _aberth_nb(coeffs, out):
    """Aberth-Ehrlich simultaneous iteration over all roots.

    Starting points sit on the radii given by the Newton polygon of the
    coefficient moduli; each root is frozen once its scaled residual drops
    to rounding level. Returns a status code.
    """
    d = coeffs.shape[0] - 1
    absc = np.empty(d + 1)
    for k in range(d + 1):
        absc[k] = abs(coeffs[k])
    _newton_polygon_start(absc, out)
    done = np.zeros(d, dtype=np.bool_)
    remaining = d
    for _it in range(ABERTH_MAX_ITER):
        for k in range(d):
            if done[k]:
                continue
            z = out[k]
            az = abs(z)
            p = coeffs[d]
            dp = 0.0j
            scale = absc[d]
            for j in range(d - 1, -1, -1):
                dp = dp * z + p
                p = p * z + coeffs[j]
                scale = scale * max(az, 1.0) + absc[j]
            if abs(p) <= 8.0 * d * EPS * scale:
                done[k] = True
                remaining -= 1
                continue
            if dp == 0.0:
                # stationary point; nudge off it
                out[k] = z + 1e-3 * (1.0 + az) * (0.6 + 0.8j)
                continue
            ratio = p / dp
            ar = 0.0
            ai = 0.0
            zr = z.real
            zi = z.imag
            for j in range(d):
                if j != k:
                    dr = zr - out[j].real
                    di = zi - out[j].imag
                    den = dr * dr + di * di
                    if den != 0.0:
                        ar += dr / den
                        ai -= di / den
            step = ratio / (1.0 - ratio * (ar + 1j * ai))
            out[k] = z - step
            if abs(step) <= 4.0 * EPS * max(1.0, az):
                done[k] = True
                remaining -= 1
        if remaining == 0:
            return OK
    return ERR_NOCONVERGE


@nb.njit(cache=True, nogil=True)
def _aberth_paired_nb(coeffs, out):
    """Aberth iteration for a conjugate-palindromic polynomial.

    Needs ``c_k == conj(c_(d-k))`` and even degree d. Roots then come in
    pairs (z, 1/conj(z)), so only the d/2 roots inside the unit circle are
    iterated and their reflections enter the Aberth correction implicitly.
    Fills ``out`` with the inner roots followed by their reflections.
    """
    d = coeffs.shape[0] - 1
    n = d // 2
    absc = np.empty(d + 1)
    for k in range(d + 1):
        absc[k] = abs(coeffs[k])
    start = np.empty(d, dtype=np.complex128)
    _newton_polygon_start(absc, start)
    # the polygon is symmetric: the first half of the guesses lie inside
    for k in range(n):
        z = start[k]
        if abs(z) > 1.0:
            z = 1.0 / z.conjugate()
        out[k] = z
    done = np.zeros(n, dtype=np.bool_)
    remaining = n
    status = ERR_NOCONVERGE
    for _it in range(ABERTH_MAX_ITER):
        for k in range(n):
            if done[k]:
                continue
            z = out[k]
            az = abs(z)
            p = coeffs[d]
            dp = 0.0j
            scale = absc[d]
            for j in range(d - 1, -1, -1):
                dp = dp * z + p
                p = p * z + coeffs[j]
                scale = scale * max(az, 1.0) + absc[j]
            if abs(p) <= 8.0 * d * EPS * scale:
                done[k] = True
                remaining -= 1
                continue
            if dp == 0.0:
                out[k] = z * (1.0 - 1e-3) * (0.6 + 0.8j)
                continue
            ratio = p / dp
            ar = 0.0
            ai = 0.0
            zr = z.real
            zi = z.imag
            for j in range(n):
                if j != k:
                    dr = zr - out[j].real
                    di = zi - out[j].imag
                    den = dr * dr + di * di
                    if den != 0.0:
                        ar += dr / den
                        ai -= di / den
                # reflection 1/conj(z_j) = z_j / |z_j|^2
                aj = out[j].real * out[j].real + out[j].imag * out[j].imag
                if aj == 0.0:
                    continue
                dr = zr - out[j].real / aj
                di = zi - out[j].imag / aj
                den = dr * dr + di * di
                if den != 0.0:
                    ar += dr / den
                    ai -= di / den
            step = ratio / (1.0 - ratio * (ar + 1j * ai))
            znew = z - step
            if abs(znew) > 1.0:
                znew = 1.0 / znew.conjugate()
            out[k] = znew
            if abs(step) <= 4.0 * EPS * max(1.0, az):
                done[k] = True
                remaining -= 1
        if remaining == 0:
            status = OK
            break
    for k in range(n):
        z = out[k]
        az2 = z.real * z.real + z.imag * z.imag
        if az2 == 0.0:
            return ERR_NOCONVERGE
        out[n + k] = z / az2
    return status


def svd(m) -> SvdResult:
    """Full SVD of a square complex matrix (2 <= M <= 64)."""
    a = np.ascontiguousarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"svd needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if not 2 <= n <= 64:
        raise ValueError(f"matrix size {n} outside 2..64")
    u = np.empty_like(a)
    v = np.empty_like(a)
    s = np.empty(n)
    status = _svd_nb(a, u, s, v)
    if status == ERR_NONFINITE:
        raise NonFiniteInput("matrix has non-finite entries")
    if status == ERR_NOCONVERGE:
        raise NoConvergence(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")
    return SvdResult(U=u, S=s, Vh=v.conj().T)


ROOT_METHODS = ("qr", "aberth")


def companion_roots(coeffs, method: str = "qr") -> np.ndarray:
    """Roots of a polynomial given by ascending-degree complex coefficients.

    Trailing (highest-degree) zero coefficients are trimmed first; the
    result has exactly as many roots as the trimmed degree. ``method``
    picks shifted QR on the balanced companion matrix or Aberth-Ehrlich
    iteration on the coefficients.
    """
    if method not in ROOT_METHODS:
        raise ValueError(f"method must be one of {ROOT_METHODS}, got {method!r}")
    c = np.ascontiguousarray(np.atleast_1d(coeffs), dtype=np.complex128)
    if c.ndim != 1:
        raise ValueError("coefficients must be one-dimensional")
    out = np.empty(max(c.shape[0] - 1, 1), dtype=np.complex128)
    if method == "qr":
        status, count = _companion_roots_nb(c, out)
    else:
        status, count = _aberth_roots(c, out)
    if status == ERR_DEGREE:
        raise DegreeZero("polynomial has degree < 1 after trimming")
    if status == ERR_NONFINITE:
        raise NonFiniteInput("polynomial has non-finite coefficients")
    if status == ERR_NOCONVERGE:
        raise NoConvergence("root finder did not converge")
    return out[:count].copy()


def _aberth_roots(c, out):
    lo, hi = _trim_nb(c)
    if hi < 1:
        return ERR_DEGREE, 0
    if not np.all(np.isfinite(c[:hi + 1])):
        return ERR_NONFINITE, 0
    out[:lo] = 0.0
    d = hi - lo
    if d == 0:
        return OK, lo
    roots = np.empty(d, dtype=np.complex128)
    status = _aberth_nb(np.ascontiguousarray(c[lo:hi + 1]), roots)
    if status != OK:
        return status, 0
    out[lo:hi] = roots
    return OK, hi


def root_residuals(coeffs, roots) -> np.ndarray:
    """Scaled residual |p(z)| / sum_k |c_k| max(1,|z|)^k for each root."""
    c = np.asarray(coeffs, dtype=np.complex128)
    z = np.asarray(roots, dtype=np.complex128)
    k = np.arange(c.shape[0])
    num = np.abs(np.polynomial.polynomial.polyval(z, c))
    scale = (np.abs(c)[None, :] * np.maximum(1.0, np.abs(z))[:, None] ** k[None, :]).sum(axis=1)
    return num / scale
