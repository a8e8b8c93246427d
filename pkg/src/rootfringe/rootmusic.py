"""Windowed root-MUSIC estimation of local phase and spatial frequency.

Every pixel is modelled inside a (2L+1) x (2L+1) window as a single
complex exponential ``A exp(j(alpha + wx*x + wy*y))``. The dominant left
and right singular vectors of the window span the signal subspace along y
and x; the roots of the noise-subspace polynomials closest to the unit
circle give the two frequencies, and ``alpha`` follows from demodulating
the window by the fitted plane.

Local coordinates run over -L..L with the window centre at 0, so ``alpha``
is the phase at the centre pixel. Matrix rows are y, columns are x.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba as nb
import numpy as np

from . import smallmat
from .errors import DegenerateWindow, FieldTooSmall, NoInteriorRoot, OutOfBounds
from .fields import PhaseMap, wrap

BORDER_POLICIES = ("replicate", "skip")
ROOT_METHODS = ("aberth", "qr")

# per-pixel flags in the diagnostics maps
PIXEL_OK = 0
PIXEL_DEGENERATE = 1
PIXEL_SKIPPED = 2


@dataclass(frozen=True)
class EstimatorConfig:
    L: int = 5
    unit_circle_tol: float = 1e-6
    border_policy: str = "replicate"
    root_method: str = "aberth"

    def __post_init__(self):
        if int(self.L) != self.L or self.L < 1:
            raise ValueError(f"window half-size L must be an integer >= 1, got {self.L}")
        if not 0.0 < self.unit_circle_tol < 0.1:
            raise ValueError(f"unit_circle_tol must lie in (0, 0.1), got {self.unit_circle_tol}")
        if self.border_policy not in BORDER_POLICIES:
            raise ValueError(f"border_policy must be one of {BORDER_POLICIES}")
        if self.root_method not in ROOT_METHODS:
            raise ValueError(f"root_method must be one of {ROOT_METHODS}")

    @property
    def M(self) -> int:
        return 2 * self.L + 1


@dataclass(frozen=True)
class LocalEstimate:
    omega_x: float
    omega_y: float
    alpha: float


def extract_window(field, cx: int, cy: int, L: int, border_policy: str = "replicate") -> np.ndarray:
    """Return the (2L+1)^2 window of ``field`` centred on column cx, row cy."""
    field = np.asarray(field)
    h, w = field.shape
    if h == 0 or w == 0:
        raise ValueError("field is empty")
    ys = np.arange(cy - L, cy + L + 1)
    xs = np.arange(cx - L, cx + L + 1)
    if border_policy == "skip":
        if ys[0] < 0 or xs[0] < 0 or ys[-1] >= h or xs[-1] >= w:
            raise OutOfBounds(f"window at ({cx}, {cy}) with L={L} leaves the {w}x{h} field")
    elif border_policy != "replicate":
        raise ValueError(f"unknown border policy {border_policy!r}")
    ys = np.clip(ys, 0, h - 1)
    xs = np.clip(xs, 0, w - 1)
    return np.ascontiguousarray(field[np.ix_(ys, xs)], dtype=np.complex128)


def _diagonal_sums(c: np.ndarray) -> np.ndarray:
    m = c.shape[0]
    return np.array([np.trace(c, offset=k) for k in range(-(m - 1), m)], dtype=np.complex128)


def music_polynomials(w) -> tuple[np.ndarray, np.ndarray]:
    """Root-MUSIC polynomials (ascending coefficients) for the y and x axes.

    The coefficient of z^(k+M-1) is the sum of the k-th diagonal of the
    noise-subspace projector, which makes ``z^(M-1) u(z)^H Un Un^H u(z)``
    a polynomial of degree 2M-2 with conjugate-palindromic coefficients.
    """
    w = np.asarray(w, dtype=np.complex128)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 3:
        raise ValueError(f"window must be square with M >= 3, got {w.shape}")
    res = smallmat.svd(w)
    un = res.U[:, 1:]
    vn = res.Vh.conj().T[:, 1:]
    cy = un @ un.conj().T
    cx = vn @ vn.conj().T
    return _diagonal_sums(cy), _diagonal_sums(cx)


def _arg(z) -> float:
    a = math.atan2(z.imag, z.real)
    return math.pi if a == -math.pi else a


def select_root(roots, unit_circle_tol: float = 1e-6) -> complex:
    """Pick the root inside (or within tolerance of) the unit circle with largest modulus.

    Ties on modulus go to the smallest argument, then to input order.
    """
    best = None
    best_key = None
    for z in np.asarray(roots, dtype=np.complex128).ravel():
        mag = abs(z)
        if not mag < 1.0 + unit_circle_tol:
            continue
        key = (-mag, _arg(z))
        if best_key is None or key < best_key:
            best, best_key = complex(z), key
    if best is None:
        raise NoInteriorRoot("every root lies outside the unit-circle tolerance band")
    return best


# --------------------------------------------------------------------------
# compiled per-window kernel


@nb.njit(cache=True, nogil=True)
def _select_root_nb(roots, n, tol):
    best = -1
    best_mag = -1.0
    best_arg = 0.0
    for k in range(n):
        z = roots[k]
        mag = abs(z)
        if not mag < 1.0 + tol:
            continue
        a = math.atan2(z.imag, z.real)
        if a == -math.pi:
            a = math.pi
        if mag > best_mag or (mag == best_mag and a < best_arg):
            best = k
            best_mag = mag
            best_arg = a
    return best


@nb.njit(cache=True, nogil=True)
def _projector_poly_nb(vec, coeffs):
    # Un Un^H = I - u1 u1^H for unitary U, so the k-th diagonal sum is
    # M*[k == 0] - sum_i u1[i] conj(u1[i+k]); negative k mirror by conjugation.
    m = vec.shape[0]
    for k in range(m):
        acc = 0.0j
        for i in range(m - k):
            acc += vec[i] * vec[i + k].conjugate()
        coeffs[k + m - 1] = -acc
        coeffs[m - 1 - k] = -acc.conjugate()
    coeffs[m - 1] = m + coeffs[m - 1].real


@nb.njit(cache=True, nogil=True)
def _poly_root_nb(coeffs, roots, tol, use_qr):
    """Selected root of one axis polynomial; returns (status, root).

    The default path uses the paired Aberth iteration, which relies on the
    exact conjugate-palindromic coefficients built by _projector_poly_nb;
    the companion-matrix QR is the fallback and the ``use_qr`` path.
    """
    d = coeffs.shape[0] - 1
    status = smallmat.ERR_NOCONVERGE
    n = d
    if not use_qr and coeffs[0] != 0.0:
        status = smallmat._aberth_paired_nb(coeffs, roots)
    if status != smallmat.OK:
        status, n = smallmat._companion_roots_nb(coeffs, roots)
    if status != smallmat.OK:
        return status, 0.0j
    k = _select_root_nb(roots, n, tol)
    if k < 0:
        return -1, 0.0j
    return smallmat.OK, roots[k]


@nb.njit(cache=True, nogil=True)
def _estimate_window_nb(w, tol, use_qr, u, s, v1, cy, cx, roots):
    """Estimate (omega_x, omega_y, alpha) for one window; last item is ok flag.

    Only the dominant right singular vector is needed, so the Jacobi sweep
    skips accumulating V and takes v1 = w^H u1 / s1.
    """
    m = w.shape[0]
    L = (m - 1) // 2
    status = smallmat._svd_nb(w, u, s, u, False)
    if status != smallmat.OK or s[0] == 0.0:
        return 0.0, 0.0, 0.0, False
    inv = 1.0 / s[0]
    for j in range(m):
        acc = 0.0j
        for i in range(m):
            acc += w[i, j].conjugate() * u[i, 0]
        v1[j] = acc * inv
    _projector_poly_nb(u[:, 0], cy)
    _projector_poly_nb(v1, cx)
    st_y, zy = _poly_root_nb(cy, roots, tol, use_qr)
    if st_y != smallmat.OK:
        return 0.0, 0.0, 0.0, False
    st_x, zx = _poly_root_nb(cx, roots, tol, use_qr)
    if st_x != smallmat.OK:
        return 0.0, 0.0, 0.0, False
    wy = math.atan2(zy.imag, zy.real)
    wx = -math.atan2(zx.imag, zx.real)
    acc = 0.0j
    for iy in range(m):
        y = iy - L
        for ix in range(m):
            x = ix - L
            ph = wx * x + wy * y
            acc += w[iy, ix] * (math.cos(ph) - 1j * math.sin(ph))
    alpha = math.atan2(acc.imag, acc.real)
    if alpha == -math.pi:
        alpha = math.pi
    return wx, wy, alpha, True


@nb.njit(cache=True, nogil=True)
def _estimate_rows_nb(padded, L, r0, r1, height, width, tol, use_qr, skip_border, alpha, wxo, wyo, flags):
    m = 2 * L + 1
    u = np.empty((m, m), dtype=np.complex128)
    v = np.empty(m, dtype=np.complex128)
    s = np.empty(m)
    cy = np.empty(2 * m - 1, dtype=np.complex128)
    cx = np.empty(2 * m - 1, dtype=np.complex128)
    roots = np.empty(2 * m - 2, dtype=np.complex128)
    w = np.empty((m, m), dtype=np.complex128)
    for py in range(r0, r1):
        for px in range(width):
            if skip_border and (py < L or px < L or py >= height - L or px >= width - L):
                flags[py, px] = PIXEL_SKIPPED
                alpha[py, px] = 0.0
                wxo[py, px] = 0.0
                wyo[py, px] = 0.0
                continue
            for i in range(m):
                for j in range(m):
                    w[i, j] = padded[py + i, px + j]
            ox, oy, a, ok = _estimate_window_nb(w, tol, use_qr, u, s, v, cy, cx, roots)
            alpha[py, px] = a
            wxo[py, px] = ox
            wyo[py, px] = oy
            flags[py, px] = PIXEL_OK if ok else PIXEL_DEGENERATE


@nb.njit(cache=True)
def _fill_degenerate_nb(alpha, flags):
    """Give each degenerate pixel the alpha of the last good pixel in scan order."""
    a = alpha.ravel()
    f = flags.ravel()
    n = a.shape[0]
    first_good = -1
    for i in range(n):
        if f[i] == PIXEL_OK:
            first_good = i
            break
    if first_good < 0:
        return
    last = a[first_good]
    for i in range(n):
        if f[i] == PIXEL_OK:
            last = a[i]
        elif f[i] == PIXEL_DEGENERATE:
            a[i] = last


def estimate_pixel(w, cfg: EstimatorConfig | None = None) -> LocalEstimate:
    """Estimate the local plane-wave parameters of one window."""
    cfg = cfg or EstimatorConfig()
    w = np.ascontiguousarray(w, dtype=np.complex128)
    m = w.shape[0]
    if w.ndim != 2 or w.shape[1] != m or m < 3 or m % 2 == 0:
        raise ValueError(f"window must be square with odd M >= 3, got {w.shape}")
    u = np.empty((m, m), dtype=np.complex128)
    v = np.empty(m, dtype=np.complex128)
    s = np.empty(m)
    cy = np.empty(2 * m - 1, dtype=np.complex128)
    cx = np.empty(2 * m - 1, dtype=np.complex128)
    roots = np.empty(2 * m - 2, dtype=np.complex128)
    ox, oy, a, ok = _estimate_window_nb(
        w, cfg.unit_circle_tol, cfg.root_method == "qr", u, s, v, cy, cx, roots
    )
    if not ok:
        raise DegenerateWindow("window has no usable signal subspace root")
    return LocalEstimate(omega_x=ox, omega_y=oy, alpha=a)


@dataclass
class FieldEstimate:
    alpha: np.ndarray
    omega_x: np.ndarray
    omega_y: np.ndarray
    flags: np.ndarray

    @property
    def degenerate(self) -> int:
        return int(np.count_nonzero(self.flags == PIXEL_DEGENERATE))

    @property
    def skipped(self) -> int:
        return int(np.count_nonzero(self.flags == PIXEL_SKIPPED))


def estimate_parameters(field, cfg: EstimatorConfig | None = None, threads: int = 1) -> FieldEstimate:
    """Run the window estimator at every pixel.

    Rows are split into contiguous blocks handed to a thread pool; each
    pixel depends only on its own window, so the result is bitwise
    independent of ``threads``.
    """
    cfg = cfg or EstimatorConfig()
    field = np.asarray(field, dtype=np.complex128)
    if field.ndim != 2:
        raise ValueError("field must be 2-D")
    h, w = field.shape
    L = cfg.L
    if h < cfg.M or w < cfg.M:
        raise FieldTooSmall(f"{w}x{h} field is smaller than the {cfg.M}x{cfg.M} window")
    threads = max(1, int(threads))
    padded = np.pad(field, L, mode="edge")
    alpha = np.zeros((h, w))
    wx = np.zeros((h, w))
    wy = np.zeros((h, w))
    flags = np.zeros((h, w), dtype=np.int8)
    args = (cfg.unit_circle_tol, cfg.root_method == "qr", cfg.border_policy == "skip", alpha, wx, wy, flags)

    if threads == 1:
        _estimate_rows_nb(padded, L, 0, h, h, w, *args)
    else:
        nblocks = min(h, threads * 4)
        edges = np.linspace(0, h, nblocks + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_estimate_rows_nb, padded, L, int(r0), int(r1), h, w, *args)
                for r0, r1 in zip(edges[:-1], edges[1:])
                if r1 > r0
            ]
            for f in futures:
                f.result()
    _fill_degenerate_nb(alpha, flags)
    return FieldEstimate(alpha=alpha, omega_x=wx, omega_y=wy, flags=flags)


def estimate_field(field, cfg: EstimatorConfig | None = None, threads: int = 1):
    """Wrapped phase map plus diagnostics for a complex fringe field."""
    est = estimate_parameters(field, cfg, threads)
    diagnostics = {
        "degenerate_pixels": est.degenerate,
        "skipped_pixels": est.skipped,
        "pixels": int(est.alpha.size),
    }
    return PhaseMap(wrap(est.alpha), kind="wrapped"), diagnostics
