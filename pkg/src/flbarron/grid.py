"""Discretized frequency-space representation of functions on R^d.

Two grid kinds cover everything at desk scale:

* ``radial`` grids hold samples of a radial function on (0, r_max].  They
  are built from quadrature cells with three Gauss-Legendre nodes each, so
  polynomials up to degree 5 are integrated exactly per cell, no node ever
  sits at r = 0, and all weights are positive.
* ``tensor`` grids are uniform symmetric lattices on [-X, X]^d containing
  the origin (odd point count per axis), integrated by the composite
  trapezoidal rule.

The module also owns the structured convolutions used to apply a potential
in frequency space: full/one-particle/pairwise lattice convolutions on
tensor grids, and a high-order bipolar-coordinate convolution for radial
data in three dimensions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from math import comb

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import (
    DimensionMismatchError,
    InvalidArgumentError,
    UnsupportedKindError,
    UnsupportedScaleError,
)

EULER_GAMMA = 0.5772156649015329

_GX3, _GW3 = leggauss(3)
_GX7, _GW7 = leggauss(7)


def omega_d(d: int) -> float:
    """Surface area of the unit sphere in R^d, 2 pi^(d/2) / Gamma(d/2)."""
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


# ---------------------------------------------------------------------------
# grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FreqGrid:
    """Frequency grid, either radial (1-D nodes + weights) or tensor lattice.

    Radial grids carry ``nodes``/``weights``/``cell_bounds``; tensor grids
    carry ``extent`` (half-width X per axis) and ``count`` (odd nodes per
    axis).  ``dim`` is the ambient dimension in both cases.
    """

    dim: int
    kind: str  # "radial" | "tensor"
    nodes: np.ndarray | None = field(default=None, repr=False)
    weights: np.ndarray | None = field(default=None, repr=False)
    cell_bounds: np.ndarray | None = field(default=None, repr=False)
    extent: float | None = None
    count: int | None = None

    def __post_init__(self):
        if self.kind not in ("radial", "tensor"):
            raise InvalidArgumentError(f"unknown grid kind {self.kind!r}")
        if self.dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        if self.kind == "radial":
            r = self.nodes
            if r is None or self.weights is None:
                raise InvalidArgumentError("radial grid needs nodes and weights")
            if np.any(np.diff(r) <= 0) or r[0] < 0:
                raise InvalidArgumentError("radial nodes must be strictly increasing, r0 >= 0")
            if np.any(self.weights <= 0):
                raise InvalidArgumentError("radial weights must be positive")
        else:
            if self.extent is None or self.count is None:
                raise InvalidArgumentError("tensor grid needs extent and count")
            if self.count % 2 == 0 or self.count < 3:
                raise InvalidArgumentError("tensor axis count must be odd and >= 3 (origin on grid)")

    # -- tensor helpers ----------------------------------------------------

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / (self.count - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.extent, self.extent, self.count)

    @property
    def shape(self) -> tuple:
        if self.kind == "tensor":
            return (self.count,) * self.dim
        return (len(self.nodes),)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def upper_edge(self) -> float:
        """Outer radius covered by the quadrature (cell boundary, not node)."""
        if self.kind == "radial":
            return float(self.cell_bounds[-1]) if self.cell_bounds is not None \
                else float(self.nodes[-1])
        return float(self.extent)

    def radius_mesh(self) -> np.ndarray:
        """|xi| at every node (tensor: full lattice, radial: the node radii)."""
        if self.kind == "radial":
            return self.nodes
        ax = self.axis
        sq = np.zeros(self.shape)
        for k in range(self.dim):
            shape = [1] * self.dim
            shape[k] = self.count
            sq = sq + (ax ** 2).reshape(shape)
        return np.sqrt(sq)

    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights per node (tensor: composite trapezoid)."""
        if self.kind == "radial":
            return self.weights
        w1 = np.full(self.count, self.spacing)
        w1[0] *= 0.5
        w1[-1] *= 0.5
        w = np.ones(self.shape)
        for k in range(self.dim):
            shape = [1] * self.dim
            shape[k] = self.count
            w = w * w1.reshape(shape)
        return w


def _gauss3_cells(bounds: np.ndarray):
    a, b = bounds[:-1], bounds[1:]
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    nodes = (mid[:, None] + half[:, None] * _GX3[None, :]).ravel()
    weights = (half[:, None] * _GW3[None, :]).ravel()
    return nodes, weights


def make_radial_grid(d: int, r_max: float, count: int, scheme: str = "uniform",
                     r_min: float | None = None) -> FreqGrid:
    """Radial quadrature grid on [0, r_max] with ``count`` nodes (3 per cell).

    ``uniform`` uses equal cells; ``log-uniform`` uses geometric cells from
    ``r_min`` (default r_max * 1e-8) preceded by one linear cell [0, r_min],
    so the quadrature is still exact for cubics on the whole of [0, r_max].
    The requested count is rounded down to a multiple of 3.
    """
    if d < 1:
        raise InvalidArgumentError("dimension must be >= 1")
    if not (r_max > 0):
        raise InvalidArgumentError("r_max must be positive")
    if count < 8:
        raise InvalidArgumentError("count must be >= 8")
    ncells = max(count // 3, 3)
    if scheme == "uniform":
        bounds = np.linspace(0.0, r_max, ncells + 1)
    elif scheme == "log-uniform":
        lo = r_max * 1e-8 if r_min is None else r_min
        if not (0 < lo < r_max):
            raise InvalidArgumentError("r_min must lie in (0, r_max)")
        geo = lo * (r_max / lo) ** (np.arange(ncells) / (ncells - 1))
        bounds = np.concatenate([[0.0], geo])
    else:
        raise InvalidArgumentError(f"unknown scheme {scheme!r}")
    nodes, weights = _gauss3_cells(bounds)
    return FreqGrid(dim=d, kind="radial", nodes=nodes, weights=weights, cell_bounds=bounds)


def make_tensor_grid(d: int, extent: float, count: int) -> FreqGrid:
    """Uniform symmetric lattice on [-extent, extent]^d, odd count per axis."""
    if count % 2 == 0:
        count += 1
    if d > 3:
        raise UnsupportedScaleError("tensor grids are capped at total dimension 3")
    return FreqGrid(dim=d, kind="tensor", extent=float(extent), count=int(count))


# ---------------------------------------------------------------------------
# radial profiles (closed-form transforms)
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Closed-form (or tabulated) radial function of |xi|.

    kinds and params:
      power            (C, a)       C * r^a
      bracket_power    (C, a)       C * (1+r^2)^(a/2)
      rational_bracket (A, c, m)    A * (1 + c r^2)^(-m)
      gaussian         (A, c)       A * exp(-c r^2)
      log_kernel       (C,)         C * (ln r + euler_gamma)
      tabulated        ()           interpolant + fitted power-law tail

    ``decay`` is the tail exponent p with |f(r)| ~ C_tail r^p (p < 0) when
    known, used for truncation-tail estimates; ``window`` restricts support
    to [lo, hi) (None = unbounded side).
    """

    kind: str
    params: tuple = ()
    valid_min: float = 0.0
    decay: float | None = None
    window: tuple | None = None
    table_nodes: np.ndarray | None = field(default=None, repr=False)
    table_values: np.ndarray | None = field(default=None, repr=False)
    tail_model: tuple | None = None  # (A, p1, B, p2): A r^p1 + B r^p2 beyond table

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        v = self._eval_raw(r)
        if self.window is not None:
            lo, hi = self.window
            mask = np.ones_like(v, dtype=bool)
            if lo is not None:
                mask &= r >= lo
            if hi is not None:
                mask &= r < hi
            v = np.where(mask, v, 0.0)
        return v

    def _eval_raw(self, r):
        k, p = self.kind, self.params
        if k == "power":
            C, a = p
            with np.errstate(divide="ignore"):
                return C * np.where(r > 0, r, np.nan) ** a if a < 0 else C * r ** a
        if k == "bracket_power":
            C, a = p
            return C * (1.0 + r * r) ** (a / 2.0)
        if k == "rational_bracket":
            A, c, m = p
            return A * (1.0 + c * r * r) ** (-m)
        if k == "gaussian":
            A, c = p
            return A * np.exp(-c * r * r)
        if k == "log_kernel":
            (C,) = p
            with np.errstate(divide="ignore"):
                return C * (np.log(np.where(r > 0, r, np.nan)) + EULER_GAMMA)
        if k == "tabulated":
            return self._eval_table(r)
        raise UnsupportedKindError(f"unknown profile kind {k!r}")

    def _eval_table(self, r):
        nodes, vals = self.table_nodes, self.table_values
        out = np.interp(r, nodes, vals)
        if self.tail_model is not None:
            A, p1, B, p2 = self.tail_model
            hi = r > nodes[-1]
            if np.any(hi):
                rh = np.asarray(r)[hi]
                out = np.asarray(out)
                out[hi] = A * rh ** p1 + B * rh ** p2
        return out

    def tail_exponent(self) -> float | None:
        """exponent p with |f| ~ C r^p at infinity, None if unknown."""
        if self.decay is not None:
            return self.decay
        k, p = self.kind, self.params
        if k == "power":
            return p[1]
        if k == "bracket_power":
            return p[1]
        if k == "rational_bracket":
            return -2.0 * p[2]
        if k == "gaussian":
            return None  # super-polynomial; treated as negligible tail
        if k == "tabulated" and self.tail_model is not None:
            return self.tail_model[1]
        return None

    def tail_coefficient(self) -> float | None:
        if self.window is not None and self.window[1] is not None:
            return 0.0  # compactly supported: no tail
        k, p = self.kind, self.params
        if k == "power":
            return abs(p[0])
        if k == "bracket_power":
            return abs(p[0])
        if k == "rational_bracket":
            A, c, m = p
            return abs(A) * c ** (-m)
        if k == "gaussian":
            return 0.0
        if k == "tabulated" and self.tail_model is not None:
            return abs(self.tail_model[0])
        return None

    def windowed(self, lo=None, hi=None) -> "RadialProfile":
        return replace(self, window=(lo, hi))


def tabulated_profile(nodes, values, tail_model=None, decay=None) -> RadialProfile:
    return RadialProfile(kind="tabulated", table_nodes=np.asarray(nodes, float),
                         table_values=np.asarray(values, float),
                         tail_model=tail_model, decay=decay)


# ---------------------------------------------------------------------------
# sampled functions
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class FreqFunction:
    """Sampled Fourier transform on a FreqGrid (the universal value carrier)."""

    grid: FreqGrid
    values: np.ndarray
    radial_flag: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values)
        if self.values.shape != self.grid.shape:
            if self.values.size == self.grid.size:
                self.values = self.values.reshape(self.grid.shape)
            else:
                raise DimensionMismatchError(
                    f"values shape {self.values.shape} does not match grid {self.grid.shape}")
        if self.grid.kind == "radial":
            self.radial_flag = True

    def copy_with(self, values) -> "FreqFunction":
        return FreqFunction(self.grid, np.asarray(values), self.radial_flag)

    # -- serialization (bit-exact round trip through JSON) -----------------

    def to_json_dict(self) -> dict:
        g = self.grid
        vals = np.asarray(self.values, dtype=complex).ravel()
        d = {
            "dim": g.dim,
            "kind": g.kind,
            "radial_flag": bool(self.radial_flag),
            "values": [[z.real, z.imag] for z in vals],
        }
        if g.kind == "radial":
            d["nodes"] = list(map(float, g.nodes))
            d["weights"] = list(map(float, g.weights))
            d["cell_bounds"] = list(map(float, g.cell_bounds)) if g.cell_bounds is not None else None
        else:
            d["axes"] = {"extent": g.extent, "count": g.count}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @staticmethod
    def from_json_dict(d: dict) -> "FreqFunction":
        if d["kind"] == "radial":
            cb = d.get("cell_bounds")
            grid = FreqGrid(dim=d["dim"], kind="radial",
                            nodes=np.array(d["nodes"]), weights=np.array(d["weights"]),
                            cell_bounds=None if cb is None else np.array(cb))
        else:
            grid = FreqGrid(dim=d["dim"], kind="tensor",
                            extent=d["axes"]["extent"], count=d["axes"]["count"])
        vals = np.array([complex(re, im) for re, im in d["values"]])
        return FreqFunction(grid, vals.reshape(grid.shape), d.get("radial_flag", False))

    @staticmethod
    def from_json(s: str) -> "FreqFunction":
        return FreqFunction.from_json_dict(json.loads(s))


def sample_profile(profile: RadialProfile, grid: FreqGrid) -> FreqFunction:
    """Sample a radial profile on a radial grid."""
    if grid.kind != "radial":
        raise DimensionMismatchError("sample_profile expects a radial grid")
    return FreqFunction(grid, profile(grid.nodes), radial_flag=True)


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def radial_integral(f: FreqFunction) -> float:
    """integral over R^d of a radial function: omega_d * sum_j w_j f(r_j) r_j^(d-1)."""
    if not f.radial_flag or f.grid.kind != "radial":
        raise DimensionMismatchError("radial_integral needs a radial FreqFunction")
    g = f.grid
    vals = np.real_if_close(f.values)
    return float(omega_d(g.dim) * np.sum(g.weights * vals * g.nodes ** (g.dim - 1)))


def tensor_integral(f: FreqFunction) -> complex:
    g = f.grid
    if g.kind != "tensor":
        raise DimensionMismatchError("tensor_integral needs a tensor-grid function")
    val = np.sum(g.trapezoid_weights() * f.values)
    return complex(val)


# ---------------------------------------------------------------------------
# tensor-grid convolution
# ---------------------------------------------------------------------------

def _fft_lin_convolve(u: np.ndarray, kernel: np.ndarray, axes: tuple) -> np.ndarray:
    """Linear (zero-padded) convolution of u with kernel along ``axes``.

    kernel's shape must equal u's shape on ``axes`` (odd length M per axis,
    center = index (M-1)/2) and be singleton elsewhere.  Returns the "same"
    central part: out[a] = sum_j kernel[j] * u[a - j + m].
    """
    from scipy.fft import next_fast_len

    pad = {}
    for ax in axes:
        M = u.shape[ax]
        pad[ax] = next_fast_len(2 * M - 1)
    sizes = [pad[ax] for ax in axes]
    Uf = np.fft.fftn(u, s=sizes, axes=axes)
    Kf = np.fft.fftn(kernel, s=sizes, axes=axes)
    full = np.fft.ifftn(Uf * Kf, s=sizes, axes=axes)
    sl = [slice(None)] * u.ndim
    for ax in axes:
        M = u.shape[ax]
        m = (M - 1) // 2
        sl[ax] = slice(m, m + M)
    out = full[tuple(sl)]
    if not (np.iscomplexobj(u) or np.iscomplexobj(kernel)):
        out = out.real
    return out


def _cell_average_indices(radius_idx: np.ndarray, n_cells: float = 3.0) -> np.ndarray:
    return radius_idx <= n_cells


def sample_kernel_on_lattice(profile: RadialProfile, n: int, grid: FreqGrid,
                             shift: np.ndarray | None = None) -> np.ndarray:
    """Sample V_hat on the n-dim sub-lattice with trapezoid weights folded in.

    Cells within 3 lattice spacings of the origin are replaced by cell
    averages (subsampled 9^n per cell) so integrable singularities such as
    |theta|^(t-n) are integrated rather than evaluated at the node.
    A nonzero real-space shift contributes the exact phase factor.
    """
    ax = grid.axis
    h = grid.spacing
    mesh = np.stack(np.meshgrid(*([ax] * n), indexing="ij"), axis=-1)  # (...,n)
    radius = np.linalg.norm(mesh, axis=-1)
    vals = np.asarray(profile(np.where(radius > 0, radius, h)), dtype=float).copy()
    sing = profile.kind in ("power", "log_kernel") or (
        profile.kind == "tabulated" and profile.valid_min > 0)
    if sing:
        near = radius <= 3.0 * h + 1e-12 * h
        idxs = np.argwhere(near)
        # midpoint sub-cells: offsets never hit the cell center, so integrable
        # singularities are averaged rather than sampled at the blow-up point
        sub = ((np.arange(16) + 0.5) / 16.0 - 0.5) * h
        offs = np.stack(np.meshgrid(*([sub] * n), indexing="ij"), axis=-1).reshape(-1, n)
        for idx in idxs:
            center = mesh[tuple(idx)]
            pts = np.linalg.norm(center[None, :] + offs, axis=1)
            vals[tuple(idx)] = float(np.mean(profile(pts)))
    else:
        vals = np.asarray(profile(radius), dtype=float)
    # trapezoid weights along each kernel axis
    w1 = np.full(grid.count, h)
    w1[0] *= 0.5
    w1[-1] *= 0.5
    w = np.ones_like(vals)
    for k in range(n):
        shape = [1] * n
        shape[k] = grid.count
        w = w * w1.reshape(shape)
    kernel = vals * w
    if shift is not None and np.any(np.asarray(shift) != 0):
        phase = np.exp(-2j * np.pi * (mesh @ np.asarray(shift, dtype=float)))
        kernel = kernel * phase
    return kernel


def convolve(v_hat, u_hat: FreqFunction, structure: str, particle=None, n: int | None = None,
             shift=None) -> FreqFunction:
    """Sampled F(V u) on u's tensor grid.

    structure: "additive" (full d-dim kernel), "one_particle" with
    particle=i (kernel over particle i's n axes), or "pairwise" with
    particle=(i, j) (anti-diagonal kernel over the two particles' axes).
    Particle indices are 1-based; ``n`` is the single-particle dimension.
    """
    g = u_hat.grid
    if g.kind != "tensor":
        raise DimensionMismatchError("convolve operates on tensor grids")
    if g.dim > 3:
        raise UnsupportedScaleError("tensor convolution capped at total dimension 3")
    d = g.dim
    u = np.asarray(u_hat.values)
    if structure == "additive":
        if isinstance(v_hat, FreqFunction):
            if v_hat.grid.shape != g.shape:
                raise DimensionMismatchError("additive kernel grid mismatch")
            w = FreqGrid(dim=d, kind="tensor", extent=g.extent, count=g.count).trapezoid_weights()
            kernel = np.asarray(v_hat.values) * w
        else:
            kernel = sample_kernel_on_lattice(v_hat, d, g, shift)
        out = _fft_lin_convolve(u, kernel, axes=tuple(range(d)))
        return u_hat.copy_with(out)

    if n is None:
        raise InvalidArgumentError("one_particle/pairwise convolution needs n")
    if structure == "one_particle":
        i = int(particle)
        axes = tuple(range((i - 1) * n, i * n))
        kernel = sample_kernel_on_lattice(v_hat, n, g, shift)
        shape = [1] * d
        for k, ax in enumerate(axes):
            shape[ax] = kernel.shape[k]
        out = _fft_lin_convolve(u, kernel.reshape(shape), axes=axes)
        return u_hat.copy_with(out)

    if structure == "pairwise":
        i, j = particle
        if n != 1:
            raise UnsupportedScaleError("pairwise convolution implemented for n = 1 lattices")
        axi, axj = (i - 1) * n, (j - 1) * n
        k1 = sample_kernel_on_lattice(v_hat, 1, g, shift)
        M = g.count
        k2 = np.zeros((M, M), dtype=k1.dtype)
        k2[np.arange(M), M - 1 - np.arange(M)] = k1  # support on theta_j = -theta_i
        shape = [1] * d
        shape[axi] = M
        shape[axj] = M
        out = _fft_lin_convolve(u, k2.reshape(shape), axes=(axi, axj))
        return u_hat.copy_with(out)

    raise InvalidArgumentError(f"unknown convolution structure {structure!r}")


# ---------------------------------------------------------------------------
# radial convolution in R^3 (bipolar reduction, product integration)
# ---------------------------------------------------------------------------
#
# (V * u)(r) = (2 pi / r) * int_0^inf s u(s) [Q(r+s) - Q(|r-s|)] ds, where
# Q is a primitive of tau V(tau).  g(s) = s u(s) is approximated by its
# piecewise quadratic through each cell's three Gauss nodes; the kernel
# moments are computed exactly near the singular point s = r and by Gauss-7
# where the kernel is smooth (exact far-field expansion is catastrophically
# ill-conditioned, see the near/far split below).

def _prim_int(i: int, lo, hi, q=None, log=False):
    """integral of u^i * u^q du (or u^i ln u du) on [lo, hi], lo >= 0."""
    if log:
        p = i + 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            hi_t = np.where(hi > 0, hi ** p * (np.log(np.maximum(hi, 1e-300)) - 1 / p) / p, 0.0)
            lo_t = np.where(lo > 0, lo ** p * (np.log(np.maximum(lo, 1e-300)) - 1 / p) / p, 0.0)
        return hi_t - lo_t
    p = i + q + 1.0
    return (hi ** p - lo ** p) / p


def _exact_moments(m_shift, sign, lo, hi, q, log):
    """int (m_shift + sign*u)^j Q(u) du for j = 0, 1, 2 over [lo, hi]."""
    out = []
    for j in range(3):
        tot = 0.0
        for k in range(j + 1):
            tot = tot + comb(j, k) * m_shift ** (j - k) * sign ** k * _prim_int(k, lo, hi, q=q, log=log)
        out.append(tot)
    return np.stack(out, axis=-1)


def _gauss7_moments(Qfun, c, lo_s, hi_s):
    mid = 0.5 * (lo_s + hi_s)
    half = 0.5 * (hi_s - lo_s)
    s = mid[..., None] + half[..., None] * _GX7
    K = Qfun(s)
    dd = s - c[..., None]
    m0 = (K * _GW7).sum(-1) * half
    m1 = (K * dd * _GW7).sum(-1) * half
    m2 = (K * dd * dd * _GW7).sum(-1) * half
    return np.stack([m0, m1, m2], axis=-1)


class RadialKernel3D:
    """Primitive Q of tau*V(tau) for the catalog kinds, dim = 3."""

    def __init__(self, profile: RadialProfile, coeff: float = 1.0):
        k, p = profile.kind, profile.params
        self.profile = profile
        self.coeff = coeff
        self.q = None
        self.log = False
        self.smoothQ = None
        if k == "power":
            C, a = p
            if abs(a + 2.0) < 1e-14:
                self.log = True
                self.scale = coeff * C
            else:
                self.q = a + 2.0  # tau * C tau^(a+1) integrates to C u^(a+2)/(a+2)
                self.scale = coeff * C / (a + 2.0)
        elif k == "bracket_power":
            C, a = p
            if abs(a + 2.0) < 1e-14:
                self.smoothQ = lambda u: coeff * C / 2.0 * np.log1p(u * u)
            else:
                self.smoothQ = lambda u: coeff * C * (1.0 + u * u) ** ((a + 2.0) / 2.0) / (a + 2.0)
        elif k == "rational_bracket":
            A, c, m = p
            if abs(m - 1.0) < 1e-14:
                self.smoothQ = lambda u: coeff * A / (2.0 * c) * np.log1p(c * u * u)
            else:
                self.smoothQ = lambda u: -coeff * A * (1.0 + c * u * u) ** (1.0 - m) / (2.0 * c * (m - 1.0))
        elif k == "gaussian":
            A, c = p
            self.smoothQ = lambda u: -coeff * A * np.exp(-c * u * u) / (2.0 * c)
        else:
            raise UnsupportedKindError(f"no radial kernel primitive for kind {k!r}")

    def tail_series(self):
        """(c_k, p_k) with Q(s+r) - Q(s-r) = sum_k c_k r^(2k+1) s^(p_k) for s >> r."""
        if self.smoothQ is not None:
            # smooth catalog kernels decay fast or grow at most like log; the
            # profiles paired with them decay fast enough that the plain
            # truncation is negligible, so no series correction is offered.
            return None
        if self.log:
            return [(2.0 * self.scale / (2 * k + 1), -(2 * k + 1)) for k in range(3)]
        q = self.q
        coefs = []
        for k in range(3):
            j = 2 * k + 1
            binom = 1.0
            for m in range(j):
                binom *= (q - m)
            binom /= math.factorial(j)
            coefs.append((2.0 * self.scale * binom, q - j))
        return coefs


def radial_convolve_3d(kernel: RadialKernel3D, u_hat: FreqFunction,
                       r_eval: np.ndarray | None = None,
                       tail_profile: RadialProfile | None = None) -> np.ndarray:
    """(V * u)(r_eval) for radial data in R^3 on a Gauss-3 cell grid.

    ``tail_profile`` (typically u's own profile) supplies the power-law
    model used for the analytic s > r_max correction; without it the
    integral is truncated at the grid edge.
    """
    g = u_hat.grid
    if g.kind != "radial" or g.dim != 3 or g.cell_bounds is None:
        raise DimensionMismatchError("radial_convolve_3d needs a 3-D Gauss-cell radial grid")
    bounds = g.cell_bounds
    a, b = bounds[:-1], bounds[1:]
    c = 0.5 * (a + b)
    h = b - a
    ncells = len(a)
    nodes3 = g.nodes.reshape(ncells, 3)
    gvals = (g.nodes * np.real_if_close(u_hat.values)).reshape(ncells, 3)
    d = nodes3 - c[:, None]
    V = np.stack([np.ones_like(d), d, d * d], axis=2)
    VinvT = np.transpose(np.linalg.inv(V), (0, 2, 1))
    if r_eval is None:
        r_eval = g.nodes

    if kernel.smoothQ is not None:
        Qm = lambda r: (lambda s: kernel.smoothQ(np.abs(r - s)))
        Qp = lambda r: (lambda s: kernel.smoothQ(r + s))
        exactable = False
    else:
        q, log = kernel.q, kernel.log
        scale = kernel.scale
        Qm = lambda r: (lambda s: scale * (np.log(np.abs(r - s)) if log else np.abs(r - s) ** q))
        Qp = lambda r: (lambda s: scale * (np.log(r + s) if log else (r + s) ** q))
        exactable = True

    out = np.empty(len(r_eval))
    for idx, r in enumerate(np.asarray(r_eval, dtype=float)):
        # ---- moments of Q(|r-s|) over each cell
        m_abs = np.zeros((ncells, 3))
        if exactable:
            near = np.abs(r - c) <= 3.0 * h
            far = ~near
        else:
            near = np.zeros(ncells, dtype=bool)
            far = ~near
        if far.any():
            m_abs[far] = _gauss7_moments(Qm(r), c[far], a[far], b[far])
        if near.any():
            an, bn, cn = a[near], b[near], c[near]
            acc = np.zeros((near.sum(), 3))
            hi_s = np.minimum(bn, r)
            valid = hi_s > an
            if valid.any():
                acc[valid] += kernel.scale * _exact_moments(
                    r - cn[valid], -1.0, r - hi_s[valid], r - an[valid],
                    kernel.q, kernel.log)
            lo_s = np.maximum(an, r)
            valid = bn > lo_s
            if valid.any():
                acc[valid] += kernel.scale * _exact_moments(
                    r - cn[valid], 1.0, lo_s[valid] - r, bn[valid] - r,
                    kernel.q, kernel.log)
            m_abs[near] = acc
        # ---- moments of Q(r+s): singular point sits at s = -r, distance r+c
        m_plus = np.zeros((ncells, 3))
        if exactable:
            nearp = (r + c) <= 3.0 * h
            farp = ~nearp
        else:
            nearp = np.zeros(ncells, dtype=bool)
            farp = ~nearp
        if farp.any():
            m_plus[farp] = _gauss7_moments(Qp(r), c[farp], a[farp], b[farp])
        if nearp.any():
            m_plus[nearp] = kernel.scale * _exact_moments(
                -(r + c[nearp]), 1.0, r + a[nearp], r + b[nearp], kernel.q, kernel.log)
        m = m_plus - m_abs
        wcell = np.einsum("cij,cj->ci", VinvT, m)
        out[idx] = np.einsum("ci,ci->", wcell, gvals)

    out = 2.0 * np.pi / np.asarray(r_eval) * out

    # analytic correction for the truncated s > r_max part of the integral
    series = kernel.tail_series()
    if series is not None and tail_profile is not None:
        texp = tail_profile.tail_exponent()
        if texp is not None:
            R = bounds[-1]
            terms = []
            if tail_profile.kind == "tabulated" and tail_profile.tail_model is not None:
                A, p1, B, p2 = tail_profile.tail_model
                terms = [(A, p1), (B, p2)]
            else:
                Ct = tail_profile.tail_coefficient()
                sgn = np.sign(tail_profile(np.array([R]))[0]) or 1.0
                if Ct is not None:
                    terms = [(sgn * Ct, texp)]
            r_arr = np.asarray(r_eval, dtype=float)
            corr = np.zeros_like(out)
            # integrand beyond R: (s * u(s)) * ck r^(2k+1) s^pk with u ~ Au s^pu
            for kk, (ck, pk) in enumerate(series):
                rpow = r_arr ** (2 * kk + 1)
                for (Au, pu) in terms:
                    expo = 1.0 + pu + pk
                    if expo < -1.0:
                        corr += ck * Au * rpow * (-R ** (expo + 1.0) / (expo + 1.0))
            out = out + 2.0 * np.pi / r_arr * corr
    return out
