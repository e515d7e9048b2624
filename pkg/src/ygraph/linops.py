"""Linear KdV machinery: the group exp(-t d^3/dx^3), the inhomogeneous
Duhamel operator, vertex trace extraction and discrete Sobolev norms.

The group is a Fourier multiplier exp(i t xi^3) applied on the periodized
grid; inputs must decay at both ends so periodization is harmless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError, DomainError
from .fracops import TimeTrace

DECAY_TOL = 1e-8


@dataclass(frozen=True)
class GridFunction:
    """Uniform samples of a function on one interval."""

    origin: float
    spacing: float
    samples: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.samples)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(float)
        if arr.ndim != 1 or arr.size == 0:
            raise ContractError("GridFunction samples must be a non-empty 1-d array")
        if not (self.spacing > 0):
            raise ContractError(f"GridFunction spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "samples", arr)

    def __len__(self):
        return self.samples.size

    @property
    def x(self):
        return self.origin + self.spacing * np.arange(self.samples.size)

    @property
    def is_complex(self):
        return self.samples.dtype.kind == "c"

    def with_samples(self, samples):
        return GridFunction(self.origin, self.spacing, samples)

    def index_of_zero(self) -> int:
        """Index of the node at x = 0; the node must exist and be interior."""
        i = int(round(-self.origin / self.spacing))
        if i <= 0 or i >= len(self) - 1:
            raise DomainError("x = 0 is not strictly inside the grid")
        if abs(self.origin + i * self.spacing) > 1e-9 * self.spacing:
            raise DomainError("x = 0 does not fall on a grid node")
        return i


@dataclass(frozen=True)
class SpaceTimeField:
    """Time-indexed stack of grid functions sharing one layout.

    levels[m] holds the samples at time m * dt; level 0 is t = 0.
    """

    origin: float
    spacing: float
    dt: float
    levels: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.levels)
        if arr.dtype.kind not in "fc":
            arr = arr.astype(float)
        if arr.ndim != 2 or arr.size == 0:
            raise ContractError("SpaceTimeField levels must be a 2-d (time, space) array")
        if not (self.dt > 0 and self.spacing > 0):
            raise ContractError("SpaceTimeField needs positive dt and spacing")
        object.__setattr__(self, "levels", arr)

    @property
    def times(self):
        return self.dt * np.arange(self.levels.shape[0])

    @property
    def x(self):
        return self.origin + self.spacing * np.arange(self.levels.shape[1])

    @property
    def n_levels(self):
        return self.levels.shape[0]

    def level(self, m: int) -> GridFunction:
        return GridFunction(self.origin, self.spacing, self.levels[m])

    def level_at(self, t: float) -> GridFunction:
        m = int(round(t / self.dt))
        if m < 0 or m >= self.n_levels or abs(t - m * self.dt) > 1e-9 * max(self.dt, 1.0):
            raise DomainError(f"t={t} is not a stored level time")
        return self.level(m)

    def index_of_zero(self) -> int:
        return self.level(0).index_of_zero()


def gaussian_profile(x, amplitude=1.0, center=0.0, width=1.0):
    return amplitude * np.exp(-((x - center) ** 2) / (2.0 * width ** 2))


def grid_from_function(fn, origin, spacing, n):
    x = origin + spacing * np.arange(n)
    return GridFunction(origin, spacing, np.asarray(fn(x)))


def _check_decay(phi: GridFunction, tol: float):
    lo, hi = abs(phi.samples[0]), abs(phi.samples[-1])
    if max(lo, hi) > tol:
        end = "left" if lo >= hi else "right"
        mag = max(lo, hi)
        raise ContractError(
            f"grid data must decay at both ends for periodization: "
            f"{end} endpoint magnitude {mag:.3e} exceeds {tol:.1e}")


def frequencies(n: int, spacing: float) -> np.ndarray:
    """Angular DFT frequencies of the periodized grid."""
    return 2.0 * math.pi * np.fft.fftfreq(n, d=spacing)


def airy_group(phi: GridFunction, t: float, decay_tol: float = DECAY_TOL) -> GridFunction:
    """Apply the linear group at time t via the multiplier exp(i t xi^3)."""
    if not math.isfinite(t):
        raise DomainError("airy_group requires finite t")
    _check_decay(phi, decay_tol)
    xi = frequencies(len(phi), phi.spacing)
    mult = np.exp(1j * t * xi ** 3)
    if phi.is_complex:
        out = np.fft.ifft(mult * np.fft.fft(phi.samples))
    else:
        out = np.fft.ifft(mult * np.fft.fft(phi.samples)).real
    return phi.with_samples(out)


def group_multi(phi: GridFunction, times, deriv: int = 0,
                decay_tol: float = DECAY_TOL) -> SpaceTimeField:
    """Group applied at a uniform ladder of times starting at 0.

    ``deriv`` returns d^j/dx^j of the evolution instead (spectral
    differentiation).
    """
    times = np.asarray(times, dtype=float)
    dt = _uniform_dt(times)
    _check_decay(phi, decay_tol)
    xi = frequencies(len(phi), phi.spacing)
    spec = np.fft.fft(phi.samples) * (1j * xi) ** deriv
    levels = np.empty((times.size, len(phi)),
                      dtype=complex if phi.is_complex else float)
    for m, t in enumerate(times):
        out = np.fft.ifft(np.exp(1j * t * xi ** 3) * spec)
        levels[m] = out if phi.is_complex else out.real
    return SpaceTimeField(phi.origin, phi.spacing, dt, levels)


def _uniform_dt(times: np.ndarray) -> float:
    if times.size < 2:
        raise ContractError("need at least two time levels")
    steps = np.diff(times)
    dt = steps[0]
    if times[0] != 0.0 or not np.allclose(steps, dt, rtol=1e-9, atol=1e-12):
        raise ContractError("time levels must be uniform and start at 0")
    return float(dt)


def group_trace_history(phi: GridFunction, times, deriv: int = 0) -> np.ndarray:
    """Trace of d^j/dx^j exp(-t d^3/dx^3) phi at x = 0 for each time.

    Evaluated directly in frequency space; exact up to the periodization
    already inherent in the grid representation.
    """
    times = np.asarray(times, dtype=float)
    xi = frequencies(len(phi), phi.spacing)
    spec = np.fft.fft(phi.samples) / len(phi)
    spec = spec * np.exp(-1j * xi * phi.origin) * (1j * xi) ** deriv
    phases = np.exp(1j * np.outer(times, xi ** 3))
    out = phases @ spec
    if not phi.is_complex:
        out = out.real
    return out


def duhamel_inhomog(w: SpaceTimeField, t: float, decay_tol: float = DECAY_TOL) -> GridFunction:
    """Inhomogeneous Duhamel integral of a forcing field at one level time.

    Applies the group per stored level and integrates in t' with composite
    Simpson (3/8 closure for an odd interval count).
    """
    m = int(round(t / w.dt))
    if m < 0 or m >= w.n_levels or abs(t - m * w.dt) > 1e-9 * max(w.dt, 1.0):
        raise DomainError(f"t={t} outside the field's stored time range")
    base = GridFunction(w.origin, w.spacing, w.levels[0])
    if m == 0:
        dtype = complex if w.levels.dtype.kind == "c" else float
        return base.with_samples(np.zeros(w.levels.shape[1], dtype=dtype))

    weights = _composite_simpson_weights(m, w.dt)
    acc = np.zeros(w.levels.shape[1], dtype=complex)
    xi = frequencies(w.levels.shape[1], w.spacing)
    for j in range(m + 1):
        if weights[j] == 0.0:
            continue
        lvl = GridFunction(w.origin, w.spacing, w.levels[j])
        _check_decay(lvl, decay_tol)
        tau = t - j * w.dt
        acc += weights[j] * np.fft.ifft(np.exp(1j * tau * xi ** 3) * np.fft.fft(w.levels[j]))
    if w.levels.dtype.kind != "c":
        acc = acc.real
    return base.with_samples(acc)


def _composite_simpson_weights(m: int, dt: float) -> np.ndarray:
    """Quadrature weights over nodes 0..m for int_0^{m dt}."""
    w = np.zeros(m + 1)
    if m == 1:
        w[:2] = 0.5
    elif m % 2 == 0:
        w[0] = w[m] = 1.0 / 3.0
        w[1:m:2] = 4.0 / 3.0
        w[2:m:2] = 2.0 / 3.0
    else:
        # Simpson on [0, m-3], 3/8 rule on the last three intervals.
        if m >= 5:
            k = m - 3
            w[0] = w[k] = 1.0 / 3.0
            w[1:k:2] = 4.0 / 3.0
            w[2:k:2] = 2.0 / 3.0
        else:  # m == 3
            k = 0
        w[k] += 3.0 / 8.0
        w[k + 1] += 9.0 / 8.0
        w[k + 2] += 9.0 / 8.0
        w[k + 3] += 3.0 / 8.0
    return w * dt


_ONE_SIDED_EXTRAP = np.array([4.0, -6.0, 4.0, -1.0])


def trace_at_zero(f, deriv: int = 0, side: str = "centered"):
    """Trace of d^j/dx^j at x = 0, j in {0, 1, 2}.

    side selects the limit for fields with a vertex discontinuity: "left"
    and "right" use only nodes strictly on that side (cubic extrapolation
    of the value / one-sided differences for derivatives), "centered" uses
    symmetric stencils through the node.  SpaceTimeField input returns a
    TimeTrace of the per-level trace.
    """
    if isinstance(f, SpaceTimeField):
        vals = np.array([_trace_level(f.levels[m], f.index_of_zero(),
                                      f.spacing, deriv, side)
                         for m in range(f.n_levels)])
        return TimeTrace(f.dt, vals, True)
    if not isinstance(f, GridFunction):
        raise DomainError("trace_at_zero expects a GridFunction or SpaceTimeField")
    return _trace_level(f.samples, f.index_of_zero(), f.spacing, deriv, side)


def _trace_level(v, i0, h, deriv, side):
    if deriv not in (0, 1, 2):
        raise DomainError("derivative order must be 0, 1 or 2")
    if side not in ("left", "right", "centered"):
        raise DomainError(f"unknown side {side!r}")
    need = 4 + deriv
    if side != "centered" and (i0 < need or i0 > len(v) - 1 - need):
        raise DomainError("not enough nodes on one side of x = 0")

    if side == "centered":
        if deriv == 0:
            return v[i0]
        if deriv == 1:
            return (v[i0 + 1] - v[i0 - 1]) / (2.0 * h)
        return (v[i0 + 1] - 2.0 * v[i0] + v[i0 - 1]) / h ** 2

    sgn = 1 if side == "right" else -1
    idx = i0 + sgn * np.arange(1, 5 + deriv)
    vals = v[idx]
    if deriv == 0:
        return _ONE_SIDED_EXTRAP @ vals[:4]
    if deriv == 1:
        d = np.array([(vals[j + 1] - vals[j]) * sgn / h for j in range(4)])
    else:
        d = np.array([(vals[j + 2] - 2.0 * vals[j + 1] + vals[j]) / h ** 2
                      for j in range(4)])
    # derivative estimates live at offsets (j+1+0.5) h or (j+2) h; cubic
    # extrapolation back to 0 from their own stations
    if deriv == 1:
        stations = (np.arange(4) + 1.5) * h
    else:
        stations = (np.arange(4) + 2.0) * h
    return _poly_extrapolate(stations, d)


def _poly_extrapolate(xs, ys):
    """Value at 0 of the cubic through (xs, ys)."""
    coef = np.polynomial.polynomial.polyfit(xs, ys, 3)
    return coef[0]


def sobolev_norm(f: GridFunction, s: float, decay_tol: float = DECAY_TOL) -> float:
    """Discrete H^s norm of the supplied whole-line extension.

    Uses (1/2pi) sum <xi>^{2s} |fhat|^2 dxi with <xi> = 1 + |xi|; at s = 0
    this reduces to the L2 norm by Parseval.
    """
    if not -1.0 <= s <= 2.0:
        raise DomainError("s must lie in [-1, 2]")
    _check_decay(f, decay_tol)
    n = len(f)
    xi = frequencies(n, f.spacing)
    fhat = f.spacing * np.fft.fft(f.samples)
    dxi = 2.0 * math.pi / (n * f.spacing)
    weight = (1.0 + np.abs(xi)) ** (2.0 * s)
    total = np.sum(weight * np.abs(fhat) ** 2) * dxi / (2.0 * math.pi)
    return float(math.sqrt(total))
