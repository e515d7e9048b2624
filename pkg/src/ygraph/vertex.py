"""Vertex coupling matrices for the Y-junction and the linear solution built
from boundary forcing classes.

The 4x4 matrix collects the vertex trace coefficients of the four forcing
terms (columns ordered gamma_1, gamma_3, gamma_4, gamma_2); inverting it
against the free-evolution trace data yields the boundary forcers that make
the assembled field satisfy the coupling relations.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import ContractError, DomainError, SingularMatrixError
from .fracops import TimeTrace, riemann_liouville
from .linops import GridFunction, SpaceTimeField, group_multi, \
    group_trace_history, trace_at_zero
from .forcing import forcing_class
from .util import worker_count

DET_THRESHOLD = 1e-8


class CouplingKind(Enum):
    TYPE1 = 1
    TYPE2 = 2


@dataclass(frozen=True)
class VertexCoupling:
    """Vertex relation coefficients.

    TYPE1 ties the Dirichlet traces pairwise (u = a2 v = a3 w) and mixes the
    derivative traces; TYPE2 ties the second-derivative traces pairwise.
    """

    kind: CouplingKind
    a2: float
    a3: float
    b2: float
    b3: float
    c2: float
    c3: float

    def __post_init__(self):
        vals = (self.a2, self.a3, self.b2, self.b3, self.c2, self.c3)
        if not all(math.isfinite(v) for v in vals):
            raise ContractError("coupling coefficients must be finite")

    @classmethod
    def special_type1(cls, alpha2, alpha3, beta2, beta3):
        """The dissipativity-friendly family: a = alpha, b = beta, c = 1/alpha."""
        if alpha2 == 0 or alpha3 == 0:
            raise DomainError("special couplings need nonzero alpha")
        return cls(CouplingKind.TYPE1, alpha2, alpha3, beta2, beta3,
                   1.0 / alpha2, 1.0 / alpha3)

    @classmethod
    def special_type2(cls, alpha2, alpha3, beta2, beta3):
        """Mirror family with reciprocal Dirichlet and direct c coefficients."""
        if alpha2 == 0 or alpha3 == 0:
            raise DomainError("special couplings need nonzero alpha")
        return cls(CouplingKind.TYPE2, 1.0 / alpha2, 1.0 / alpha3,
                   beta2, beta3, alpha2, alpha3)


@dataclass(frozen=True)
class LambdaVector:
    """Forcing-class orders with the target regularity they serve."""

    l1: float
    l2: float
    l3: float
    l4: float
    s: float = 0.0

    def as_tuple(self):
        return (self.l1, self.l2, self.l3, self.l4)

    def admissible(self) -> bool:
        lo, hi = admissible_window(self.s)
        return all(lo < l < hi for l in self.as_tuple())


def admissible_window(s: float):
    """Open interval the class orders must lie in for regularity s."""
    return max(s - 1.0, 0.0), min(s + 0.5, 0.5)


@dataclass(frozen=True)
class BoundaryMatrix:
    entries: np.ndarray = field(repr=False)
    lam: LambdaVector = None
    coupling: VertexCoupling = None

    @property
    def det(self) -> complex:
        return det_m(self)

    def row_norm_product(self) -> float:
        return float(np.prod(np.linalg.norm(self.entries, axis=1)))


def _sin_col(lam: float):
    """Column of trace factors (value, value, slope, curvature rows)."""
    a = math.pi * lam / 3.0
    return (2.0 * math.sin(a + math.pi / 6.0),
            2.0 * math.sin(a - math.pi / 6.0),
            2.0 * math.sin(a - math.pi / 2.0))


def build_matrix(coupling: VertexCoupling, lam: LambdaVector) -> BoundaryMatrix:
    """Populate the 4x4 vertex matrix, columns (g1, g3, g4, g2)."""
    l1, l2, l3, l4 = lam.as_tuple()
    s1p, s1m, s1c = _sin_col(l1)
    s2p, s2m, s2c = _sin_col(l2)
    e3 = cmath.exp(1j * math.pi * l3)
    e4 = cmath.exp(1j * math.pi * l4)
    e3b = cmath.exp(1j * math.pi * (l3 - 1.0))
    e4b = cmath.exp(1j * math.pi * (l4 - 1.0))
    e3c = cmath.exp(1j * math.pi * (l3 - 2.0))
    e4c = cmath.exp(1j * math.pi * (l4 - 2.0))
    cp = coupling
    if cp.kind is CouplingKind.TYPE1:
        m = np.array([
            [s1p, -cp.a2 * e3, 0.0, s2p],
            [s1p, 0.0, -cp.a3 * e4, s2p],
            [s1m, -cp.b2 * e3b, -cp.b3 * e4b, s2m],
            [s1c, -cp.c2 * e3c, -cp.c3 * e4c, s2c],
        ], dtype=complex)
    else:
        m = np.array([
            [s1p, -cp.a2 * e3, -cp.a3 * e4, s2p],
            [s1m, -cp.b2 * e3b, -cp.b3 * e4b, s2m],
            [s1c, -cp.c2 * e3c, 0.0, s2c],
            [s1c, 0.0, -cp.c3 * e4c, s2c],
        ], dtype=complex)
    return BoundaryMatrix(entries=m, lam=lam, coupling=cp)


def det_m(m: BoundaryMatrix) -> complex:
    """Determinant via LU with partial pivoting (numpy)."""
    return complex(np.linalg.det(m.entries))


def is_invertible(m: BoundaryMatrix, threshold: float = DET_THRESHOLD) -> bool:
    return abs(det_m(m)) > threshold * m.row_norm_product()


def closed_form_det(alpha2: float, alpha3: float, beta2: float, beta3: float,
                    eps: float, branch: str = "low") -> complex:
    """Determinant of the special-coupling matrix at the anchor orders.

    Both anchor families (orders near 0 and orders near 1/2) share the value
    2 sqrt(3) a2 a3 sin(eps) (1 + 1/a2^2 + 1/a3^2 + b3/a3 + b2/a2).
    """
    if alpha2 == 0 or alpha3 == 0:
        raise DomainError("alpha coefficients must be nonzero")
    if not 0.0 <= eps < 0.5:
        raise DomainError("eps must lie in [0, 0.5)")
    if branch not in ("low", "high"):
        raise DomainError(f"branch must be 'low' or 'high', got {branch!r}")
    factor = (1.0 + 1.0 / alpha2 ** 2 + 1.0 / alpha3 ** 2
              + beta3 / alpha3 + beta2 / alpha2)
    return complex(2.0 * math.sqrt(3.0) * alpha2 * alpha3 * math.sin(eps) * factor)


def anchor_lambda(branch: str, eps: float, s: float = 0.0) -> LambdaVector:
    """Anchor order vectors of the two one-parameter determinant families."""
    if branch == "low":
        return LambdaVector(0.0, 3.0 * eps / math.pi, 0.0, 0.0, s)
    if branch == "high":
        return LambdaVector(0.5, 0.5 - 3.0 * eps / math.pi, 0.5, 0.5, s)
    raise DomainError(f"branch must be 'low' or 'high', got {branch!r}")


@dataclass(frozen=True)
class ScanRow:
    lam: float
    lam2: float
    absdet: float
    threshold: float
    invertible: bool


@dataclass(frozen=True)
class ScanReport:
    s: float
    window: tuple
    eps: float
    branch: str
    rows: list

    @property
    def any_invertible(self):
        return any(r.invertible for r in self.rows)


def admissible_scan(s: float, coupling: VertexCoupling, resolution: int = 101,
                    eps: float = 0.1) -> ScanReport:
    """Scan the one-parameter family (lam, lam2, lam, lam) over the window.

    lam2 is pinned to the anchor value of the branch matching s (3 eps/pi
    below regularity 1, its reflection about 1/2 above).  Each sample
    records |det| and the scale-invariant invertibility verdict.  Samples
    are evaluated in parallel chunks capped by YGRAPH_THREADS; the row
    order is deterministic regardless.
    """
    if not -0.5 < s < 1.5 or s == 0.5:
        raise DomainError("s must lie in (-1/2, 3/2) excluding 1/2")
    lo, hi = admissible_window(s)
    branch = "low" if s < 1.0 else "high"
    lam2 = anchor_lambda(branch, eps, s).l2
    rows = []
    if lo >= hi:
        return ScanReport(s=s, window=(lo, hi), eps=eps, branch=branch, rows=rows)
    grid = np.linspace(lo, hi, resolution + 2)[1:-1]

    def sample(lam):
        m = build_matrix(coupling, LambdaVector(lam, lam2, lam, lam, s))
        d = abs(det_m(m))
        thr = DET_THRESHOLD * m.row_norm_product()
        return ScanRow(lam=float(lam), lam2=float(lam2), absdet=float(d),
                       threshold=float(thr), invertible=bool(d > thr))

    workers = min(worker_count(), 8)
    if workers > 1 and len(grid) >= 32:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(sample, grid))
    else:
        rows = [sample(lam) for lam in grid]
    return ScanReport(s=s, window=(lo, hi), eps=eps, branch=branch, rows=rows)


def solve_gamma(m: BoundaryMatrix, rhs) -> tuple:
    """Solve M gamma = F per time sample.

    ``rhs`` is the four right-hand-side TimeTraces in row order; returns the
    four boundary traces in physical order (gamma_1, gamma_2, gamma_3,
    gamma_4), undoing the paper-ordered solution columns.
    """
    r1, r2, r3, r4 = rhs
    if not (len(r1) == len(r2) == len(r3) == len(r4)) or \
            not (r1.dt == r2.dt == r3.dt == r4.dt):
        raise ContractError("rhs traces must share one time grid")
    d = det_m(m)
    if abs(d) <= DET_THRESHOLD * m.row_norm_product():
        raise SingularMatrixError(
            f"vertex matrix numerically singular, |det| = {abs(d):.3e}", det=d)
    stacked = np.stack([r1.samples, r2.samples, r3.samples, r4.samples])
    sol = np.linalg.solve(m.entries, stacked.astype(complex))
    resid = np.abs(m.entries @ sol - stacked).max()
    scale = max(np.abs(stacked).max(), 1e-300)
    if resid > 1e-9 * scale:
        raise SingularMatrixError(
            f"vertex solve residual {resid:.3e} exceeds tolerance", det=d)
    dt = r1.dt
    g1, g3, g4, g2 = (TimeTrace(dt, sol[i], True) for i in range(4))
    return g1, g2, g3, g4


@dataclass(frozen=True)
class LinearSolution:
    """Whole-line assembled fields with their boundary traces.

    u lives on the incoming edge (restrict to x <= 0), v and w on the
    outgoing edges (x >= 0); the stored fields cover the full grid so
    one-sided vertex traces stay extractable.
    """

    u: SpaceTimeField = field(repr=False)
    v: SpaceTimeField = field(repr=False)
    w: SpaceTimeField = field(repr=False)
    gammas: tuple = field(repr=False, default=None)
    matrix: BoundaryMatrix = None
    coupling: VertexCoupling = None

    @property
    def times(self):
        return self.u.times

    def imag_residual(self) -> float:
        """Largest imaginary part across the assembled fields.

        Real data should produce essentially real solutions; the complex
        plus-class kernels make this a diagnostic rather than a certainty.
        """
        return float(max(np.abs(f.levels.imag).max() if
                         np.iscomplexobj(f.levels) else 0.0
                         for f in (self.u, self.v, self.w)))


def _build_rhs(coupling, f0, d0, s0):
    """Right-hand side rows per the coupling kind (sign included)."""
    cp = coupling
    f1, f2, f3 = f0
    d1, d2, d3 = d0
    q1, q2, q3 = s0
    if cp.kind is CouplingKind.TYPE1:
        rows = [f1 - cp.a2 * f2,
                f1 - cp.a3 * f3,
                d1 - cp.b2 * d2 - cp.b3 * d3,
                q1 - cp.c2 * q2 - cp.c3 * q3]
    else:
        rows = [f1 - cp.a2 * f2 - cp.a3 * f3,
                d1 - cp.b2 * d2 - cp.b3 * d3,
                q1 - cp.c2 * q2,
                q1 - cp.c3 * q3]
    return [-r for r in rows]


def check_compatibility(u0: GridFunction, v0: GridFunction, w0: GridFunction,
                        coupling: VertexCoupling, tol: float = 1e-8) -> float:
    """Deviation from the Dirichlet compatibility the high-regularity
    setting demands of initial data; returns the worst absolute mismatch."""
    iu = u0.index_of_zero()
    uv = u0.samples[iu]
    vv = v0.samples[v0.index_of_zero()]
    wv = w0.samples[w0.index_of_zero()]
    if coupling.kind is CouplingKind.TYPE1:
        dev = max(abs(uv - coupling.a2 * vv), abs(uv - coupling.a3 * wv))
    else:
        dev = abs(uv - coupling.a2 * vv - coupling.a3 * wv)
    return float(dev)


def assemble_linear_solution(u0: GridFunction, v0: GridFunction,
                             w0: GridFunction, coupling: VertexCoupling,
                             lam: LambdaVector, T: float,
                             n_levels: int = 26, trace_dt: float = 1e-3,
                             method: str = "spectral",
                             enforce_compatibility: bool = False) -> LinearSolution:
    """Build the linear graph solution from whole-line extensions.

    The three data extensions share one grid.  Free-evolution vertex traces
    feed the matrix system; the solved boundary traces drive the four
    forcing-class fields, and the superpositions restrict to the edges.
    """
    if not (u0.origin == v0.origin == w0.origin and
            u0.spacing == v0.spacing == w0.spacing and
            len(u0) == len(v0) == len(w0)):
        raise ContractError("data extensions must share one grid")
    if enforce_compatibility:
        dev = check_compatibility(u0, v0, w0, coupling)
        if dev > 1e-8:
            raise ContractError(
                f"initial data violate the Dirichlet compatibility by {dev:.2e}")

    n_tr = int(round(T / trace_dt)) + 1
    if (n_tr - 1) % (n_levels - 1):
        raise ContractError("n_levels - 1 must divide the trace step count")
    tt = trace_dt * np.arange(n_tr)
    out_times = tt[:: (n_tr - 1) // (n_levels - 1)]

    f_tr, d_tr, s_tr = [], [], []
    for data in (u0, v0, w0):
        f_tr.append(group_trace_history(data, tt, 0))
        d_tr.append(riemann_liouville(
            TimeTrace(trace_dt, group_trace_history(data, tt, 1), True),
            1.0 / 3.0).samples)
        s_tr.append(riemann_liouville(
            TimeTrace(trace_dt, group_trace_history(data, tt, 2), True),
            2.0 / 3.0).samples)

    rhs_rows = _build_rhs(coupling, f_tr, d_tr, s_tr)
    rhs = [TimeTrace(trace_dt, r, True) for r in rhs_rows]
    m = build_matrix(coupling, lam)
    g1, g2, g3, g4 = solve_gamma(m, rhs)

    grid = u0
    fld_u = group_multi(u0, out_times).levels.astype(complex)
    fld_v = group_multi(v0, out_times).levels.astype(complex)
    fld_w = group_multi(w0, out_times).levels.astype(complex)
    fld_u += forcing_class(lam.l1, "minus", g1, grid, out_times,
                           method=method).field.levels
    fld_u += forcing_class(lam.l2, "minus", g2, grid, out_times,
                           method=method).field.levels
    fld_v += forcing_class(lam.l3, "plus", g3, grid, out_times,
                           method=method).field.levels
    fld_w += forcing_class(lam.l4, "plus", g4, grid, out_times,
                           method=method).field.levels

    dt_out = float(out_times[1] - out_times[0])
    mk = lambda lv: SpaceTimeField(grid.origin, grid.spacing, dt_out, lv)
    return LinearSolution(u=mk(fld_u), v=mk(fld_v), w=mk(fld_w),
                          gammas=(g1, g2, g3, g4), matrix=m, coupling=coupling)


@dataclass(frozen=True)
class VertexResidualReport:
    times: np.ndarray
    residuals: dict          # relation label -> per-time absolute residual
    scales: dict             # derivative order -> trace magnitude scale

    def worst_relative(self, skip_startup: int = 1) -> float:
        worst = 0.0
        for label, res in self.residuals.items():
            order = {"dirichlet": 0, "neumann": 1, "second": 2}[
                label.split(":")[0]]
            scale = max(self.scales[order], 1e-300)
            worst = max(worst, float(np.max(res[skip_startup:]) / scale))
        return worst


def _one_sided_deriv_traces(fld: SpaceTimeField, j: int, side: str,
                            fit_window=(12, 28)) -> np.ndarray:
    """Vertex limits of the j-th spatial derivative, one per level.

    Values read directly via one-sided cubic extrapolation.  Derivatives are
    synthesized spectrally with a smooth frequency window (the fields carry
    integrable vertex singularities whose raw band-limited derivatives ring)
    and their limits come from one-sided polynomial fits outside the window
    transition zone.
    """
    from .forcing import smooth_window, one_sided_limits

    if j == 0:
        return np.array([trace_at_zero(fld.level(m), 0, side=side)
                         for m in range(fld.n_levels)])
    n = fld.levels.shape[1]
    from .linops import frequencies as _freqs
    xi = _freqs(n, fld.spacing)
    mult = (1j * xi) ** j * smooth_window(n, fld.spacing)
    dlev = np.fft.ifft(np.fft.fft(fld.levels, axis=1) * mult, axis=1)
    if not np.iscomplexobj(fld.levels):
        dlev = dlev.real
    dfld = SpaceTimeField(fld.origin, fld.spacing, fld.dt, dlev)
    pick = 0 if side == "left" else 1
    return np.array([one_sided_limits(dfld, tm, fit_window=fit_window)[pick]
                     for tm in dfld.times])


def verify_vertex_conditions(sol: LinearSolution,
                             coupling: VertexCoupling = None,
                             fit_window=(12, 28)) -> VertexResidualReport:
    """Per-time residuals of the vertex relations from one-sided traces.

    u contributes its limit from the incoming side (x -> 0-), v and w from
    the outgoing side (x -> 0+).
    """
    cp = coupling or sol.coupling
    times = sol.times
    tr = {}
    for name, fld, side in (("u", sol.u, "left"), ("v", sol.v, "right"),
                            ("w", sol.w, "right")):
        for j in (0, 1, 2):
            tr[(name, j)] = _one_sided_deriv_traces(fld, j, side,
                                                    fit_window=fit_window)

    scales = {}
    for j in (0, 1, 2):
        scales[j] = max(np.abs(tr[(n, j)]).max() for n in ("u", "v", "w"))

    res = {}
    if cp.kind is CouplingKind.TYPE1:
        res["dirichlet:u-a2v"] = np.abs(tr[("u", 0)] - cp.a2 * tr[("v", 0)])
        res["dirichlet:u-a3w"] = np.abs(tr[("u", 0)] - cp.a3 * tr[("w", 0)])
        res["neumann:u-b2v-b3w"] = np.abs(
            tr[("u", 1)] - cp.b2 * tr[("v", 1)] - cp.b3 * tr[("w", 1)])
        res["second:u-c2v-c3w"] = np.abs(
            tr[("u", 2)] - cp.c2 * tr[("v", 2)] - cp.c3 * tr[("w", 2)])
    else:
        res["dirichlet:u-a2v-a3w"] = np.abs(
            tr[("u", 0)] - cp.a2 * tr[("v", 0)] - cp.a3 * tr[("w", 0)])
        res["neumann:u-b2v-b3w"] = np.abs(
            tr[("u", 1)] - cp.b2 * tr[("v", 1)] - cp.b3 * tr[("w", 1)])
        res["second:u-c2v"] = np.abs(tr[("u", 2)] - cp.c2 * tr[("v", 2)])
        res["second:u-c3w"] = np.abs(tr[("u", 2)] - cp.c3 * tr[("w", 2)])
    return VertexResidualReport(times=times, residuals=res, scales=scales)
