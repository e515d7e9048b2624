"""Linear group, Duhamel operator, trace extraction and Sobolev norms."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from ygraph.errors import ContractError, DomainError
from ygraph.linops import (GridFunction, SpaceTimeField, airy_group,
                           duhamel_inhomog, gaussian_profile, group_multi,
                           group_trace_history, sobolev_norm, trace_at_zero)
from ygraph.specfun import airy_scaled, airy_scaled_deriv


@pytest.fixture
def gaussian_grid():
    h = 0.05
    x = np.arange(-200.0, 200.0, h)
    return GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))


def test_group_identity_at_zero(gaussian_grid):
    out = airy_group(gaussian_grid, 0.0)
    assert np.abs(out.samples - gaussian_grid.samples).max() <= 1e-12


def test_group_unitarity(gaussian_grid):
    out = airy_group(gaussian_grid, 0.7)
    n0 = np.linalg.norm(gaussian_grid.samples)
    assert abs(np.linalg.norm(out.samples) - n0) / n0 <= 1e-10


def test_group_property(gaussian_grid):
    two = airy_group(airy_group(gaussian_grid, 0.2), 0.1)
    one = airy_group(gaussian_grid, 0.3)
    assert np.abs(two.samples - one.samples).max() <= 1e-10


def test_group_commutes_with_derivative(gaussian_grid):
    from ygraph.linops import frequencies
    xi = frequencies(len(gaussian_grid), gaussian_grid.spacing)
    dphi = gaussian_grid.with_samples(
        np.fft.ifft(1j * xi * np.fft.fft(gaussian_grid.samples)).real)
    lhs = airy_group(dphi, 0.4).samples
    evolved = airy_group(gaussian_grid, 0.4)
    rhs = np.fft.ifft(1j * xi * np.fft.fft(evolved.samples)).real
    assert np.abs(lhs - rhs).max() <= 1e-8


def test_group_decay_contract():
    h = 0.1
    x = np.arange(-5.0, 5.0, h)
    bad = GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))   # ends ~ 4e-6
    with pytest.raises(ContractError, match="endpoint"):
        airy_group(bad, 0.1)


def test_fundamental_solution_profile():
    # narrow Gaussian (width parameter 1e-2 in exp(-x^2/w)) approximating a
    # point mass: its evolution at t = 1 lands on the kernel profile A(x)
    w = 1e-2
    h = 0.05
    x = np.arange(-8000.0, 8000.0, h)
    prof = np.exp(-x ** 2 / w) / math.sqrt(math.pi * w)
    out = airy_group(GridFunction(x[0], h, prof), 1.0)
    window = np.abs(out.x) <= 4.0
    err = np.abs(out.samples[window] - airy_scaled(out.x[window]))
    assert err.max() <= 1e-3


def test_duhamel_zero_forcing():
    h = 0.1
    x = np.arange(-30.0, 30.0, h)
    w = SpaceTimeField(x[0], h, 0.05, np.zeros((11, x.size)))
    out = duhamel_inhomog(w, 0.5)
    assert np.abs(out.samples).max() == 0.0
    assert np.abs(duhamel_inhomog(w, 0.0).samples).max() == 0.0


def test_duhamel_time_domain_error():
    h = 0.1
    x = np.arange(-30.0, 30.0, h)
    w = SpaceTimeField(x[0], h, 0.05, np.zeros((11, x.size)))
    with pytest.raises(DomainError):
        duhamel_inhomog(w, 0.9)


def test_duhamel_linearity():
    h = 0.05
    x = np.arange(-100.0, 100.0, h)
    nt = 11
    dt = 0.02
    t = dt * np.arange(nt)
    w1 = np.array([np.exp(-x ** 2 / 3.0) * np.sin(2 * s + 0.2) for s in t])
    w2 = np.array([np.exp(-(x - 1.0) ** 2 / 2.0) * np.cos(s) for s in t])
    f1 = SpaceTimeField(x[0], h, dt, w1)
    f2 = SpaceTimeField(x[0], h, dt, w2)
    combo = SpaceTimeField(x[0], h, dt, 0.3 * w1 - 1.7 * w2)
    lhs = duhamel_inhomog(combo, 0.2).samples
    rhs = 0.3 * duhamel_inhomog(f1, 0.2).samples - 1.7 * duhamel_inhomog(f2, 0.2).samples
    assert np.abs(lhs - rhs).max() <= 1e-12 * np.abs(rhs).max()


def test_duhamel_pde_residual():
    h = 0.05
    x = np.arange(-150.0, 150.0, h)
    nt = 41
    dt = 0.5 / (nt - 1)
    t = dt * np.arange(nt)
    wlv = np.array([np.exp(-x ** 2 / (2 * 1.5 ** 2)) * np.sin(2 * s + 0.3)
                    for s in t])
    wf = SpaceTimeField(x[0], h, dt, wlv)
    k = np.array([duhamel_inhomog(wf, s).samples for s in t])
    dk_dt = np.gradient(k, dt, axis=0, edge_order=2)
    d3 = np.zeros_like(k)
    d3[:, 2:-2] = (-k[:, :-4] + 2 * k[:, 1:-3] - 2 * k[:, 3:-1] + k[:, 4:]) \
        / (2 * h ** 3)
    res = dk_dt + d3 - wlv
    interior = np.abs(x) < 100.0
    rel = np.abs(res[1:-1][:, interior]).max() / np.abs(wlv).max()
    assert rel <= 5e-3


class TestTraceAtZero:
    def test_polynomial_second_derivative(self):
        h = 1e-3
        x = np.arange(-1.0, 1.0 + h / 2, h)
        f = GridFunction(x[0], h, x ** 2)
        assert abs(trace_at_zero(f, 2) - 2.0) <= 1e-6

    def test_kernel_slope(self):
        h = 1e-3
        x = np.arange(-1.0, 1.0 + h / 2, h)
        f = GridFunction(x[0], h, airy_scaled(x))
        assert abs(trace_at_zero(f, 1) - airy_scaled_deriv(0.0)) <= 1e-6

    def test_step_side_selection(self):
        h = 1e-3
        x = np.arange(-1.0, 1.0 + h / 2, h)
        f = GridFunction(x[0], h, (x > 0).astype(float))
        assert trace_at_zero(f, 0, side="left") == pytest.approx(0.0, abs=1e-12)
        assert trace_at_zero(f, 0, side="right") == pytest.approx(1.0, abs=1e-12)

    def test_field_input_returns_trace(self):
        h = 0.05
        x = np.arange(-3.0, 3.0, h)
        levels = np.array([c * x ** 2 for c in (1.0, 2.0, 3.0)])
        fld = SpaceTimeField(x[0], h, 0.1, levels)
        tr = trace_at_zero(fld, 2)
        assert np.allclose(tr.samples, [2.0, 4.0, 6.0], atol=1e-8)

    def test_errors(self):
        h = 0.1
        x = np.arange(0.05, 3.0, h)   # zero not on a node
        f = GridFunction(x[0], h, np.zeros(x.size))
        with pytest.raises(DomainError):
            trace_at_zero(f, 0)
        x2 = np.arange(-0.2, 3.0, h)  # too few nodes on the left
        f2 = GridFunction(x2[0], h, np.zeros(x2.size))
        with pytest.raises(DomainError):
            trace_at_zero(f2, 0, side="left")
        with pytest.raises(DomainError):
            trace_at_zero(f2, 3)


class TestSobolev:
    def test_parseval(self):
        h = 0.02
        x = np.arange(-40.0, 40.0, h)
        g = GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))
        l2 = math.sqrt(np.sum(g.samples ** 2) * h)
        assert abs(sobolev_norm(g, 0.0) - l2) / l2 <= 1e-8

    def test_monotone_in_s(self):
        h = 0.02
        x = np.arange(-40.0, 40.0, h)
        g = GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))
        assert sobolev_norm(g, 1.0) >= sobolev_norm(g, 0.0)

    def test_closed_form_weighted_norm(self):
        # for exp(-x^2/2): norm^2 = int (1+|xi|)^2 exp(-xi^2) dxi
        h = 0.02
        x = np.arange(-1280.0, 1280.0, h)
        g = GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))
        oracle = quad(lambda xi: (1 + abs(xi)) ** 2 * math.exp(-xi ** 2),
                      -np.inf, np.inf, limit=200)[0]
        closed = math.sqrt(1.5 * math.sqrt(math.pi) + 2.0)
        assert math.sqrt(oracle) == pytest.approx(closed, abs=1e-10)
        assert abs(sobolev_norm(g, 1.0) - closed) <= 1e-6

    def test_domain(self):
        h = 0.02
        x = np.arange(-40.0, 40.0, h)
        g = GridFunction(x[0], h, np.exp(-x ** 2 / 2.0))
        with pytest.raises(DomainError):
            sobolev_norm(g, 2.5)


def test_group_trace_history_matches_field():
    h = 0.05
    x = np.arange(-120.0, 120.0, h)
    phi = GridFunction(x[0], h, gaussian_profile(x, 1.0, 3.0, 1.2))
    times = np.array([0.0, 0.1, 0.2, 0.3])
    fld = group_multi(phi, times)
    i0 = fld.index_of_zero()
    tr = group_trace_history(phi, times)
    assert np.abs(tr - fld.levels[:, i0]).max() <= 1e-10
