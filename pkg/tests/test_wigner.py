import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chirplock import ladder
from chirplock.params import DimensionlessParams
from chirplock.wigner import (CFLViolation, GridTooSmall, PhaseGrid, PhaseSpaceField, WignerRunConfig,
                              classical_characteristics, coarse_grain, default_grid, evolve_fixed,
                              evolve_rotating, gaussian_field, level_populations, locked_fraction,
                              negativity, quartic_eigenstates, read_field, separatrix, state_wigner,
                              write_field)
from chirplock.wigner.kernels import angular_laplacian, rotate, spectral_derivative, wavenumbers

GRID = PhaseGrid.square(8.0, 64)


def off_centre(grid=GRID, c=(1.5, -0.7), var=1.0):
    return gaussian_field("fixed", grid, var, 0.0, center=c)


def test_grid_geometry():
    g = PhaseGrid.square(2.0, 8)
    assert g.dx == 0.5 and g.x[0] == -1.75 and g.x[-1] == 1.75
    assert g.cell_area == 0.25
    with pytest.raises(ValueError):
        PhaseGrid(-1, 1, 7, -1, 1, 8)
    with pytest.raises(ValueError):
        PhaseGrid(1, -1, 8, -1, 1, 8)


def test_gaussian_field_normalization_and_moments():
    f = off_centre()
    assert f.norm == pytest.approx(1.0, abs=1e-14)
    m = f.moments()
    assert m["mean_x"] == pytest.approx(1.5, abs=1e-8)
    assert m["mean_u"] == pytest.approx(-0.7, abs=1e-8)
    assert m["var_x"] == pytest.approx(1.0, rel=1e-6)
    assert f.marginal_x().sum() * GRID.dx == pytest.approx(1.0)


def test_grid_too_small():
    with pytest.raises(GridTooSmall):
        gaussian_field("fixed", PhaseGrid.square(2.0, 32), 1.0, 0.0)


@given(theta=st.floats(-0.5 * math.pi, 0.5 * math.pi))
@settings(max_examples=25, deadline=None)
def test_shear_rotation_is_exact_for_band_limited_fields(theta):
    # the intermediate shears must stay inside the periodic box, hence the wider grid
    grid = PhaseGrid.square(10.0, 80)
    f = off_centre(grid, c=(0.5, 0.25))
    g = rotate(f.values, grid, theta)
    c, s = math.cos(theta), math.sin(theta)
    # clockwise flow: the centre moves to M(-theta) applied to it
    moved = (0.5 * c + 0.25 * s, -0.5 * s + 0.25 * c)
    exact = gaussian_field("fixed", grid, 1.0, 0.0, center=moved).values
    assert np.max(np.abs(g - exact)) < 1e-9


def test_spectral_derivative():
    f = off_centre()
    X, U = GRID.mesh()
    d = spectral_derivative(f.values, GRID, 0)
    assert np.max(np.abs(d + (X - 1.5) * f.values)) < 1e-8
    d3 = spectral_derivative(f.values, GRID, 1, 3)
    v = U + 0.7
    assert np.max(np.abs(d3 - (3 * v - v**3) * f.values)) < 1e-8


def test_nyquist_is_zeroed():
    k = wavenumbers(8, 0.5)
    assert k[-1] == 0.0 and k[1] > 0


def test_angular_operator_annihilates_radial_fields():
    g = PhaseGrid.square(6.0, 96)
    f = gaussian_field("rotating", g, 0.7, 0.0)
    assert np.max(np.abs(angular_laplacian(f.values, g))) < 1e-8
    h = gaussian_field("rotating", g, 0.7, 0.0, center=(1.0, 0.0))
    assert np.max(np.abs(angular_laplacian(h.values, g))) > 1e-2


def test_harmonic_limit_rotates_rigidly():
    period = 2 * math.pi
    cfg = WignerRunConfig("fixed", GRID, 0.0, [0.25 * period, period], 0.1, alpha_bar=1e-3)
    f0 = off_centre()
    quarter, full = evolve_fixed(cfg, f0)
    # a quarter turn of the clockwise flow maps (x, u) -> (u, -x)
    exact_q = gaussian_field("fixed", GRID, 1.0, 0.0, center=(-0.7, -1.5)).values
    assert np.max(np.abs(quarter.values - exact_q)) < 1e-8
    assert np.max(np.abs(full.values - f0.values)) < 1e-8


def test_driven_linear_oscillator_follows_classical_centre():
    # beta = 0 with a drive: the Gaussian is carried along the driven trajectory
    from scipy.integrate import solve_ivp

    from chirplock.wigner.fixed import drive_phase

    cfg = WignerRunConfig("fixed", GRID, 0.0, [6.0], 0.05, alpha_bar=0.02, eps_bar=0.3)
    f = evolve_fixed(cfg)[-1]
    sol = solve_ivp(lambda t, y: [y[1], -y[0] - 0.3 * math.cos(drive_phase(t, 0.02))],
                    (0.0, 6.0), [0.0, 0.0], rtol=1e-12, atol=1e-12)
    x, u = sol.y[:, -1]
    exact = gaussian_field("fixed", GRID, 1.0, 6.0, center=(x, u)).values
    assert np.max(np.abs(f.values - exact)) < 1e-4


def test_split_and_rk4_agree():
    g = PhaseGrid.square(7.0, 48)
    kw = dict(alpha_bar=1e-3, beta_bar=0.02, eps_bar=0.05, gamma=2.0)
    split = evolve_fixed(WignerRunConfig("fixed", g, 0.0, [3.0], 0.005, **kw))[-1]
    rk4 = evolve_fixed(WignerRunConfig("fixed", g, 0.0, [3.0], 0.005, scheme="rk4", **kw))[-1]
    assert np.max(np.abs(split.values - rk4.values)) < 1e-3 * np.max(np.abs(rk4.values))


def test_rk4_step_limit():
    cfg = WignerRunConfig("fixed", GRID, 0.0, [1.0], 0.5, scheme="rk4", beta_bar=0.01)
    with pytest.raises(CFLViolation) as info:
        evolve_fixed(cfg)
    assert 0 < info.value.admissible < 0.5


def test_config_validation():
    with pytest.raises(ValueError):
        WignerRunConfig("fixed", GRID, 0.0, [1.0], 0.1, gamma=3.0)
    with pytest.raises(ValueError):
        WignerRunConfig("rotating", GRID, 0.0, [1.0], 0.1, lam=0.2, sigma2=0.05)
    with pytest.raises(ValueError):
        WignerRunConfig("fixed", GRID, 0.0, [2.0, 1.0], 0.1)
    # the classical limits are allowed
    WignerRunConfig("fixed", GRID, 0.0, [1.0], 0.1, gamma=0.0)
    WignerRunConfig("rotating", GRID, 0.0, [1.0], 0.1, lam=0.0, sigma2=0.1)


def test_default_grids_cover_the_physics():
    g = default_grid("fixed", beta_bar=0.0042, variance=1.0, hbar=2.0)
    assert g.xmax > 1 / math.sqrt(0.0042)
    r = default_grid("rotating", tau_end=24.0, variance=0.05, hbar=0.1)
    assert r.xmax > math.sqrt(24.0)
    assert r.nx & (r.nx - 1) == 0


def test_classical_limit_matches_characteristics():
    g = PhaseGrid.square(5.0, 128)
    cfg = WignerRunConfig("rotating", g, -4.0, [-1.0], 0.005, mu=0.85, lam=0.0, sigma2=0.1, sponge=False)
    f = evolve_rotating(cfg)[-1]
    ref = classical_characteristics(cfg, -1.0)
    assert np.max(np.abs(f.values - ref.values)) < 0.01 * np.max(ref.values)


def test_rotating_frame_moments_and_locked_fraction_match_ladder():
    P1, P2, tau = 1.925, 0.2, 8.0
    cfg = WignerRunConfig.rotating(P1, P2, -10.0, [tau], dt=0.02, grid=PhaseGrid.square(5.0, 128))
    f = evolve_rotating(cfg)[-1]
    assert f.meta["norm_drift"] < 1e-10
    run = ladder.integrate(DimensionlessParams(P1, P2), -10.0, tau)
    pops = run.final.populations
    n = np.arange(run.N)
    # Weyl symbol of the number operator: <Q^2 + P^2> = 2 lam (<n> + 1/2)
    Q, P = f.grid.mesh()
    assert f.integral(Q * Q + P * P) == pytest.approx(2 * cfg.lam * (np.dot(n, pops) + 0.5), rel=0.03)
    assert locked_fraction(f) == pytest.approx(pops[round(tau / (2 * P2)):].sum(), abs=0.05)


def test_ground_state_has_zero_point_moment():
    cfg = WignerRunConfig.rotating(0.0, 0.5, -5.0, [-5.0], grid=PhaseGrid.square(4.0, 64))
    f = evolve_rotating(cfg)[0]
    Q, P = f.grid.mesh()
    assert f.integral(Q * Q + P * P) == pytest.approx(cfg.lam, rel=1e-8)


def test_negativity_and_coarse_graining():
    f = off_centre()
    assert negativity(f) == 0.0
    same = coarse_grain(f, GRID.dx)
    assert np.array_equal(same.values, f.values)
    # a cat-like interference pattern has negative regions that smoothing removes
    X, U = GRID.mesh()
    vals = f.values * (1 + 0.9 * np.cos(6 * U))
    cat = f.with_values(vals / (vals.sum() * GRID.cell_area))
    assert negativity(cat) == 0.0
    # one full period of the fringes fits the smoothing box exactly
    cell = 3 * GRID.du
    neg = f.with_values(f.values * np.cos(2 * math.pi * U / cell))
    assert negativity(neg) > 0.1
    smooth = coarse_grain(neg, cell)
    # what remains comes from the envelope curvature across the box
    assert smooth.meta["negativity_after"] < 0.15 * smooth.meta["negativity_before"]
    assert smooth.norm == pytest.approx(neg.norm, abs=1e-12)
    with pytest.raises(ValueError):
        coarse_grain(f, 0.5 * GRID.dx)


def test_separatrix_curve():
    pts = separatrix(201)
    xi, up = pts[:, 0], pts[:, 1]
    assert np.allclose(up**2 / 2 + xi**2 / 2 - xi**4 / 4, 0.25, atol=1e-12)
    assert xi.min() == pytest.approx(-1.0) and xi.max() == pytest.approx(1.0)
    assert up.max() == pytest.approx(1 / math.sqrt(2))


def test_locked_fraction_requires_rotating_frame():
    with pytest.raises(ValueError):
        locked_fraction(off_centre())


def test_field_io_round_trip(tmp_path):
    f = off_centre()
    f.meta["tau"] = 1.25
    write_field(tmp_path / "snap", f)
    g = read_field(tmp_path / "snap")
    assert np.array_equal(g.values, f.values)
    assert g.grid == f.grid and g.frame == "fixed" and g.meta["tau"] == 1.25


def test_harmonic_eigenstates_and_projection():
    g = PhaseGrid.square(10.0, 96)
    E, states = quartic_eigenstates(g, 2.0, 0.0, 4)
    # hbar = gamma = 2, unit frequency
    assert E == pytest.approx(2.0 * (np.arange(4) + 0.5), rel=1e-8)
    Ws = [state_wigner(s, g, 2.0) for s in states.T]
    assert g.cell_area * Ws[0].sum() == pytest.approx(1.0, rel=1e-8)
    f = gaussian_field("fixed", g, 1.0, 0.0)
    p = level_populations(f, states, 2.0, Ws)
    assert p == pytest.approx([1, 0, 0, 0], abs=1e-8)
    # overlap formula reproduces |<m|n>|^2
    assert 2 * math.pi * 2.0 * g.cell_area * np.sum(Ws[1] * Ws[2]) == pytest.approx(0.0, abs=1e-8)


def test_field_validation():
    with pytest.raises(ValueError):
        PhaseSpaceField("lab", GRID, np.zeros(GRID.shape), 0.0)
    with pytest.raises(ValueError):
        PhaseSpaceField("fixed", GRID, np.zeros((3, 3)), 0.0)


def test_sponge_absorbs_escaping_mass():
    # starts outside the separatrix (saddle at |x| = 1/sqrt(0.1)) and escapes
    g = PhaseGrid.square(8.0, 64)
    f0 = gaussian_field("fixed", g, 0.5, 0.0, center=(3.5, 0.0))
    cfg = WignerRunConfig("fixed", g, 0.0, [3.0], 0.05, alpha_bar=1e-3, beta_bar=0.1, gamma=0.0,
                          sponge_width=0.2, sponge_rate=5.0)
    f = evolve_fixed(cfg, f0)[-1]
    assert f.meta["absorbed_mass"] > 1e-3
    assert f.meta["norm_drift"] < 1e-12


def test_separatrix_mass():
    from chirplock.wigner import separatrix_mass

    g = PhaseGrid.square(12.0, 96)
    f = gaussian_field("fixed", g, 1.0, 0.0)
    assert separatrix_mass(f, 0.0) == pytest.approx(1.0)
    # saddle energy 1/(4 beta) = 25 is far above the thermal spread
    assert separatrix_mass(f, 0.01) == pytest.approx(1.0, abs=1e-8)
    assert separatrix_mass(f, 0.5) < 0.5


@pytest.mark.slow
def test_quantum_correction_vanishes_like_lambda_squared():
    g = PhaseGrid.square(5.0, 128)
    errs = []
    for lam in (0.1, 0.05):
        cfg = WignerRunConfig("rotating", g, -4.0, [-1.0], 0.005, mu=0.85, lam=lam, sigma2=0.1, sponge=False)
        f = evolve_rotating(cfg)[-1]
        errs.append(np.max(np.abs(f.values - classical_characteristics(cfg, -1.0).values)))
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.25)
