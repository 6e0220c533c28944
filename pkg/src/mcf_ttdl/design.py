"""Inverse design: grating spacings, operating wavelengths, core dispersion
assignment and trench-profile fitting."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.stats import qmc

from ._parallel import pmap
from .hetero_delay import HeteroTolerances
from .mcf_model import CoreDispersion, TrenchProfile
from .mode_solver import (ModeSolverError, Numerics, RadialIndexProfile,
                          dispersion_from_profile)


def spacing_for_fsr(target_fsr: float, group_index: float) -> float:
    """Grating spacing in mm giving ``target_fsr`` (GHz): d = c / (2 n_g FSR)."""
    if not target_fsr > 0:
        raise ValueError(f"target FSR must be > 0 GHz, got {target_fsr}")
    if not group_index > 1:
        raise ValueError(f"group index must be > 1, got {group_index}")
    return C_LIGHT / (2.0 * group_index * target_fsr * 1e9) * 1e3


def wavelength_for_fsr_hetero(delta_d: float, length: float, anchor: float, target_fsr: float,
                              delta_s: float = 0.0,
                              tolerances: HeteroTolerances | None = None) -> float:
    """Operating wavelength (nm) whose adjacent-core delay gives ``target_fsr``.

    First-order inversion lam = lam0 + 1000 / (dD L FSR) in ps, nm, km, GHz
    units.  When a slope mismatch ``delta_s`` makes the quadratic term exceed
    the tolerance, one Newton step on the full quadratic refines the result.
    """
    if delta_d == 0:
        raise ValueError("zero incremental dispersion: no spatial diversity possible")
    if not length > 0:
        raise ValueError(f"link length must be > 0 km, got {length}")
    if not target_fsr > 0:
        raise ValueError(f"target FSR must be > 0 GHz, got {target_fsr}")
    tol = tolerances or HeteroTolerances()
    want = 1e3 / target_fsr  # ps
    x = want / (delta_d * length)
    if delta_s != 0 and abs(delta_s * x) / (2 * abs(delta_d)) > tol.quadratic_fraction:
        g = length * (delta_d * x + 0.5 * delta_s * x * x) - want
        dg = length * (delta_d + delta_s * x)
        x -= g / dg
    return anchor + x


def assign_core_dispersions(core_count: int, d1: float, delta_d: float, tau0: float = 0.0,
                            slope: float = 0.0, relative: bool = True) -> list[CoreDispersion]:
    """D_n = d1 + (n - 1) delta_d with a shared tau0 and slope."""
    if core_count < 1:
        raise ValueError("core_count must be >= 1")
    return [CoreDispersion(tau0, d1 + n * delta_d, slope, relative=relative)
            for n in range(core_count)]


PARAMS = ("a1", "delta1", "a2", "w")


@dataclass(frozen=True)
class ProfileSearchBox:
    """Parameter ranges for trench profiles (um and %); delta2 is fixed.

    A dimension with min == max is held fixed.
    """

    a1: tuple[float, float] = (3.42, 4.98)
    delta1: tuple[float, float] = (0.3333, 0.3864)
    a2: tuple[float, float] = (2.42, 5.48)
    w: tuple[float, float] = (2.61, 5.41)
    delta2: float = 1.0

    def __post_init__(self):
        for name in PARAMS:
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and 0 < lo <= hi):
                raise ValueError(f"box range for {name} must satisfy 0 < min <= max, got {(lo, hi)}")
        if not self.delta2 > 0:
            raise ValueError("delta2 must be > 0")

    @property
    def lower(self) -> np.ndarray:
        return np.array([getattr(self, p)[0] for p in PARAMS])

    @property
    def upper(self) -> np.ndarray:
        return np.array([getattr(self, p)[1] for p in PARAMS])

    def to_profile(self, x) -> TrenchProfile:
        return TrenchProfile(*(float(v) for v in x), delta2=self.delta2)

    def contains(self, profile: TrenchProfile) -> bool:
        x = np.array([getattr(profile, p) for p in PARAMS])
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))

    def fixed_numerics(self, resolution: float = 50.0, domain_factor: float = 6.0) -> Numerics:
        """Numerics with cell counts frozen at the box maximum."""
        hi = self.upper
        layers = (hi[0], hi[2], hi[3])
        base = Numerics(resolution=resolution, domain_factor=domain_factor)
        radii = np.cumsum(layers)
        counts, outer = base.cell_counts(tuple(radii))
        return Numerics(resolution=resolution, domain_factor=domain_factor,
                        layer_cells=counts, outer_cells=outer)


@dataclass(frozen=True)
class FitWeights:
    """Inverse squared tolerances of the tau0, D and S terms."""

    tau0: float = 1.0 / 0.01**2
    D: float = 1.0 / 0.05**2
    S: float = 1.0 / 0.005**2


@dataclass(frozen=True)
class FitResult:
    profile: TrenchProfile
    achieved: CoreDispersion
    objective: float
    initial_objective: float
    iterations: int
    evaluations: int
    converged: bool
    seed: int
    history: tuple[float, ...] = field(default=(), repr=False)


class InfeasibleBoxError(ValueError):
    pass


def _residuals(got: CoreDispersion, target: CoreDispersion, w: FitWeights) -> np.ndarray:
    return np.array([math.sqrt(w.tau0) * (got.tau0 - target.tau0),
                     math.sqrt(w.D) * (got.D - target.D),
                     math.sqrt(w.S) * (got.S - target.S)])


class _Evaluator:
    """Maps unit-cube points to weighted residuals; counts evaluations.

    Points are coordinates in [0, 1] over the free box dimensions.
    """

    def __init__(self, box, target, weights, anchor, step, numerics, budget):
        self.box, self.target, self.weights = box, target, weights
        self.anchor, self.step, self.numerics = anchor, step, numerics
        self.budget = budget
        self.lower, self.upper = box.lower, box.upper
        self.free = self.upper > self.lower
        self.count = 0
        self.best_val = math.inf
        self.best_u = None
        self.best_r = None

    def physical(self, u) -> np.ndarray:
        x = self.lower.copy()
        x[self.free] = self.lower[self.free] + np.clip(u, 0.0, 1.0) * (
            self.upper[self.free] - self.lower[self.free])
        return x

    def dispersion(self, u) -> CoreDispersion:
        profile = RadialIndexProfile.from_trench(self.box.to_profile(self.physical(u)))
        return dispersion_from_profile(profile, self.anchor, step=self.step, numerics=self.numerics)

    def raw(self, u) -> np.ndarray:
        try:
            got = self.dispersion(u)
        except ModeSolverError:
            return np.full(3, math.inf)
        return _residuals(got, self.target, self.weights)

    def record(self, u, r) -> float:
        self.count += 1
        val = float(r @ r) if np.all(np.isfinite(r)) else math.inf
        if val < self.best_val:
            self.best_val, self.best_u, self.best_r = val, np.array(u, dtype=float), r
        return val

    def __call__(self, u):
        r = self.raw(u)
        return self.record(u, r), r

    @property
    def exhausted(self) -> bool:
        return self.count >= self.budget


def _model_step(pts, res, radius, damping=1e-8):
    """Damped Gauss-Newton point of the linear residual model through the simplex.

    With n + 1 affinely independent vertices the model interpolates the
    residuals exactly, giving a derivative-free Jacobian estimate.  The step
    is clipped to the trust ``radius``.
    """
    y = (pts[1:] - pts[0]).T
    if np.linalg.cond(y) > 1e8:
        return None
    jac = (res[1:] - res[0]).T @ np.linalg.inv(y)
    a = jac.T @ jac
    a += damping * np.trace(a) / a.shape[0] * np.eye(a.shape[0])
    step = np.linalg.solve(a, -jac.T @ res[0])
    length = np.linalg.norm(step)
    if length > radius:
        step *= radius / length
    return pts[0] + step


def _simplex(ev: _Evaluator, u0, r0, scale, tol, patience):
    """Box-projected Nelder-Mead on the unit cube, with a residual-model step.

    Each iteration first tries the model point; if it beats the best vertex
    it replaces the worst one, otherwise the usual reflection, expansion,
    contraction and shrink moves follow.  Two rejected model points in a row
    mean the simplex no longer supports a useful model, so control returns
    to the caller to rebuild it.  Returns (point, value, iterations,
    converged, trust radius).
    """
    proj = lambda u: np.clip(u, 0.0, 1.0)
    n = u0.size
    pts = [proj(np.asarray(u0, dtype=float))]
    res = [r0]
    vals = [float(r0 @ r0)]
    for j in range(n):
        if ev.exhausted:
            return pts[0], vals[0], 0, False, scale
        p = pts[0].copy()
        p[j] = p[j] + scale if p[j] + scale <= 1.0 else p[j] - scale
        v, r = ev(p)
        pts.append(p), res.append(r), vals.append(v)
    pts, res, vals = np.array(pts), np.array(res), np.array(vals)

    history = [float(vals.min())]
    iters = 0
    converged = False
    radius = scale
    rejected = 0
    while not ev.exhausted:
        iters += 1
        order = np.argsort(vals, kind="stable")
        pts, res, vals = pts[order], res[order], vals[order]

        if np.all(np.isfinite(res)) and radius > 1e-9:
            cand = _model_step(pts, res, radius)
            if cand is None:
                # Collapsed simplex: hand back so the caller rebuilds one.
                break
            else:
                cand = proj(cand)
                if np.linalg.norm(cand - pts[0]) > 1e-14:
                    v, r = ev(cand)
                    if v < vals[0]:
                        radius = min(2.0 * radius, 1.0)
                        rejected = 0
                        pts[-1], res[-1], vals[-1] = cand, r, v
                        history.append(float(vals.min()))
                        if _stalled(history, tol, patience):
                            converged = True
                            break
                        continue
                    radius *= 0.5
                    rejected += 1
                    if ev.exhausted or rejected >= 2:
                        break

        centroid = pts[:-1].mean(axis=0)
        worst = pts[-1]
        xr = proj(centroid + (centroid - worst))
        fr, rr = ev(xr)
        if fr < vals[0] and not ev.exhausted:
            xe = proj(centroid + 2.0 * (centroid - worst))
            fe, re = ev(xe)
            pts[-1], res[-1], vals[-1] = (xe, re, fe) if fe < fr else (xr, rr, fr)
        elif fr < vals[-2]:
            pts[-1], res[-1], vals[-1] = xr, rr, fr
        elif not ev.exhausted:
            xc = centroid + 0.5 * ((xr if fr < vals[-1] else worst) - centroid)
            fc, rc = ev(xc)
            if fc < min(fr, vals[-1]):
                pts[-1], res[-1], vals[-1] = xc, rc, fc
            else:
                for i in range(1, len(pts)):
                    if ev.exhausted:
                        break
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
                    vals[i], res[i] = ev(pts[i])
        history.append(float(vals.min()))
        if _stalled(history, tol, patience):
            converged = True
            break
    best = int(np.argmin(vals))
    return pts[best], float(vals[best]), iters, converged, radius


def _stalled(history, tol, patience) -> bool:
    if len(history) <= patience:
        return False
    old = history[-patience - 1]
    return old - history[-1] <= tol * old


def fit_profile_to_dispersion(target: CoreDispersion, box: ProfileSearchBox | None = None,
                              weights: FitWeights | None = None, budget: int = 500,
                              seed: int = 20170125, n_seeds: int = 8, anchor: float = 1550.0,
                              step: float = 2.0, numerics: Numerics | None = None,
                              tol: float = 1e-3, patience: int = 10, goal: float = 1e-4,
                              simplex_scale: float = 0.1) -> FitResult:
    """Fit a trench profile inside ``box`` to a target tau0/D/S triple.

    The objective is the weighted squared error of (tau0, D, S).
    Latin-hypercube seeds are evaluated first, then simplex searches start
    from the best seed.  A search ends when the objective improves by less
    than ``tol`` (relative) over ``patience`` iterations; the next search
    restarts from the best point found while that keeps paying off, or else
    from the next seed.  Stops at ``goal`` or when ``budget`` dispersion
    evaluations (5 LP01 solves each) are spent.
    """
    box = box or ProfileSearchBox()
    weights = weights or FitWeights()
    if budget < 1:
        raise ValueError("budget must be >= 1 evaluation")
    numerics = numerics or box.fixed_numerics()
    ev = _Evaluator(box, target, weights, anchor, step, numerics, budget)

    if not ev.free.any():
        u = np.zeros(0)
        got = ev.dispersion(u)
        val = ev.record(u, _residuals(got, target, weights))
        return FitResult(box.to_profile(ev.physical(u)), got, val, val, 0, ev.count, True,
                         seed, (val,))

    n_free = int(ev.free.sum())
    n0 = max(1, min(n_seeds, budget))
    seeds = qmc.LatinHypercube(d=n_free, seed=seed).random(n0)

    # Seed evaluations are independent and may run concurrently; results are
    # recorded in seed order so the search below is deterministic.
    seed_res = pmap(ev.raw, list(seeds))
    seed_vals = [ev.record(u, r) for u, r in zip(seeds, seed_res)]
    failed = sum(not math.isfinite(v) for v in seed_vals)
    if failed > 0.5 * n0:
        raise InfeasibleBoxError(f"mode solver failed on {failed} of {n0} seed profiles")
    initial = min(seed_vals)

    order = [int(k) for k in np.argsort(seed_vals, kind="stable") if math.isfinite(seed_vals[k])]
    start, start_res = seeds[order[0]], seed_res[order[0]]
    next_seed = 1
    history = [initial]
    iterations = 0
    converged = False
    scale = simplex_scale
    while not ev.exhausted and ev.best_val > goal:
        start_val = float(start_res @ start_res)
        u, val, it, converged, radius = _simplex(ev, start, start_res, scale, tol, patience)
        iterations += it
        history.append(ev.best_val)
        if (val < (1.0 - tol) * start_val and not converged) or next_seed >= len(order):
            # Still descending: rebuild a simplex at the best point, sized
            # to the trust radius the model last worked at.
            start, start_res = ev.best_u, ev.best_r
            scale = min(simplex_scale, max(2.0 * radius, 1e-6))
        else:
            start, start_res = seeds[order[next_seed]], seed_res[order[next_seed]]
            next_seed += 1
            scale = simplex_scale
    converged = converged or ev.best_val <= goal

    best_u = ev.best_u
    achieved = ev.dispersion(best_u)  # fresh evaluation of the returned profile
    val = float(_residuals(achieved, target, weights) @ _residuals(achieved, target, weights))
    return FitResult(box.to_profile(ev.physical(best_u)), achieved, val, initial, iterations,
                     ev.count, converged, seed, tuple(history))
