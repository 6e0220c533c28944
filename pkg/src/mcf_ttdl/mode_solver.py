"""Scalar LP01 mode solver for layered radial index profiles.

The weakly guiding wave equation

    (1/r) d/dr (r dpsi/dr) + k^2 n(r)^2 psi = beta^2 psi

is discretized with a cell-centred finite-volume scheme on a radial grid
whose faces coincide with every layer interface.  Beyond the outermost
interface the grid is stretched geometrically up to the domain radius,
where the field is matched to the K0 decay of the outer cladding.  The
resulting symmetric tridiagonal eigenproblem is solved for its largest
eigenvalue only.

Group delay, dispersion and slope follow from n_eff(lambda) by 5-point
centred differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.linalg import eigh_tridiagonal
from scipy.special import k0e, k1e

from ._parallel import pmap
from .mcf_model import CoreDispersion, TrenchProfile

# ps per km for a unit group index
PS_PER_KM = 1e3 / C_LIGHT * 1e12


class ModeSolverError(RuntimeError):
    pass


class NoGuidedModeError(ModeSolverError):
    pass


class ConvergenceError(ModeSolverError):
    pass


@dataclass(frozen=True)
class MaterialModel:
    """Three-term Sellmeier model; resonance wavelengths in um."""

    name: str
    amplitudes: tuple[float, float, float]
    resonances: tuple[float, float, float]
    window: tuple[float, float] = (1200.0, 1700.0)  # nm
    source: str = ""

    def index(self, wavelength):
        x2 = (np.asarray(wavelength, dtype=float) * 1e-3) ** 2
        s = sum(b * x2 / (x2 - r * r) for b, r in zip(self.amplitudes, self.resonances))
        return np.sqrt(1.0 + s)


FUSED_SILICA = MaterialModel(
    name="fused_silica_malitson",
    amplitudes=(0.6961663, 0.4079426, 0.8974794),
    resonances=(0.0684043, 0.1162414, 9.896161),
    source="I. H. Malitson, J. Opt. Soc. Am. 55, 1205 (1965); 20 C",
)


def material_index(model: MaterialModel, wavelength: float) -> float:
    lo, hi = model.window
    if not lo <= wavelength <= hi:
        raise ValueError(f"{wavelength} nm outside the {model.name} validity window [{lo}, {hi}] nm")
    return float(model.index(wavelength))


@dataclass(frozen=True)
class RadialIndexProfile:
    """Concentric layers around the core axis, then semi-infinite cladding.

    ``radii`` are outer layer radii in um (strictly increasing) and
    ``deltas`` the matching relative index offsets in percent: positive for
    raised layers, negative for depressed ones.  Offsets use the larger index
    as reference, so a raised layer has n^2 = n_cl^2 / (1 - 2 delta) and a
    depressed one n^2 = n_cl^2 (1 - 2 |delta|).
    """

    radii: tuple[float, ...]
    deltas: tuple[float, ...]
    material: MaterialModel = FUSED_SILICA

    def __post_init__(self):
        object.__setattr__(self, "radii", tuple(float(r) for r in self.radii))
        object.__setattr__(self, "deltas", tuple(float(d) for d in self.deltas))
        if not self.radii or len(self.radii) != len(self.deltas):
            raise ValueError("need one delta per layer and at least one layer")
        if self.radii[0] <= 0 or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise ValueError("layer radii must be positive and strictly increasing")
        if any(abs(d) >= 50 for d in self.deltas):
            raise ValueError("relative index offsets must stay below 50 %")

    @classmethod
    def step_index(cls, a: float, delta: float, material: MaterialModel = FUSED_SILICA):
        return cls((a,), (delta,), material)

    @classmethod
    def from_trench(cls, profile: TrenchProfile, material: MaterialModel = FUSED_SILICA):
        a1, r2, r3 = profile.interfaces
        return cls((a1, r2, r3), (profile.delta1, 0.0, -profile.delta2), material)

    def cladding_index(self, wavelength: float) -> float:
        return float(self.material.index(wavelength))

    def layer_indices(self, wavelength: float) -> np.ndarray:
        n_cl = self.cladding_index(wavelength)
        d = np.asarray(self.deltas) * 1e-2
        n2 = np.where(d >= 0, n_cl**2 / (1 - 2 * d), n_cl**2 * (1 + 2 * d))
        return np.sqrt(n2)


@dataclass(frozen=True)
class Numerics:
    """Discretization controls.

    ``resolution`` is cells per um inside the layered region.  Fixing
    ``layer_cells``/``outer_cells`` keeps the cell count constant while the
    layer radii change, which makes n_eff a smooth function of the profile
    parameters (used by the profile fitter).
    """

    resolution: float = 50.0
    domain_factor: float = 6.0
    stretch: float = 8.0  # ratio of last to first outer cell
    layer_cells: tuple[int, ...] | None = None
    outer_cells: int | None = None
    bc_tol: float = 1e-14
    bc_max_iter: int = 50

    def refined(self, factor: int = 2) -> "Numerics":
        return Numerics(
            self.resolution * factor, self.domain_factor, self.stretch,
            None if self.layer_cells is None else tuple(n * factor for n in self.layer_cells),
            None if self.outer_cells is None else self.outer_cells * factor,
            self.bc_tol, self.bc_max_iter)

    def cell_counts(self, radii) -> tuple[tuple[int, ...], int]:
        if self.layer_cells is not None:
            layers = self.layer_cells
        else:
            edges = (0.0,) + tuple(radii)
            layers = tuple(max(1, math.ceil((b - a) * self.resolution))
                           for a, b in zip(edges, edges[1:]))
        if self.outer_cells is not None:
            outer = self.outer_cells
        else:
            outer = max(1, math.ceil(self._outer_weight() * self.outer_length(radii) * self.resolution))
        return layers, outer

    def outer_length(self, radii) -> float:
        return (self.domain_factor - 1.0) * radii[-1]

    def _outer_weight(self) -> float:
        # Fraction of the outer span taken by the first cell, times the cell
        # count, for an exponential map with the configured stretch.
        alpha = math.log(self.stretch)
        return alpha / math.expm1(alpha)


@dataclass(frozen=True)
class ModeSolution:
    n_eff: float
    wavelength: float  # nm
    converged: bool
    n_cells: int
    domain_radius: float  # um
    bc_iterations: int


def radial_grid(radii, numerics: Numerics) -> np.ndarray:
    """Cell faces from the axis to the domain radius."""
    layers, outer = numerics.cell_counts(radii)
    if len(layers) != len(radii):
        raise ValueError("layer_cells must give one count per layer")
    edges = (0.0,) + tuple(radii)
    faces = [np.zeros(1)]
    for (a, b), m in zip(zip(edges, edges[1:]), layers):
        faces.append(np.linspace(a, b, m + 1)[1:])
    length = numerics.outer_length(radii)
    alpha = math.log(numerics.stretch)
    s = np.linspace(0.0, 1.0, outer + 1)[1:]
    faces.append(radii[-1] + length * np.expm1(alpha * s) / math.expm1(alpha))
    return np.concatenate(faces)


def solve_lp01(profile: RadialIndexProfile, wavelength: float,
               numerics: Numerics | None = None, strict: bool = True) -> ModeSolution:
    """Effective index of the fundamental scalar mode at ``wavelength`` (nm)."""
    num = numerics or Numerics()
    material_index(profile.material, wavelength)  # window check
    k = 2 * math.pi / (wavelength * 1e-3)
    n_cl = profile.cladding_index(wavelength)
    n_layers = profile.layer_indices(wavelength)
    n_max = max(float(n_layers.max()), n_cl)
    if n_max <= n_cl:
        raise NoGuidedModeError(f"no raised layer: no guided LP01 mode at {wavelength} nm")

    faces = radial_grid(profile.radii, num)
    centers = 0.5 * (faces[1:] + faces[:-1])
    volume = 0.5 * (faces[1:] ** 2 - faces[:-1] ** 2)
    n = np.full(centers.size, n_cl)
    inner = 0.0
    for r, nl in zip(profile.radii, n_layers):
        n[(centers > inner) & (centers < r)] = nl
        inner = r

    couple = faces[1:-1] / np.diff(centers)
    diag = k * k * n * n * volume
    diag[:-1] -= couple
    diag[1:] -= couple
    scale = 1.0 / np.sqrt(volume)
    off = couple * scale[:-1] * scale[1:]

    r_out, r_last = faces[-1], centers[-1]
    last = centers.size - 1
    n_eff = n_cl + 0.5 * (n_max - n_cl)
    converged = False
    it = 0
    for it in range(1, num.bc_max_iter + 1):
        gamma = k * math.sqrt(max(n_eff * n_eff - n_cl * n_cl, 1e-16))
        # Outward flux r psi'(R) with psi ~ K0(gamma r) between the last
        # cell centre and the domain edge.
        robin = r_out * gamma * k1e(gamma * r_out) / k0e(gamma * r_last) \
            * math.exp(-gamma * (r_out - r_last))
        d = diag.copy()
        d[-1] -= robin
        w = eigh_tridiagonal(d * scale * scale, off, eigvals_only=True,
                             select="i", select_range=(last, last))
        beta2 = float(w[0])
        new = math.sqrt(beta2) / k if beta2 > 0 else 0.0
        if new <= n_cl:
            raise NoGuidedModeError(f"no guided LP01 mode at {wavelength} nm (cutoff)")
        delta = abs(new - n_eff)
        n_eff = new
        if delta <= num.bc_tol * n_eff:
            converged = True
            break
    if strict and not converged:
        raise ConvergenceError(f"boundary iteration did not converge at {wavelength} nm")
    if not n_cl < n_eff < n_max:
        raise ModeSolverError(f"n_eff {n_eff} outside guidance bounds ({n_cl}, {n_max})")
    return ModeSolution(n_eff, wavelength, converged, centers.size, float(r_out), it)


MIN_STENCIL_STEP = 0.1  # nm; below this the third difference drowns in round-off
STENCIL = (-2, -1, 0, 1, 2)


def stencil_derivatives(values, step: float) -> tuple[float, float, float, float]:
    """Value and first three derivatives at the centre of a 5-point stencil."""
    f = np.asarray(values, dtype=float)
    d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * step)
    d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * step**2)
    d3 = (-f[0] + 2 * f[1] - 2 * f[3] + f[4]) / (2 * step**3)
    return float(f[2]), float(d1), float(d2), float(d3)


def dispersion_from_neff(neff_values, anchor: float, step: float) -> CoreDispersion:
    """tau0 (ps/km), D (ps/(km nm)) and S (ps/(km nm^2)) from n_eff on the stencil.

    tau = (n - lam n') / c, D = -lam n'' / c, S = -(n'' + lam n''') / c.
    """
    n, d1, d2, d3 = stencil_derivatives(neff_values, step)
    tau0 = (n - anchor * d1) * PS_PER_KM
    D = -anchor * d2 * PS_PER_KM
    S = -(d2 + anchor * d3) * PS_PER_KM
    return CoreDispersion(tau0, D, S)


def dispersion_from_profile(profile: RadialIndexProfile, anchor: float = 1550.0,
                            band: tuple[float, float] | None = None, step: float = 2.0,
                            numerics: Numerics | None = None) -> CoreDispersion:
    if step < MIN_STENCIL_STEP:
        raise ValueError(f"stencil step {step} nm below the {MIN_STENCIL_STEP} nm noise floor")
    lams = [anchor + k * step for k in STENCIL]
    if band is not None and not (band[0] <= lams[0] and lams[-1] <= band[1]):
        raise ValueError(f"stencil {lams[0]}..{lams[-1]} nm leaves band {band}")
    sols = pmap(lambda lam: solve_lp01(profile, lam, numerics), lams)
    return dispersion_from_neff([s.n_eff for s in sols], anchor, step)


def material_dispersion(model: MaterialModel, anchor: float = 1550.0, step: float = 2.0) -> CoreDispersion:
    """Bulk-material tau0/D/S, i.e. with the waveguide contribution removed."""
    vals = [material_index(model, anchor + k * step) for k in STENCIL]
    return dispersion_from_neff(vals, anchor, step)
