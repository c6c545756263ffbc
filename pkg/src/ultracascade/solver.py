"""Hierarchical cascade systems and three mutually validating solvers.

The coefficient form of the cascade equation is strictly triangular: the
equation for a wavelet coefficient is linear once all coefficients on
strictly larger balls are known.  ``solve_recurrent`` exploits that
structure scale by scale with an integrating factor.  ``solve_rk``
integrates the same coefficient system generically, and ``solve_leaf``
integrates the original integro-differential equation directly on leaf
values.  All three share one uniform time grid so trajectories compare
without interpolation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .spectral import (
    DEFAULT_LEAF_CAP,
    Kernel,
    apply_pdo_direct,
    eigenvalue,
    interaction_integral_direct,
    interaction_table,
)
from .tree import BallTree
from .wavelets import LeafField, WaveletBasis, WaveletField, analyze, synthesize

__all__ = [
    "SolverAbort",
    "CascadeSystem",
    "Trajectory",
    "LeafTrajectory",
    "assemble",
    "time_grid",
    "solve_recurrent",
    "solve_rk",
    "solve_leaf",
    "solve_all",
    "leaf_rhs",
    "analyze_trajectory",
    "energy_by_level",
]

# one-step integrators reject a step whose halved-step error estimate
# exceeds this; it signals that dt is too coarse for the problem
STEP_ERROR_TOL = 1e-3

# diagnostic abort threshold; the triangular structure keeps solutions
# bounded on finite trees, so reaching this means the setup is off
BLOWUP_LIMIT = 1e12


class SolverAbort(RuntimeError):
    """Raised when a solve leaves its trust region (step error or blowup)."""


@dataclass(frozen=True)
class CascadeSystem:
    """Assembled coefficient system: decay rates plus triangular couplings.

    ``couplings`` maps each internal vertex I to the weights of the slots
    on strictly larger balls that drive every coefficient at I: entries
    are (ancestor slot index, weight), with weight = (constant value of
    the ancestor wavelet on I) * (interaction coefficient of the pair).
    The list order is fixed (ancestors from parent to root, wavelet index
    ascending) and is the reduction order used by the solvers.
    """

    tree: BallTree
    basis: WaveletBasis
    interaction: Kernel
    dissipation: Kernel
    eta_by_vertex: dict[int, complex]
    couplings: dict[int, tuple[tuple[int, complex], ...]]

    @property
    def slots(self) -> tuple[tuple[int, int], ...]:
        return self.basis.slots

    @property
    def labels(self) -> tuple[str, ...]:
        return self.basis.labels

    @property
    def n_slots(self) -> int:
        return self.basis.n_slots

    @property
    def n_couplings(self) -> int:
        return sum(len(v) for v in self.couplings.values())

    def slot_eta(self) -> np.ndarray:
        """Decay rate per slot (a slot inherits the rate of its vertex)."""
        return np.array(
            [self.eta_by_vertex[v] for v, _ in self.slots], dtype=np.complex128
        )

    def coupling_matrix(self) -> np.ndarray:
        """Dense (slot, slot) weight matrix; strictly triangular by depth."""
        W = np.zeros((self.n_slots, self.n_slots), dtype=np.complex128)
        for i, (v, _) in enumerate(self.slots):
            for a_slot, w in self.couplings[v]:
                W[i, a_slot] += w
        return W


def assemble(
    tree: BallTree,
    basis: WaveletBasis,
    interaction: Kernel,
    dissipation: Kernel,
) -> CascadeSystem:
    """Build the coefficient system for a tree, basis, and kernel pair.

    Decay rates come from ``eigenvalue`` of the dissipation kernel; the
    coupling weights pair ``interaction_coefficient`` with the constant
    value of the ancestor wavelet on the descendant ball.  Zero weights
    are dropped, so a constant interaction kernel yields a system with no
    couplings at all.
    """
    for kern in (interaction, dissipation):
        if kern.tree is not tree and kern.tree != tree:
            raise ValueError("kernels must live on the system's tree")
    if basis.tree is not tree and basis.tree != tree:
        raise ValueError("basis must live on the system's tree")

    table = interaction_table(interaction)
    eta_by_vertex = {
        int(v): eigenvalue(dissipation, int(v)) for v in tree.internal
    }
    couplings: dict[int, tuple[tuple[int, complex], ...]] = {}
    for v in tree.internal:
        v = int(v)
        entries: list[tuple[int, complex]] = []
        for anc in tree.ancestors(v):
            coeff = table[(anc, v)]
            if coeff == 0:
                continue
            on_path = tree.child_slot[tree.child_toward(anc, v)]
            block = basis.coeffs[anc]
            for jp in range(block.shape[0]):
                w = complex(block[jp, on_path]) * coeff
                if w == 0:
                    continue
                entries.append((basis.slot_index[(anc, jp)], w))
        couplings[v] = tuple(entries)
    return CascadeSystem(
        tree, basis, interaction, dissipation, eta_by_vertex, couplings
    )


def time_grid(t_end: float, dt: float) -> np.ndarray:
    """Uniform grid 0, dt, ..., t_end; dt must divide t_end."""
    t_end = float(t_end)
    dt = float(dt)
    if t_end <= 0 or dt <= 0:
        raise ValueError(f"t_end and dt must be positive, got {t_end}, {dt}")
    n = int(round(t_end / dt))
    if n < 1 or abs(n * dt - t_end) > 1e-9 * t_end:
        raise ValueError(f"dt={dt} does not divide t_end={t_end}")
    return np.arange(n + 1) * dt


@dataclass
class Trajectory:
    """Wavelet-coefficient values on a uniform time grid.

    Columns follow the slot order of the basis; ``labels`` carries the
    path:index name of each slot.
    """

    grid: np.ndarray
    slots: tuple[tuple[int, int], ...]
    labels: tuple[str, ...]
    depths: np.ndarray
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def column(self, vertex: int, j: int) -> np.ndarray:
        return self.values[:, self.slots.index((int(vertex), int(j)))]

    def sup_distance(self, other: "Trajectory") -> float:
        """Largest pointwise coefficient difference over the whole grid."""
        if self.values.shape != other.values.shape:
            raise ValueError("trajectories have different shapes")
        if not np.array_equal(self.grid, other.grid):
            raise ValueError("trajectories use different grids")
        return float(np.abs(self.values - other.values).max())


@dataclass
class LeafTrajectory:
    """Leaf-value snapshots of the field on a uniform time grid."""

    grid: np.ndarray
    tree: BallTree
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def field_at(self, index: int) -> LeafField:
        return LeafField(self.tree, self.values[index].copy())


def _slot_depths(system: CascadeSystem) -> np.ndarray:
    return np.array([system.tree.depth[v] for v, _ in system.slots])


def _check_initial(system: CascadeSystem, v0: WaveletField) -> np.ndarray:
    if v0.basis is not system.basis:
        raise ValueError("initial field must use the system's basis")
    return v0.dense()


def solve_recurrent(
    system: CascadeSystem,
    v0: WaveletField,
    t_end: float,
    dt: float,
) -> Trajectory:
    """Solve scale by scale with the integrating-factor closed form.

    Processing vertices from the root downward, every coefficient obeys a
    linear equation whose drive depends only on already-solved ancestor
    slots; the solution is v(0) times the exponential of minus the decay
    rate times t minus the running integral of the drive.  The integral
    is taken by cumulative trapezoid on the shared grid, making this
    solver second-order in dt when couplings are active and exact (up to
    rounding) when they are not.  Slots that start at zero stay exactly
    zero.
    """
    grid = time_grid(t_end, dt)
    v0vec = _check_initial(system, v0)
    n = len(grid)
    values = np.zeros((n, system.n_slots), dtype=np.complex128)
    for vtx in system.tree.internal:
        vtx = int(vtx)
        drive = np.zeros(n, dtype=np.complex128)
        for a_slot, w in system.couplings[vtx]:
            drive += w * values[:, a_slot]
        if system.couplings[vtx]:
            integral = cumulative_trapezoid(drive, dx=float(dt), initial=0.0)
        else:
            integral = 0.0
        decay = system.eta_by_vertex[vtx]
        block = None
        for j in range(system.tree.n_children(vtx) - 1):
            s = system.basis.slot_index[(vtx, j)]
            z0 = v0vec[s]
            if z0 == 0:
                continue
            if block is None:
                block = np.exp(-decay * grid - integral)
            values[:, s] = z0 * block
            if np.abs(values[:, s]).max() > BLOWUP_LIMIT:
                raise SolverAbort(
                    f"coefficient magnitude exceeded {BLOWUP_LIMIT:.0e} "
                    f"at slot {system.basis.labels[s]!r}"
                )
    return Trajectory(
        grid=grid,
        slots=system.slots,
        labels=system.labels,
        depths=_slot_depths(system),
        values=values,
        metadata={"solver": "recurrent", "dt": float(dt), "t_end": float(t_end)},
    )


def _rk4_step(rhs: Callable, y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + (h / 2) * k1)
    k3 = rhs(y + (h / 2) * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)


def _integrate(
    rhs: Callable, y0: np.ndarray, grid: np.ndarray, dt: float
) -> tuple[np.ndarray, float]:
    """Classical one-step 4th-order march with a step-halving error gauge.

    Each step is also retaken as two half steps; the scaled discrepancy is
    a per-step error estimate.  The full-step result is kept, the largest
    estimate is returned, and a step whose estimate exceeds the tolerance
    aborts the run.
    """
    values = np.empty((len(grid), len(y0)), dtype=np.complex128)
    values[0] = y0
    y = y0.copy()
    max_est = 0.0
    for k in range(len(grid) - 1):
        y_full = _rk4_step(rhs, y, dt)
        y_half = _rk4_step(rhs, _rk4_step(rhs, y, dt / 2), dt / 2)
        if not (np.all(np.isfinite(y_full)) and np.all(np.isfinite(y_half))):
            raise SolverAbort(
                f"solution became non-finite near t={grid[k]:g}; reduce dt"
            )
        est = float(np.abs(y_full - y_half).max()) / 15.0
        max_est = max(max_est, est)
        if est > STEP_ERROR_TOL:
            raise SolverAbort(
                f"step error estimate {est:.3e} exceeds {STEP_ERROR_TOL:g} "
                f"at t={grid[k]:g}; dt={dt:g} is too large"
            )
        y = y_full
        if np.abs(y).max() > BLOWUP_LIMIT:
            raise SolverAbort(
                f"solution magnitude exceeded {BLOWUP_LIMIT:.0e} "
                f"near t={grid[k + 1]:g}"
            )
        values[k + 1] = y
    return values, max_est


def solve_rk(
    system: CascadeSystem,
    v0: WaveletField,
    t_end: float,
    dt: float,
) -> Trajectory:
    """Integrate the coefficient system with a fixed-step 4th-order method.

    Generic cross-check path for ``solve_recurrent``: no use is made of
    the triangular structure beyond assembling the right-hand side
    dv/dt = -v (eta + couplings @ v).
    """
    grid = time_grid(t_end, dt)
    v0vec = _check_initial(system, v0)
    eta = system.slot_eta()
    W = system.coupling_matrix()

    def rhs(y: np.ndarray) -> np.ndarray:
        return -y * (eta + W @ y)

    values, max_est = _integrate(rhs, v0vec, grid, float(dt))
    return Trajectory(
        grid=grid,
        slots=system.slots,
        labels=system.labels,
        depths=_slot_depths(system),
        values=values,
        metadata={
            "solver": "rk",
            "dt": float(dt),
            "t_end": float(t_end),
            "max_step_error": max_est,
        },
    )


def leaf_rhs(
    tree: BallTree,
    interaction: Kernel,
    dissipation: Kernel,
    f: LeafField,
    max_leaves: int = DEFAULT_LEAF_CAP,
) -> LeafField:
    """Time derivative of the field equation, evaluated exactly on leaves.

    Returns minus the quadratic interaction integral (with the field in
    both arguments) minus the dissipative operator applied to the field,
    both as literal leaf-cell sums.  Constant fields give an exact zero.
    """
    quad = interaction_integral_direct(interaction, f, f, max_leaves)
    lin = apply_pdo_direct(dissipation, f)
    return LeafField(tree, -quad.values - lin.values)


def solve_leaf(
    tree: BallTree,
    interaction: Kernel,
    dissipation: Kernel,
    f0: LeafField,
    t_end: float,
    dt: float,
    max_leaves: int = DEFAULT_LEAF_CAP,
) -> LeafTrajectory:
    """Integrate the field equation directly on leaf values.

    This is the equation-level oracle: it never touches wavelets or the
    coefficient system.  The initial field must be mean-zero; the
    dynamics are only defined on that subspace, and the mean is conserved
    along solutions.
    """
    if f0.tree is not tree and f0.tree != tree:
        raise ValueError("initial field lives on a different tree")
    if not f0.is_mean_zero():
        raise ValueError(
            f"initial leaf field has mean {f0.mean():.3e}; "
            "the cascade dynamics are defined on mean-zero fields only"
        )
    grid = time_grid(t_end, dt)

    def rhs(y: np.ndarray) -> np.ndarray:
        if not np.all(np.isfinite(y)):
            raise SolverAbort("leaf values became non-finite; reduce dt")
        return leaf_rhs(
            tree, interaction, dissipation, LeafField(tree, y), max_leaves
        ).values

    values, max_est = _integrate(rhs, f0.values.copy(), grid, float(dt))
    return LeafTrajectory(
        grid=grid,
        tree=tree,
        values=values,
        metadata={
            "solver": "leaf",
            "dt": float(dt),
            "t_end": float(t_end),
            "max_step_error": max_est,
        },
    )


def analyze_trajectory(
    leaf_traj: LeafTrajectory, basis: WaveletBasis
) -> Trajectory:
    """Project every snapshot of a leaf trajectory onto the wavelet basis."""
    tree = basis.tree
    if leaf_traj.tree is not tree and leaf_traj.tree != tree:
        raise ValueError("trajectory and basis belong to different trees")
    nu = tree.measure[tree.leaves]
    coeffs = (leaf_traj.values * nu) @ basis.matrix.conj().T
    depths = np.array([tree.depth[v] for v, _ in basis.slots])
    return Trajectory(
        grid=leaf_traj.grid,
        slots=basis.slots,
        labels=basis.labels,
        depths=depths,
        values=coeffs,
        metadata=dict(leaf_traj.metadata),
    )


def solve_all(
    system: CascadeSystem,
    v0: WaveletField,
    t_end: float,
    dt: float,
    max_leaves: int = DEFAULT_LEAF_CAP,
) -> tuple[dict[str, Trajectory], dict[str, float]]:
    """Run all three solvers on one problem and measure their spread.

    Returns the coefficient trajectories keyed by solver name (the leaf
    run is projected onto the basis) and the pairwise sup-norm
    disagreements, including their maximum under key ``"max"``.
    """
    recurrent = solve_recurrent(system, v0, t_end, dt)
    rk = solve_rk(system, v0, t_end, dt)
    f0 = synthesize(v0)
    leaf = solve_leaf(
        system.tree, system.interaction, system.dissipation,
        f0, t_end, dt, max_leaves,
    )
    leaf_co = analyze_trajectory(leaf, system.basis)
    trajectories = {"recurrent": recurrent, "rk": rk, "leaf": leaf_co}
    disagreement = {
        "recurrent_vs_rk": recurrent.sup_distance(rk),
        "recurrent_vs_leaf": recurrent.sup_distance(leaf_co),
        "rk_vs_leaf": rk.sup_distance(leaf_co),
    }
    disagreement["max"] = max(disagreement.values())
    return trajectories, disagreement


def energy_by_level(traj: Trajectory) -> np.ndarray:
    """Aggregate |coefficient|^2 by tree depth over the whole grid.

    Returns an array of (time, depth, energy) rows, time-major with depth
    ascending, covering every depth that carries at least one slot.
    """
    depths = np.asarray(traj.depths)
    levels = np.unique(depths)
    power = np.abs(traj.values) ** 2
    energy = np.stack([power[:, depths == d].sum(axis=1) for d in levels], axis=1)
    rows = np.empty((len(traj.grid) * len(levels), 3), dtype=np.float64)
    idx = 0
    for i, t in enumerate(traj.grid):
        for k, d in enumerate(levels):
            rows[idx] = (t, float(d), energy[i, k])
            idx += 1
    return rows
