"""Spectral data of the cascade: eigenvalues, interaction coefficients,
and the exact quadrature routines that validate both.

A kernel assigns a complex value to every ball of the tree.  Two derived
quantities drive the dynamics:

* the wavelet eigenvalue of the integral operator built from a kernel
  (``eigenvalue``), and
* the coefficient coupling a wavelet to one on a strictly smaller ball
  (``interaction_coefficient``).

Both have closed forms as finite sums over the ancestor chain.  The module
also ships two direct evaluators, ``apply_pdo_direct`` and
``interaction_integral_direct``, which compute the underlying integrals as
literal sums over leaf cells with no use of the closed forms; tests compare
the two routes everywhere.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .tree import BallTree
from .wavelets import LeafField

__all__ = [
    "Kernel",
    "eigenvalue",
    "interaction_coefficient",
    "interaction_table",
    "apply_pdo_direct",
    "interaction_integral_direct",
    "DEFAULT_LEAF_CAP",
]

# interaction_integral_direct refuses larger trees unless told otherwise
DEFAULT_LEAF_CAP = 100


class Kernel:
    """Complex value per tree vertex; the weight function of an operator.

    The same type serves both roles of the cascade equation: the kernel
    weighting the quadratic interaction and the kernel of the linear
    dissipative operator.
    """

    def __init__(self, tree: BallTree, values: np.ndarray):
        values = np.asarray(values, dtype=np.complex128)
        if values.shape != (tree.n_vertices,):
            raise ValueError(
                f"kernel needs one value per vertex "
                f"({tree.n_vertices}), got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("kernel values must be finite")
        values.setflags(write=False)
        self.tree = tree
        self.values = values

    @classmethod
    def constant(cls, tree: BallTree, value: complex) -> "Kernel":
        return cls(tree, np.full(tree.n_vertices, complex(value)))

    @classmethod
    def power(
        cls,
        tree: BallTree,
        amplitude: complex,
        exponent: float,
        overrides: Iterable[Sequence] | None = None,
    ) -> "Kernel":
        """value(I) = amplitude * diameter(I)**exponent, plus overrides.

        Overrides are (vertex path, real, imag) records replacing the
        parametric value on the named vertices.
        """
        values = complex(amplitude) * tree.diameter ** float(exponent)
        if overrides is not None:
            values = values.copy()
            for path, re, im in overrides:
                values[tree.vertex(str(path))] = complex(float(re), float(im))
        return cls(tree, values)

    @classmethod
    def from_table(cls, tree: BallTree, entries: Iterable[Sequence]) -> "Kernel":
        """Build from (vertex path, real, imag) records covering every vertex."""
        values = np.full(tree.n_vertices, np.nan, dtype=np.complex128)
        for path, re, im in entries:
            values[tree.vertex(str(path))] = complex(float(re), float(im))
        missing = [
            tree.labels[v] for v in range(tree.n_vertices)
            if np.isnan(values[v].real)
        ]
        if missing:
            raise ValueError(
                f"kernel table misses {len(missing)} vertices "
                f"(first: {missing[:3]})"
            )
        return cls(tree, values)

    def value(self, vertex: int) -> complex:
        return complex(self.values[int(vertex)])

    def __repr__(self) -> str:
        return f"Kernel(vertices={self.tree.n_vertices})"


def eigenvalue(kernel: Kernel, I: int) -> complex:
    """Wavelet eigenvalue of the kernel's integral operator at ball I.

    Every wavelet living on the internal ball I is an eigenfunction of the
    operator ``f -> sum_b value(sup(a, b)) (f(a) - f(b)) nu(b)``; the
    eigenvalue is value(I) nu(I) plus, for each strict ancestor J, the
    value at J times the measure of J outside its child toward I.
    """
    tree = kernel.tree
    if tree.is_leaf(I):
        raise ValueError(
            f"eigenvalues are attached to internal balls; "
            f"{tree.labels[int(I)]!r} is a leaf"
        )
    total = kernel.values[I] * tree.measure[I]
    for J in tree.ancestors(I):
        total += kernel.values[J] * (tree.measure[J] - tree.measure_toward(J, I))
    return complex(total)


def interaction_coefficient(kernel: Kernel, outer: int, inner: int) -> complex:
    """Coupling coefficient between balls, nonzero only for strict nesting.

    Returns 0 unless ``inner`` is strictly below ``outer``.  The value is
    accumulated along the ancestor chain from ``inner`` up to ``outer`` as
    ``sum nu(C)^2 (value(parent of C) - value(C))``, which telescopes to
    the closed form ``nu^2(outer, inner) value(outer) - nu^2(inner)
    value(inner) - sum over strictly intermediate L of (nu^2(L) -
    nu^2(L, inner)) value(L)``.  The chain form is used because each term
    carries a difference of kernel values, so constant kernels give an
    exact zero rather than a rounding residue.
    """
    tree = kernel.tree
    outer, inner = int(outer), int(inner)
    if not tree.is_strict_ancestor(outer, inner):
        return 0j
    total = 0j
    cur = inner
    while cur != outer:
        par = int(tree.parent[cur])
        total += tree.measure[cur] ** 2 * (kernel.values[par] - kernel.values[cur])
        cur = par
    return complex(total)


def interaction_table(kernel: Kernel) -> dict[tuple[int, int], complex]:
    """Coupling coefficients for every strict (ancestor, descendant) pair.

    Keys are (outer vertex, inner vertex).  Values accumulate up each
    root path exactly as in ``interaction_coefficient``, so entries agree
    with it bit for bit.
    """
    tree = kernel.tree
    table: dict[tuple[int, int], complex] = {}
    for desc in range(1, tree.n_vertices):
        total = 0j
        cur = desc
        while tree.parent[cur] != -1:
            par = int(tree.parent[cur])
            total += tree.measure[cur] ** 2 * (
                kernel.values[par] - kernel.values[cur]
            )
            table[(par, desc)] = complex(total)
            cur = par
    return table


def apply_pdo_direct(kernel: Kernel, f: LeafField) -> LeafField:
    """Apply the kernel's integral operator to a leaf field, by direct sum.

    Evaluates ``(Tf)(a) = sum_b value(sup(a, b)) (f(a) - f(b)) nu(b)``
    literally over all leaf pairs.  This is the oracle for ``eigenvalue``:
    no spectral shortcut is taken.  Constant fields map to exact zero
    because every summand carries the factor ``f(a) - f(b)``.
    """
    tree = kernel.tree
    if f.tree is not tree and f.tree != tree:
        raise ValueError("kernel and field belong to different trees")
    K = kernel.values[tree.leaf_sup_table()]
    diff = f.values[:, None] - f.values[None, :]
    nu = f.leaf_measures
    return LeafField(tree, np.einsum("ab,ab,b->a", K, diff, nu))


def interaction_integral_direct(
    kernel: Kernel,
    phi: LeafField,
    psi: LeafField,
    max_leaves: int = DEFAULT_LEAF_CAP,
) -> LeafField:
    """Quadratic interaction integral evaluated as a literal leaf-cell sum.

    Returns the leaf field

        result(a) = sum_{b,c} value(sup3(a, b, c)) phi(b)
                    (psi(c) - psi(a)) nu(b) nu(c),

    contracting over b first and c second (the iterated order under which
    the integral makes sense scale by scale).  This is the oracle for
    ``interaction_coefficient``: for wavelets phi on a ball strictly
    containing the ball of psi, the result equals psi * phi * coefficient
    pointwise.

    The cost grows cubically with the leaf count, so trees larger than
    ``max_leaves`` are refused.
    """
    tree = kernel.tree
    for g in (phi, psi):
        if g.tree is not tree and g.tree != tree:
            raise ValueError("kernel and fields belong to different trees")
    if tree.n_leaves > max_leaves:
        raise ValueError(
            f"tree has {tree.n_leaves} leaves, above the cap of {max_leaves} "
            "for direct triple sums; raise max_leaves to force it"
        )
    nu = phi.leaf_measures
    # inner contraction over b: S[a, c] = sum_b value(sup3(a,b,c)) phi(b) nu(b);
    # sup3(a,b,c) = sup(sup(a,c), b), so S factors through the sup tables
    kernel_by_vertex_leaf = kernel.values[tree.vertex_leaf_sup_table()]
    inner = kernel_by_vertex_leaf @ (phi.values * nu)
    S = inner[tree.leaf_sup_table()]
    diff = psi.values[None, :] - psi.values[:, None]
    return LeafField(tree, np.einsum("ac,ac,c->a", S, diff, nu))
