"""Partitions of the rescaled depth interval [0, 1] into P1 elements.

Index conventions (tested in tests/test_mesh.py):

* nodes are 0-based: ``nodes[0] = 0`` and ``nodes[n-1] = 1``;
* element ``e`` spans ``[nodes[e], nodes[e+1]]`` with length
  ``element_lengths[e]``, e = 0 .. n-2;
* matrix row ``k`` (0-based, k = 0 .. n-2) corresponds to the hat function
  centred at node ``k+1``, i.e. the interior nodes plus the bottom node.
  The surface node carries the Dirichlet datum and has no row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

__all__ = ["Mesh", "build_uniform", "build_graded", "read_mesh_csv"]

_UNIFORM_TOL = 1e-14


@dataclass(frozen=True)
class Mesh:
    nodes: np.ndarray
    element_lengths: np.ndarray
    uniform: bool

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "element_lengths", np.asarray(self.element_lengths, dtype=float))
        if len(nodes) < 3:
            raise ValidationError(f"mesh needs at least 3 nodes, got {len(nodes)}")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ValidationError("mesh nodes must start at 0 and end at 1")
        if np.any(self.element_lengths <= 0.0):
            raise ValidationError("mesh nodes must be strictly increasing")
        if abs(self.element_lengths.sum() - 1.0) > 1e-12:
            raise ValidationError("element lengths must sum to 1")

    @property
    def n(self) -> int:
        """Number of nodes."""
        return len(self.nodes)

    @property
    def h_min(self) -> float:
        return float(self.element_lengths.min())

    @property
    def h(self) -> float:
        """Common element length; only meaningful for uniform meshes."""
        return float(self.element_lengths[0])


def build_uniform(n: int) -> Mesh:
    """Uniform mesh with ``n`` nodes and spacing ``1/(n-1)``."""
    if n < 3:
        raise ValidationError(f"mesh needs at least 3 nodes, got {n}")
    nodes = np.linspace(0.0, 1.0, n)
    return Mesh(nodes, np.diff(nodes), uniform=True)


def build_graded(nodes) -> Mesh:
    """Mesh from an explicit, strictly increasing node sequence on [0, 1]."""
    nodes = np.asarray(nodes, dtype=float)
    h = np.diff(nodes)
    if len(nodes) >= 3 and np.all(h > 0.0):
        uniform = bool(np.max(np.abs(h - h[0])) <= _UNIFORM_TOL)
    else:
        uniform = False
    return Mesh(nodes, h, uniform=uniform)


def read_mesh_csv(path) -> Mesh:
    """Read a mesh from a one-column CSV of node coordinates."""
    nodes = np.loadtxt(path, delimiter=",", ndmin=1)
    return build_graded(nodes)
