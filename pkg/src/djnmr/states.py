"""Initial states: thermal deviation, pseudopure projector, and POPS difference.

NMR observables never see the identity component of a density matrix, so
thermal and POPS states are stored as traceless deviation matrices while
pseudopure states keep their unit-trace projector form.  No Boltzmann
prefactors: every spin enters the thermal state with unit weight, which
renders equal-intensity multiplets across both nuclear species.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .systems import SpinSystem, label_to_index, single_spin_operator

__all__ = [
    "DensityState",
    "thermal_state",
    "pseudopure_state",
    "pops_state",
    "count_accessible_pops",
]

_HERMITICITY_TOL = 1e-12


@dataclass
class DensityState:
    """Density matrix plus its construction kind.

    kind is one of thermal / pseudopure / pops / derived; thermal and pops
    carry deviation (traceless) matrices, pseudopure a unit-trace projector.
    """

    matrix: np.ndarray
    kind: str = "derived"
    valid_kinds = ("thermal", "pseudopure", "pops", "derived")

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=complex)
        if self.kind not in self.valid_kinds:
            raise ValueError(f"unknown state kind {self.kind!r}")
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        scale = max(float(np.abs(m).max()), 1.0)
        if np.abs(m - m.conj().T).max() > _HERMITICITY_TOL * scale:
            raise ValueError("density matrix is not Hermitian")
        tr = complex(np.trace(m))
        if self.kind in ("thermal", "pops") and abs(tr) > 1e-9:
            raise ValueError(f"{self.kind} state must be traceless, trace={tr}")
        if self.kind == "pseudopure" and abs(tr - 1.0) > 1e-9:
            raise ValueError(f"pseudopure state must have unit trace, trace={tr}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def thermal_state(sys: SpinSystem) -> DensityState:
    """Deviation part of the equilibrium state: sum of Iz over all spins."""
    m = np.zeros((sys.dim, sys.dim), dtype=complex)
    for i in range(sys.n):
        m += single_spin_operator(sys, i, "z")
    return DensityState(m, kind="thermal")


def pseudopure_state(sys: SpinSystem, label: str) -> DensityState:
    """Rank-1 projector onto one computational basis state."""
    if len(label) != sys.n:
        raise ValueError(f"label length {len(label)} != spin count {sys.n}")
    idx = label_to_index(label)
    m = np.zeros((sys.dim, sys.dim), dtype=complex)
    m[idx, idx] = 1.0
    return DensityState(m, kind="pseudopure")


def pops_state(sys: SpinSystem, a: str, b: str) -> DensityState:
    """Pair-of-pseudopure-states difference |a><a| - |b><b|."""
    if a == b:
        raise ValueError("POPS labels must differ (equal labels give the zero state)")
    m = pseudopure_state(sys, a).matrix - pseudopure_state(sys, b).matrix
    return DensityState(m, kind="pops")


def count_accessible_pops(n: int) -> dict[str, int]:
    """Pseudopure/pair/POPS counts for n spins.

    A POPS is preparable by inverting a single resolved line exactly when its
    two labels differ in one spin's bit, giving n * 2^(n-1) accessible pairs
    out of C(2^n, 2) total.
    """
    if n < 1:
        raise ValueError("spin count must be at least 1")
    states = 1 << n
    return {
        "pseudopure_states": states,
        "pairs": math.comb(states, 2),
        "accessible_pops": n * (1 << (n - 1)),
    }
