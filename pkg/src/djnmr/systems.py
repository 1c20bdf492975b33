"""Spin systems, basis labeling, product operators, and transition tables.

Conventions used throughout the package:

* Basis states are labeled by bit strings, one bit per spin, with spin 0
  leftmost.  Bit 0 is the m = +1/2 state, so ``label_to_index`` is the
  standard binary interpretation with spin 0 most significant.
* The static Hamiltonian is the weak-coupling (secular) Ising form

      H = 2*pi * ( sum_i nu_i * Iz_i + sum_{i<j} Delta_ij * Iz_i * Iz_j )

  in rad/s, diagonal in the computational basis.  Flip-flop terms are
  dropped; every shift difference in the shipped systems is much larger
  than the couplings, so the secular form reproduces the resolved
  multiplets exactly.
* A transition of spin s connects two levels differing only in bit s.
  Its frequency is nu_s + sum_{j != s} (+-1) * Delta_sj / 2, where a
  spectator bit of 0 contributes the + sign.  The sign choice is an
  arbitrary fixed convention; only its consistency with pulse synthesis
  and detection matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpinSystem",
    "Transition",
    "label_to_index",
    "index_to_label",
    "single_spin_operator",
    "build_hamiltonian",
    "transition_table",
    "all_transitions",
    "minimum_line_gap",
]

_HALF_SIGMA = {
    "x": np.array([[0.0, 0.5], [0.5, 0.0]], dtype=complex),
    "y": np.array([[0.0, -0.5j], [0.5j, 0.0]], dtype=complex),
    "z": np.array([[0.5, 0.0], [0.0, -0.5]], dtype=complex),
}


class SpinSystem:
    """A system of 2 to 6 coupled spin-1/2 nuclei.

    Parameters
    ----------
    shifts:
        Chemical shift nu_i of each spin in Hz.
    couplings:
        Symmetric n x n table of Delta_ij in Hz with zero diagonal.
        An upper-triangular flat list (row-major, length n*(n-1)/2) is
        also accepted.
    labels:
        Per-spin names; defaults to A, B, C, ...
    work_spin:
        Index of the work qubit.  The remaining spins are data qubits in
        label order.
    """

    def __init__(self, shifts, couplings, labels=None, work_spin=0):
        self.shifts = np.asarray(shifts, dtype=float)
        if self.shifts.ndim != 1:
            raise ValueError("shifts must be a flat sequence")
        n = self.shifts.size
        if not 2 <= n <= 6:
            raise ValueError(f"spin count must be between 2 and 6, got {n}")
        self.n = n
        self.dim = 1 << n
        self.couplings = _coupling_matrix(couplings, n)
        if labels is None:
            labels = tuple("ABCDEF"[:n])
        labels = tuple(str(s) for s in labels)
        if len(labels) != n or len(set(labels)) != n:
            raise ValueError("labels must be distinct and match the spin count")
        self.labels = labels
        work_spin = int(work_spin)
        if not 0 <= work_spin < n:
            raise ValueError(f"work_spin {work_spin} out of range for {n} spins")
        self.work_spin = work_spin
        # Diagonal of H in rad/s, precomputed once; everything downstream
        # (propagators, detection, transition oracles) reads it.
        self.energies = np.diag(build_hamiltonian(self)).real.copy()

    @property
    def data_spins(self) -> tuple[int, ...]:
        return tuple(i for i in range(self.n) if i != self.work_spin)

    @property
    def max_frequency(self) -> float:
        """Largest |energy|/2pi in Hz; bounds every internal oscillation."""
        return float(np.abs(self.energies).max() / (2.0 * np.pi))

    def __repr__(self):
        return (f"SpinSystem(n={self.n}, labels={'/'.join(self.labels)}, "
                f"work={self.labels[self.work_spin]})")


def _coupling_matrix(couplings, n: int) -> np.ndarray:
    """Accept a full symmetric matrix or an upper-triangular flat list."""
    arr = np.asarray(couplings, dtype=float)
    if arr.ndim == 1:
        expect = n * (n - 1) // 2
        if arr.size != expect:
            raise ValueError(
                f"upper-triangular coupling list must have length {expect}, got {arr.size}")
        mat = np.zeros((n, n))
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                mat[i, j] = mat[j, i] = arr[k]
                k += 1
        return mat
    if arr.shape != (n, n):
        raise ValueError(f"coupling matrix must be {n}x{n}, got {arr.shape}")
    if not np.array_equal(arr, arr.T):
        raise ValueError("coupling table must be symmetric: Delta[i,j] == Delta[j,i]")
    if np.any(np.diag(arr) != 0.0):
        raise ValueError("coupling table must have zero diagonal")
    return arr.copy()


def label_to_index(label: str) -> int:
    """Basis index of a bit-string label; spin 0 is the most significant bit."""
    if not label or any(c not in "01" for c in label):
        raise ValueError(f"label must be a nonempty string of 0/1, got {label!r}")
    return int(label, 2)


def index_to_label(index: int, n: int) -> str:
    if not 0 <= index < (1 << n):
        raise ValueError(f"index {index} out of range for {n} spins")
    return format(index, f"0{n}b")


def single_spin_operator(sys: SpinSystem, i: int, axis: str) -> np.ndarray:
    """I_axis of spin i embedded in the full 2^n space (tensor with identities)."""
    if not 0 <= i < sys.n:
        raise ValueError(f"spin index {i} out of range for {sys.n} spins")
    if axis not in _HALF_SIGMA:
        raise ValueError(f"axis must be one of x, y, z, got {axis!r}")
    op = np.eye(1, dtype=complex)
    for k in range(sys.n):
        op = np.kron(op, _HALF_SIGMA[axis] if k == i else np.eye(2, dtype=complex))
    return op


def collective_operator(sys: SpinSystem, axis: str) -> np.ndarray:
    """Sum of I_axis over every spin (the RF and detection operators)."""
    total = np.zeros((sys.dim, sys.dim), dtype=complex)
    for i in range(sys.n):
        total += single_spin_operator(sys, i, axis)
    return total


def build_hamiltonian(sys: SpinSystem) -> np.ndarray:
    """Static Hamiltonian in rad/s; diagonal in the computational basis."""
    n = sys.n
    diag = np.zeros(sys.dim)
    for idx in range(sys.dim):
        bits = [(idx >> (n - 1 - k)) & 1 for k in range(n)]
        mz = [0.5 if b == 0 else -0.5 for b in bits]
        e = sum(sys.shifts[i] * mz[i] for i in range(n))
        e += sum(sys.couplings[i, j] * mz[i] * mz[j]
                 for i in range(n) for j in range(i + 1, n))
        diag[idx] = 2.0 * np.pi * e
    return np.diag(diag).astype(complex)


@dataclass(frozen=True)
class Transition:
    """One resolved line of a spin: a level pair differing only in that spin's bit.

    ``level_pair`` holds (bit-0 label, bit-1 label).  ``data_pattern`` is the
    spectator bit string in spin order with the flipping spin removed; for the
    work spin it is exactly the input word of the Boolean function.
    """

    spin: int
    freq: float
    level_pair: tuple[str, str]
    data_pattern: str

    @property
    def indices(self) -> tuple[int, int]:
        """(bit-0 level index, bit-1 level index)."""
        return label_to_index(self.level_pair[0]), label_to_index(self.level_pair[1])


def transition_table(sys: SpinSystem, spin: int) -> list[Transition]:
    """All 2^(n-1) transitions of one spin, sorted by frequency."""
    if not 0 <= spin < sys.n:
        raise ValueError(f"spin index {spin} out of range for {sys.n} spins")
    out = []
    spectators = [j for j in range(sys.n) if j != spin]
    for word in range(1 << (sys.n - 1)):
        pattern = format(word, f"0{sys.n - 1}b")
        freq = sys.shifts[spin]
        bits = {}
        for pos, j in enumerate(spectators):
            b = int(pattern[pos])
            bits[j] = b
            freq += (0.5 if b == 0 else -0.5) * sys.couplings[spin, j]
        lo = "".join("0" if k == spin else str(bits[k]) for k in range(sys.n))
        hi = "".join("1" if k == spin else str(bits[k]) for k in range(sys.n))
        out.append(Transition(spin=spin, freq=float(freq),
                              level_pair=(lo, hi), data_pattern=pattern))
    out.sort(key=lambda t: t.freq)
    return out


def all_transitions(sys: SpinSystem) -> list[Transition]:
    """Every spin's transition table concatenated (n * 2^(n-1) lines)."""
    out = []
    for spin in range(sys.n):
        out.extend(transition_table(sys, spin))
    return out


def minimum_line_gap(sys: SpinSystem) -> float:
    """Smallest positive spacing between any two line frequencies."""
    freqs = sorted(t.freq for t in all_transitions(sys))
    gaps = [b - a for a, b in zip(freqs, freqs[1:]) if b > a]
    return min(gaps) if gaps else 0.0
