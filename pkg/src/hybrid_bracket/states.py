"""Hybrid states, expectation values and branch decomposition.

The classical part of a state is a weighted ensemble of phase-space points
on which x and k act by multiplication; the quantum part is a normalized
vector. Evolved observables are decomposed into eigen-branches of their
operator part at one classical point at a time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np

from .algebra import DimensionMismatch, HybridObservable, evaluate_at

NORM_TOL = 1e-12
EIGEN_TOL = 1e-10
HERMITIAN_TOL = 1e-10
_ZERO_PROB = 1e-14


class QuantumState:
    """Normalized state vector. Construct with ``normalize=True`` to rescale."""

    __slots__ = ("amplitudes",)

    def __init__(self, amplitudes, normalize: bool = False):
        vec = np.array(amplitudes, dtype=complex).reshape(-1)
        if vec.size == 0 or not np.all(np.isfinite(vec)):
            raise ValueError("state amplitudes must be finite and non-empty")
        nrm = np.linalg.norm(vec)
        if normalize:
            if nrm == 0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / nrm
        elif abs(nrm - 1) > NORM_TOL:
            raise ValueError(f"state norm is {nrm}, expected 1")
        vec.setflags(write=False)
        self.amplitudes = vec

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def overlap(self, other: "QuantumState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def to_list(self) -> list[list[float]]:
        return [[float(z.real), float(z.imag)] for z in self.amplitudes]

    def __repr__(self):
        return f"QuantumState({np.round(self.amplitudes, 6).tolist()})"


def spin_state(name: str) -> QuantumState:
    """Spin-1/2 states ``up``, ``down``, ``+x``, ``-x``, ``+y``, ``-y``."""
    s = 2**-0.5
    table = {
        "up": [1, 0],
        "down": [0, 1],
        "+x": [s, s],
        "-x": [s, -s],
        "+y": [s, 1j * s],
        "-y": [s, -1j * s],
    }
    if name not in table:
        raise ValueError(f"unknown spin state {name!r}")
    return QuantumState(table[name], normalize=True)


@dataclass(frozen=True)
class ClassicalEnsemble:
    points: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        pts = tuple((float(x), float(k), float(w)) for x, k, w in self.points)
        if not pts:
            raise ValueError("ensemble needs at least one point")
        if any(w < 0 for _, _, w in pts):
            raise ValueError("ensemble weights must be non-negative")
        total = sum(w for _, _, w in pts)
        if abs(total - 1) > NORM_TOL:
            raise ValueError(f"ensemble weights sum to {total}, expected 1")
        object.__setattr__(self, "points", pts)

    @classmethod
    def point(cls, x: float, k: float = 0.0) -> "ClassicalEnsemble":
        return cls(((x, k, 1.0),))


@dataclass(frozen=True)
class HybridState:
    """Product of a quantum state and a classical ensemble."""

    quantum: QuantumState
    classical: ClassicalEnsemble


def expectation(A: HybridObservable, s: HybridState) -> complex:
    """Ensemble average of ``<psi| A(x', k') |psi>``."""
    psi = s.quantum.amplitudes
    if A.dim != psi.size:
        raise DimensionMismatch(f"observable dim {A.dim}, state dim {psi.size}")
    total = 0j
    for x, k, w in s.classical.points:
        if w == 0:
            continue
        total += w * np.vdot(psi, evaluate_at(A, (x, k)) @ psi)
    return complex(total)


@dataclass(frozen=True)
class Branch:
    value: float
    prob: float
    state: QuantumState


@dataclass(frozen=True)
class BranchSet:
    branches: tuple[Branch, ...]
    resolution: float = 0.0

    @property
    def values(self) -> list[float]:
        return [b.value for b in self.branches]

    @property
    def probabilities(self) -> list[float]:
        return [b.prob for b in self.branches]

    def to_dict(self) -> dict:
        return {
            "epsilon": self.resolution,
            "branches": [
                {"value": b.value, "prob": b.prob, "state": b.state.to_list()}
                for b in self.branches
            ],
        }


def _as_quantum(s: Union[HybridState, QuantumState]) -> QuantumState:
    return s.quantum if isinstance(s, HybridState) else s


def branch_decompose(
    A_t: HybridObservable,
    s: Union[HybridState, QuantumState],
    at_point: Sequence[float],
) -> BranchSet:
    """Split the quantum state over the eigenspaces of ``A_t(x', k')``.

    Eigenvalues closer than ``EIGEN_TOL`` are treated as one eigenspace.
    Branches with vanishing probability are dropped.
    """
    psi = _as_quantum(s).amplitudes
    if A_t.dim != psi.size:
        raise DimensionMismatch(f"observable dim {A_t.dim}, state dim {psi.size}")
    M = evaluate_at(A_t, at_point)
    if np.linalg.norm(M - M.conj().T) > HERMITIAN_TOL * max(1.0, np.linalg.norm(M)):
        raise ValueError("evaluated observable is not hermitian")
    evals, evecs = np.linalg.eigh((M + M.conj().T) / 2)

    groups: list[list[int]] = []
    for i, lam in enumerate(evals):  # eigh returns ascending eigenvalues
        if groups and lam - evals[groups[-1][-1]] <= EIGEN_TOL:
            groups[-1].append(i)
        else:
            groups.append([i])

    branches = []
    for idx in groups:
        V = evecs[:, idx]
        proj = V @ (V.conj().T @ psi)
        prob = float(np.vdot(proj, proj).real)
        if prob <= _ZERO_PROB:
            continue
        value = float(np.mean(evals[idx]))
        branches.append(Branch(value, prob, QuantumState(proj, normalize=True)))
    return BranchSet(tuple(branches), 0.0)


def bin_branches(b: BranchSet, epsilon: float) -> BranchSet:
    """Merge branches closer than the experimental resolution ``epsilon``.

    Clustering is single-linkage on the sorted values. A merged bin sits at
    the probability-weighted mean, carries the summed probability and the
    normalized sum of the member projections.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    ordered = sorted(b.branches, key=lambda br: br.value)
    clusters: list[list[Branch]] = []
    for br in ordered:
        if clusters and br.value - clusters[-1][-1].value <= epsilon:
            clusters[-1].append(br)
        else:
            clusters.append([br])
    merged = []
    for cl in clusters:
        if len(cl) == 1:
            merged.append(cl[0])
            continue
        prob = sum(br.prob for br in cl)
        value = sum(br.prob * br.value for br in cl) / prob
        vec = sum(np.sqrt(br.prob) * br.state.amplitudes for br in cl)
        merged.append(Branch(value, prob, QuantumState(vec, normalize=True)))
    return BranchSet(tuple(merged), float(epsilon))
