"""Reference dynamics for two particles coupled through H = c p_a p_b.

Particle b is in a superposition of momenta +p_bar and -p_bar. Three
descriptions of particle a's position are compared:

* fully quantum: each momentum branch rigidly translates a's wavepacket;
* mean field: a classical x_a driven by the expectation value of p_b;
* quasiclassical: x_a evolved with the hybrid bracket and split into
  branches against the state of b.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebra import generators
from .dynamics import TaylorSolution, evaluate_trajectory, taylor_evolve
from .states import QuantumState, branch_decompose

_EQUAL = (2**-0.5, 2**-0.5)


@dataclass(frozen=True)
class MomentumCouplingParams:
    c: float = 1.0
    p_bar: float = 1.0
    x0: float = 0.0
    width: float = 1.0
    hbar: float = 1.0
    amplitudes: tuple[complex, complex] = field(default=_EQUAL)

    def __post_init__(self):
        amps = tuple(complex(a) for a in self.amplitudes)
        if len(amps) != 2:
            raise ValueError("need exactly two amplitudes (+p_bar, -p_bar)")
        object.__setattr__(self, "amplitudes", amps)
        norm2 = abs(amps[0]) ** 2 + abs(amps[1]) ** 2
        if abs(norm2 - 1) > 1e-12:
            raise ValueError(f"|amp+|^2 + |amp-|^2 = {norm2}, expected 1")
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")
        for name in ("c", "p_bar", "x0", "width", "hbar"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    @property
    def probabilities(self) -> tuple[float, float]:
        return abs(self.amplitudes[0]) ** 2, abs(self.amplitudes[1]) ** 2

    @property
    def mean_momentum(self) -> float:
        p_plus, p_minus = self.probabilities
        return self.p_bar * (p_plus - p_minus)


@dataclass(frozen=True)
class ConditionalOutcome:
    branch_momentum: float
    probability: float
    conditional_mean_position: float
    time: float


def evolve_full_quantum(params: MomentumCouplingParams, t: float) -> list[ConditionalOutcome]:
    """Conditional position of particle a given each momentum of particle b.

    ``exp(-i c p_a p_b t / hbar)`` is diagonal in both momenta, so on the
    ``p_b`` branch it is a translation of a's wavepacket by ``c p_b t``.
    """
    t = float(t)
    out = []
    for sign, prob in zip((1, -1), params.probabilities):
        pb = sign * params.p_bar
        out.append(ConditionalOutcome(pb, prob, params.x0 + params.c * pb * t, t))
    return out


def mean_field_trajectory(
    params: MomentumCouplingParams,
    t: float,
    project_at: Optional[tuple[float, int]] = None,
) -> float:
    """Position of a classical particle a driven by ``c <p_b>``.

    ``project_at=(t1, branch)`` models an instantaneous momentum measurement
    on particle b at time ``t1`` that leaves it in the ``+p_bar``
    (``branch=+1``) or ``-p_bar`` (``branch=-1``) eigenstate. Before ``t1``
    the unprojected expectation value drives the motion.
    """
    t = float(t)
    v0 = params.c * params.mean_momentum
    if project_at is None:
        return params.x0 + v0 * t
    t1, branch = project_at
    if not (t1 >= 0 and math.isfinite(t1)):
        raise ValueError(f"projection time must be finite and >= 0, got {t1!r}")
    if branch not in (1, -1):
        raise ValueError(f"projection branch must be +1 or -1, got {branch!r}")
    if params.probabilities[0 if branch == 1 else 1] == 0:
        raise ValueError("cannot project onto a branch with zero amplitude")
    if t < t1:
        return params.x0 + v0 * t
    return params.x0 + v0 * t1 + params.c * branch * params.p_bar * (t - t1)


def quasiclassical_position(params: MomentumCouplingParams, order: int = 3) -> TaylorSolution:
    """Evolved x_a(t) Taylor solution for ``H = c p_bar sigma_z k``."""
    H = generators("pauli_z", 2, params.hbar) * generators("k", 2, params.hbar)
    H = H * (params.c * params.p_bar)
    return taylor_evolve(generators("x", 2, params.hbar), H, order)


@dataclass(frozen=True)
class BranchComparison:
    p_b: float
    prob: float
    x_quantum: float
    x_quasiclassical: float
    x_meanfield: float

    @property
    def quasiclassical_error(self) -> float:
        return self.x_quasiclassical - self.x_quantum

    @property
    def meanfield_discrepancy(self) -> float:
        return abs(self.x_meanfield - self.x_quasiclassical)


@dataclass(frozen=True)
class MomentumComparison:
    t: float
    branches: tuple[BranchComparison, ...]

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "branches": [
                {
                    "p_b": b.p_b,
                    "prob": b.prob,
                    "x_quantum": b.x_quantum,
                    "x_quasiclassical": b.x_quasiclassical,
                    "x_meanfield": b.x_meanfield,
                }
                for b in self.branches
            ],
        }


def compare_with_quasiclassical(params: MomentumCouplingParams, t: float) -> MomentumComparison:
    """Put the three descriptions of particle a side by side at time ``t``.

    In the quasiclassical model particle b is a two-level system with
    ``p_b -> p_bar sigma_z`` and particle a sits at ``(x0, 0)``. The position
    on the ``+-p_bar`` branch is read off the eigenspace of ``x_a(t)`` that
    contains the corresponding momentum eigenstate.
    """
    t = float(t)
    sol = quasiclassical_position(params)
    x_t = evaluate_trajectory(sol, t).value
    point = (params.x0, 0.0)
    psi = QuantumState(params.amplitudes)
    split = branch_decompose(x_t, psi, point)
    x_mf = mean_field_trajectory(params, t)

    rows = []
    for idx, outcome in enumerate(evolve_full_quantum(params, t)):
        basis = QuantumState(np.eye(2)[idx])
        # position on this momentum eigenstate
        (own,) = branch_decompose(x_t, basis, point).branches
        prob = sum(br.prob * abs(br.state.overlap(basis)) ** 2 for br in split.branches)
        rows.append(
            BranchComparison(
                outcome.branch_momentum, prob, outcome.conditional_mean_position, own.value, x_mf
            )
        )
    return MomentumComparison(t, tuple(rows))
