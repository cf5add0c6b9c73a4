"""Taylor-series solution of the coupled Hamilton-Heisenberg equations.

Time derivatives at t=0 are iterated ABT brackets with the Hamiltonian
expressed in the initial variables, so the n-th Taylor coefficient of A(t)
is ``[[...[[A, H], H]..., H]]`` (n brackets).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

from .algebra import HybridObservable, abt_bracket, generators

__all__ = [
    "TaylorSolution",
    "Trajectory",
    "CanonicalReport",
    "taylor_evolve",
    "evaluate_trajectory",
    "canonical_scan",
    "CANONICAL_PAIRS",
]


@dataclass(frozen=True)
class TaylorSolution:
    """Taylor coefficients of an evolved observable.

    ``A(t) = sum_n t**n / n! * coefficients[n]`` for ``n <= order``.
    """

    initial: HybridObservable
    coefficients: tuple[HybridObservable, ...]
    order: int
    terminated_early: bool = False

    def __post_init__(self):
        if len(self.coefficients) != self.order + 1:
            raise ValueError("need exactly order + 1 coefficients")

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "terminated_early": self.terminated_early,
            "coefficients": [c.to_dict() for c in self.coefficients],
        }

    @classmethod
    def from_dict(cls, data) -> "TaylorSolution":
        coeffs = tuple(HybridObservable.from_dict(c) for c in data["coefficients"])
        return cls(coeffs[0], coeffs, int(data["order"]), bool(data["terminated_early"]))


def _check(A: HybridObservable, H: HybridObservable) -> None:
    if A.dim != H.dim:
        raise ValueError(f"dimension mismatch: observable dim {A.dim}, Hamiltonian dim {H.dim}")


def taylor_evolve(
    A: Union[HybridObservable, Sequence[HybridObservable]],
    H: HybridObservable,
    order: int,
) -> TaylorSolution:
    """Expand A(t) to ``order`` under the time-independent Hamiltonian H.

    ``A`` may also be a sequence ``[A0, A1, ...]`` describing an explicit
    polynomial time dependence ``A0 + t A1 + t**2 A2 + ...``; the explicit
    derivative is then added to the bracket at each step.

    The expansion stops as soon as a derivative vanishes after pruning; the
    remaining coefficients are filled with zeros.
    """
    if order < 0 or int(order) != order:
        raise ValueError(f"order must be a non-negative integer, got {order!r}")
    parts = [A] if isinstance(A, HybridObservable) else list(A)
    if not parts:
        raise ValueError("empty observable sequence")
    for p in parts:
        _check(p, H)
    zero = HybridObservable.zero(H.dim, H.hbar)

    coeffs = [parts[0]]
    terminated = False
    for _ in range(order):
        if terminated:
            coeffs.append(zero)
            continue
        # L = [[., H]] + d/dt acting on the polynomial in explicit time
        nxt = []
        for j, p in enumerate(parts):
            term = abt_bracket(p, H)
            if j + 1 < len(parts):
                term = term + parts[j + 1] * (j + 1)
            nxt.append(term)
        parts = nxt
        while len(parts) > 1 and parts[-1].is_zero():
            parts.pop()
        coeffs.append(parts[0])
        if all(p.is_zero() for p in parts):
            terminated = True
    return TaylorSolution(coeffs[0], tuple(coeffs), int(order), terminated)


class Trajectory(NamedTuple):
    value: HybridObservable
    remainder_bound: float


def evaluate_trajectory(sol: TaylorSolution, t: float) -> Trajectory:
    """Sum the series at time ``t``.

    The bound ``|c_N| |t|**N / N!`` uses the last retained coefficient; it is a
    heuristic size for the truncation error, not a rigorous bound.
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError("t must be finite")
    total = HybridObservable.zero(sol.initial.dim, sol.initial.hbar)
    for n, c in enumerate(sol.coefficients):
        if not c.is_zero():
            total = total + c * (t**n / math.factorial(n))
    if sol.terminated_early:
        bound = 0.0
    else:
        n = sol.order
        bound = sol.coefficients[n].norm() * abs(t) ** n / math.factorial(n)
    return Trajectory(total, bound)


# ---------------------------------------------------------------------------
# canonical relations along the flow

CANONICAL_PAIRS = (("x", "k"), ("q", "p"), ("x", "p"), ("q", "k"), ("x", "q"), ("k", "p"))


@dataclass(frozen=True)
class CanonicalReport:
    """Per-order deviation of fundamental brackets from their t=0 values.

    ``residuals[pair][n]`` is the norm of the t**n coefficient of
    ``[[u(t), v(t)]] - [[u, v]]``. For exact canonical pairs the t=0 value is
    1 or 0; for the truncated boson pair it carries the top-level defect,
    which is reported separately in ``initial_defect``.
    """

    hamiltonian: HybridObservable
    order: int
    residuals: dict[str, list[float]]
    initial_defect: dict[str, float] = field(default_factory=dict)

    def max_residual(self) -> float:
        return max(max(v) for v in self.residuals.values())

    def to_dict(self) -> dict:
        return {
            "order": self.order,
            "hamiltonian": self.hamiltonian.to_dict(),
            "residuals": [
                {
                    "pair": name,
                    "per_order": list(vals),
                    "initial_defect": self.initial_defect.get(name, 0.0),
                }
                for name, vals in self.residuals.items()
            ],
        }


def fundamental_variables(dim: int, hbar: float = 1.0) -> dict[str, HybridObservable]:
    """x, k and the truncated boson pair q, p on a ``dim``-level space."""
    return {
        "x": generators("x", dim, hbar),
        "k": generators("k", dim, hbar),
        "q": generators("boson_q", dim, hbar),
        "p": generators("boson_p", dim, hbar),
    }


def bracket_series(u: TaylorSolution, v: TaylorSolution, order: int) -> list[HybridObservable]:
    """t**n coefficients of ``[[u(t), v(t)]]`` up to ``order`` (Cauchy product)."""
    out = []
    for n in range(order + 1):
        total = HybridObservable.zero(u.initial.dim, u.initial.hbar)
        for i in range(n + 1):
            a, b = u.coefficients[i], v.coefficients[n - i]
            if a.is_zero() or b.is_zero():
                continue
            w = 1.0 / (math.factorial(i) * math.factorial(n - i))
            total = total + abt_bracket(a, b) * w
        out.append(total)
    return out


def canonical_scan(H: HybridObservable, order: int) -> CanonicalReport:
    """Measure how well the flow of H preserves the fundamental brackets."""
    if order < 1 or int(order) != order:
        raise ValueError(f"order must be an integer >= 1, got {order!r}")
    if H.dim < 2:
        raise ValueError("canonical_scan needs dim >= 2 for the quantum pair")
    vars0 = fundamental_variables(H.dim, H.hbar)
    sols = {name: taylor_evolve(v, H, order) for name, v in vars0.items()}
    residuals: dict[str, list[float]] = {}
    defects: dict[str, float] = {}
    ideal = {("x", "k"): 1.0, ("q", "p"): 1.0}
    for u, v in CANONICAL_PAIRS:
        name = f"{u},{v}"
        series = bracket_series(sols[u], sols[v], order)
        initial = series[0]
        target = HybridObservable.scalar(ideal.get((u, v), 0.0), H.dim, H.hbar)
        defects[name] = (initial - target).norm()
        residuals[name] = [0.0] + [c.norm() for c in series[1:]]
    return CanonicalReport(H, int(order), residuals, defects)
