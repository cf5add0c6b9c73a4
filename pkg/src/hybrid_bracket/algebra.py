"""Mixed quasiclassical-quantum observables and their brackets.

An observable is a polynomial in the commuting classical variables ``x`` and
``k`` whose coefficients are dense complex matrices acting on a finite
Hilbert space::

    A = sum_{a,b} U_ab x**a k**b

Products keep the matrix order of the factors and add exponents, so every
expression is reduced to this form in the initial variables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _cartesian
from typing import Callable, Iterable, Mapping, Optional, Sequence

import numpy as np

PRUNE_TOL = 1e-14
DEFAULT_TOL = 1e-12

Monomial = tuple[int, int]

PAULI = {
    "identity": np.eye(2, dtype=complex),
    "pauli_x": np.array([[0, 1], [1, 0]], dtype=complex),
    "pauli_y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "pauli_z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DimensionMismatch(ValueError):
    """Raised when two operands act on different Hilbert spaces."""


def _as_matrix(m, dim: Optional[int] = None) -> np.ndarray:
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"coefficient must be a square matrix, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"coefficient has dim {arr.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coefficient contains NaN or Inf")
    return arr


class HybridObservable:
    """Polynomial in (x, k) with matrix coefficients.

    Instances are immutable. Coefficients with Frobenius norm at or below
    ``PRUNE_TOL`` are dropped, so the zero observable has no terms.

    Parameters
    ----------
    terms : mapping from ``(a, b)`` exponent pairs to ``dim x dim`` matrices
    dim : Hilbert-space dimension
    hbar : reduced Planck constant used by the brackets
    """

    __slots__ = ("dim", "hbar", "_terms")
    __hash__ = None  # equality is tolerance based

    def __init__(self, terms: Mapping[Monomial, object], dim: int, hbar: float = 1.0):
        if int(dim) != dim or dim < 1:
            raise ValueError(f"dim must be a positive integer, got {dim!r}")
        if not (hbar > 0 and math.isfinite(hbar)):
            raise ValueError(f"hbar must be positive and finite, got {hbar!r}")
        store: dict[Monomial, np.ndarray] = {}
        for mono, mat in terms.items():
            a, b = (int(e) for e in mono)
            if a < 0 or b < 0:
                raise ValueError(f"negative exponent in monomial {mono}")
            arr = _as_matrix(mat, dim)
            if (a, b) in store:
                arr = store[(a, b)] + arr
            store[(a, b)] = arr
        frozen = {}
        for mono in sorted(store):
            arr = store[mono]
            if np.linalg.norm(arr) > PRUNE_TOL:
                arr = arr.copy()
                arr.setflags(write=False)
                frozen[mono] = arr
        object.__setattr__(self, "dim", int(dim))
        object.__setattr__(self, "hbar", float(hbar))
        object.__setattr__(self, "_terms", frozen)

    def __setattr__(self, name, value):
        raise AttributeError("HybridObservable is immutable")

    # -- construction helpers -------------------------------------------

    @classmethod
    def zero(cls, dim: int, hbar: float = 1.0) -> "HybridObservable":
        return cls({}, dim, hbar)

    @classmethod
    def constant(cls, matrix, hbar: float = 1.0) -> "HybridObservable":
        """Degree-zero observable (purely quantum) with the given matrix."""
        arr = _as_matrix(matrix)
        return cls({(0, 0): arr}, arr.shape[0], hbar)

    @classmethod
    def scalar(cls, value: complex, dim: int, hbar: float = 1.0) -> "HybridObservable":
        return cls({(0, 0): value * np.eye(dim, dtype=complex)}, dim, hbar)

    # -- inspection -------------------------------------------------------

    @property
    def terms(self) -> dict[Monomial, np.ndarray]:
        """Read-only view of the term map, sorted by monomial."""
        return dict(self._terms)

    def coefficient(self, a: int, b: int) -> np.ndarray:
        return self._terms.get((a, b), np.zeros((self.dim, self.dim), dtype=complex))

    @property
    def degree(self) -> int:
        return max((a + b for a, b in self._terms), default=0)

    def is_zero(self) -> bool:
        return not self._terms

    def is_quantum(self) -> bool:
        """True when the observable has no classical-variable dependence."""
        return all(mono == (0, 0) for mono in self._terms)

    def is_classical(self, tol: float = DEFAULT_TOL) -> bool:
        """True when every coefficient is a multiple of the identity."""
        eye = np.eye(self.dim)
        for mat in self._terms.values():
            c = np.trace(mat) / self.dim
            if np.linalg.norm(mat - c * eye) > tol:
                return False
        return True

    def is_hermitian(self, tol: float = DEFAULT_TOL) -> bool:
        return all(np.linalg.norm(m - m.conj().T) <= tol for m in self._terms.values())

    def norm(self) -> float:
        """Frobenius norm taken over all monomials together."""
        return math.sqrt(sum(float(np.linalg.norm(m)) ** 2 for m in self._terms.values()))

    def allclose(self, other: "HybridObservable", tol: float = DEFAULT_TOL) -> bool:
        return (self - other).norm() <= tol

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> "HybridObservable":
        if isinstance(other, HybridObservable):
            if other.dim != self.dim:
                raise DimensionMismatch(f"dim {self.dim} vs {other.dim}")
            if other.hbar != self.hbar:
                raise ValueError(f"hbar mismatch: {self.hbar} vs {other.hbar}")
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return HybridObservable.scalar(complex(other), self.dim, self.hbar)
        return NotImplemented

    def _new(self, terms) -> "HybridObservable":
        return HybridObservable(terms, self.dim, self.hbar)

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for mono, mat in other._terms.items():
            out[mono] = out[mono] + mat if mono in out else mat
        return self._new(out)

    __radd__ = __add__

    def __neg__(self):
        return self._new({m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self._new({m: complex(other) * c for m, c in self._terms.items()})
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: dict[Monomial, np.ndarray] = {}
        for (a1, b1), u in self._terms.items():
            for (a2, b2), v in other._terms.items():
                key = (a1 + a2, b1 + b2)
                uv = u @ v
                out[key] = out[key] + uv if key in out else uv
        return self._new(out)

    def __rmul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * other
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return self * (1 / other)
        return NotImplemented

    def __pow__(self, n: int):
        if int(n) != n or n < 0:
            raise ValueError("only non-negative integer powers are supported")
        out = HybridObservable.scalar(1.0, self.dim, self.hbar)
        for _ in range(int(n)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, HybridObservable):
            return NotImplemented
        if other.dim != self.dim or other.hbar != self.hbar:
            return False
        return self.allclose(other)

    def __repr__(self):
        if not self._terms:
            return f"HybridObservable(0, dim={self.dim})"
        parts = []
        for (a, b), mat in self._terms.items():
            mono = "".join(
                s for s in (_power("x", a), _power("k", b)) if s
            ) or "1"
            parts.append(f"{mono}:{np.round(mat, 6).tolist()}")
        return f"HybridObservable({', '.join(parts)}, dim={self.dim}, hbar={self.hbar})"

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "hbar": self.hbar,
            "terms": [
                {
                    "a": a,
                    "b": b,
                    "matrix": [[[float(z.real), float(z.imag)] for z in row] for row in mat],
                }
                for (a, b), mat in self._terms.items()
            ],
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "HybridObservable":
        """Inverse of :meth:`to_dict`; raises ``ValueError`` naming the bad field."""
        if not isinstance(data, Mapping):
            raise ValueError("observable must be a JSON object")
        for key in ("dim", "terms"):
            if key not in data:
                raise ValueError(f"missing field '{key}'")
        dim = data["dim"]
        if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
            raise ValueError(f"field 'dim' must be a positive integer, got {dim!r}")
        hbar = data.get("hbar", 1.0)
        if not isinstance(hbar, (int, float)) or not hbar > 0:
            raise ValueError(f"field 'hbar' must be a positive number, got {hbar!r}")
        if not isinstance(data["terms"], list):
            raise ValueError("field 'terms' must be a list")
        terms: dict[Monomial, np.ndarray] = {}
        for i, term in enumerate(data["terms"]):
            where = f"terms[{i}]"
            if not isinstance(term, Mapping):
                raise ValueError(f"{where} must be an object")
            for key in ("a", "b", "matrix"):
                if key not in term:
                    raise ValueError(f"{where}: missing field '{key}'")
            a, b = term["a"], term["b"]
            if not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in (a, b)):
                raise ValueError(f"{where}: exponents 'a', 'b' must be non-negative integers")
            try:
                arr = np.array(term["matrix"], dtype=float)
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{where}.matrix: not a numeric array ({exc})") from None
            if arr.shape != (dim, dim, 2):
                raise ValueError(
                    f"{where}.matrix: expected shape ({dim}, {dim}, 2) of [re, im] pairs, "
                    f"got {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{where}.matrix: contains NaN or Inf")
            if (a, b) in terms:
                raise ValueError(f"{where}: duplicate monomial ({a}, {b})")
            terms[(a, b)] = arr[..., 0] + 1j * arr[..., 1]
        return cls(terms, dim, float(hbar))


def _power(name: str, n: int) -> str:
    if n == 0:
        return ""
    return name if n == 1 else f"{name}^{n}"


# ---------------------------------------------------------------------------
# generators


def ladder(dim: int) -> np.ndarray:
    """Truncated annihilation operator, ``a|n> = sqrt(n)|n-1>``."""
    return np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)


def generators(kind: str, dim: int, hbar: float = 1.0) -> HybridObservable:
    """Return one of the fundamental observables.

    ``kind`` is ``"x"``, ``"k"``, ``"identity"``, ``"pauli_x"``, ``"pauli_y"``,
    ``"pauli_z"``, ``"boson_q"`` or ``"boson_p"``. The boson pair is
    ``q = sqrt(hbar/2) (a + a^dag)`` and ``p = i sqrt(hbar/2) (a^dag - a)`` on a
    Fock space truncated to ``dim`` levels.
    """
    if int(dim) != dim or dim < 1:
        raise ValueError(f"dim must be a positive integer, got {dim!r}")
    eye = np.eye(dim, dtype=complex)
    if kind == "x":
        return HybridObservable({(1, 0): eye}, dim, hbar)
    if kind == "k":
        return HybridObservable({(0, 1): eye}, dim, hbar)
    if kind == "identity":
        return HybridObservable({(0, 0): eye}, dim, hbar)
    if kind.startswith("pauli_"):
        if kind not in PAULI or dim != 2:
            raise ValueError(f"unsupported generator {kind!r} for dim={dim}")
        return HybridObservable({(0, 0): PAULI[kind]}, dim, hbar)
    if kind in ("boson_q", "boson_p"):
        if dim < 2:
            raise ValueError(f"boson generators need dim >= 2, got {dim}")
        a = ladder(dim)
        scale = math.sqrt(hbar / 2)
        if kind == "boson_q":
            mat = scale * (a + a.conj().T)
        else:
            mat = 1j * scale * (a.conj().T - a)
        return HybridObservable({(0, 0): mat}, dim, hbar)
    raise ValueError(f"unsupported generator kind {kind!r}")


# ---------------------------------------------------------------------------
# unary operations


def adjoint(A: HybridObservable) -> HybridObservable:
    """Conjugate-transpose every coefficient; x and k are real."""
    return A._new({m: c.conj().T for m, c in A._terms.items()})


def partial_derivative(A: HybridObservable, wrt: str) -> HybridObservable:
    """Formal derivative with respect to ``"x"`` or ``"k"``.

    Matrix coefficients are constants for this purpose, so the result of
    differentiating a mixed term is generally still a q-number.
    """
    if wrt == "x":
        return A._new({(a - 1, b): a * c for (a, b), c in A._terms.items() if a > 0})
    if wrt == "k":
        return A._new({(a, b - 1): b * c for (a, b), c in A._terms.items() if b > 0})
    raise ValueError(f"wrt must be 'x' or 'k', got {wrt!r}")


def evaluate_at(A: HybridObservable, point: Sequence[float]) -> np.ndarray:
    """Substitute numbers for (x, k) and return the resulting matrix."""
    x, k = (float(v) for v in point)
    if not (math.isfinite(x) and math.isfinite(k)):
        raise ValueError(f"point must be finite, got {point!r}")
    out = np.zeros((A.dim, A.dim), dtype=complex)
    for (a, b), c in A._terms.items():
        out += (x**a) * (k**b) * c
    return out


# ---------------------------------------------------------------------------
# brackets


def _check_pair(A: HybridObservable, B: HybridObservable) -> None:
    if A.dim != B.dim:
        raise DimensionMismatch(f"dim {A.dim} vs {B.dim}")
    if A.hbar != B.hbar:
        raise ValueError(f"hbar mismatch: {A.hbar} vs {B.hbar}")


def commutator(A: HybridObservable, B: HybridObservable) -> HybridObservable:
    _check_pair(A, B)
    return A * B - B * A


def poisson(A: HybridObservable, B: HybridObservable) -> HybridObservable:
    """``dA/dx dB/dk - dA/dk dB/dx`` with coefficients multiplied left to right."""
    _check_pair(A, B)
    Ax, Ak = partial_derivative(A, "x"), partial_derivative(A, "k")
    Bx, Bk = partial_derivative(B, "x"), partial_derivative(B, "k")
    return Ax * Bk - Ak * Bx


def anderson_bracket(A: HybridObservable, B: HybridObservable) -> HybridObservable:
    """Commutator over i*hbar plus the ordered Poisson term.

    Not antisymmetric; kept for analysis and never used to evolve.
    """
    return commutator(A, B) / (1j * A.hbar) + poisson(A, B)


def abt_bracket(A: HybridObservable, B: HybridObservable) -> HybridObservable:
    """Antisymmetric, hermiticity-preserving hybrid bracket.

    ``[A, B]/(i hbar) + (Ax Bk - Ak Bx + Bk Ax - Bx Ak) / 2``
    """
    _check_pair(A, B)
    Ax, Ak = partial_derivative(A, "x"), partial_derivative(A, "k")
    Bx, Bk = partial_derivative(B, "x"), partial_derivative(B, "k")
    sym = (Ax * Bk - Ak * Bx + Bk * Ax - Bx * Ak) * 0.5
    return commutator(A, B) / (1j * A.hbar) + sym


def jacobiator(A: HybridObservable, B: HybridObservable, C: HybridObservable) -> HybridObservable:
    """``[[A,B],C] - [[A,C],B] - [A,[B,C]]`` for the ABT bracket."""
    _check_pair(A, B)
    _check_pair(A, C)
    br = abt_bracket
    return br(br(A, B), C) - br(br(A, C), B) - br(A, br(B, C))


# ---------------------------------------------------------------------------
# identity residuals


@dataclass(frozen=True)
class ResidualReport:
    identity_name: str
    max_abs_residual: float
    trial_count: int
    witness: Optional[tuple[HybridObservable, ...]] = None

    def __post_init__(self):
        if self.max_abs_residual < 0:
            raise ValueError("residual must be non-negative")
        if self.trial_count > 0 and self.witness is None:
            raise ValueError("a witness is required when trial_count > 0")

    def passed(self, tol: float = DEFAULT_TOL) -> bool:
        return self.max_abs_residual <= tol

    def to_dict(self) -> dict:
        return {
            "identity": self.identity_name,
            "max_abs_residual": self.max_abs_residual,
            "trial_count": self.trial_count,
        }


PRODUCT_RULE_VARIANTS = ("anderson_left", "anderson_right", "abt", "abt_symmetric")


def _product_rule_residual(A, B, C, variant: str) -> float:
    d = partial_derivative
    Ax, Ak = d(A, "x"), d(A, "k")
    if variant == "anderson_left":
        br = anderson_bracket
        lhs = br(A, B * C)
        rhs = (
            br(A, B) * C
            + B * br(A, C)
            + commutator(Ax, B) * d(C, "k")
            - commutator(Ak, B) * d(C, "x")
        )
        return (lhs - rhs).norm()
    if variant == "anderson_right":
        br = anderson_bracket
        lhs = br(B * C, A)
        rhs = (
            br(B, A) * C
            + B * br(C, A)
            + d(B, "x") * commutator(C, Ak)
            - d(B, "k") * commutator(C, Ax)
        )
        return (lhs - rhs).norm()
    if variant == "abt":
        br = abt_bracket
        correction = (
            commutator(Ax, B) * d(C, "k")
            - commutator(Ak, B) * d(C, "x")
            + d(B, "k") * commutator(C, Ax)
            - d(B, "x") * commutator(C, Ak)
        ) * 0.5
        rhs = br(A, B) * C + B * br(A, C) + correction
        lhs = br(A, B * C)
        return max((lhs - rhs).norm(), (-br(B * C, A) - rhs).norm())
    if variant == "abt_symmetric":
        # requires one classical factor f and one purely quantum factor U
        if B.is_classical() and C.is_quantum():
            f, U = B, C
        elif C.is_classical() and B.is_quantum():
            f, U = C, B
        else:
            raise ValueError(
                "abt_symmetric needs one c-number-valued factor and one degree-zero factor"
            )
        br = abt_bracket
        lhs = br(A, (f * U + U * f) * 0.5)
        rhs = (br(A, f) * U + f * br(A, U) + br(A, U) * f + U * br(A, f)) * 0.5
        return (lhs - rhs).norm()
    raise ValueError(f"unknown product-rule variant {variant!r}")


def product_rule_check(
    A: HybridObservable, B: HybridObservable, C: HybridObservable, variant: str
) -> ResidualReport:
    """Residual of a product rule (with its correction terms) on one triple.

    ``variant`` is one of ``PRODUCT_RULE_VARIANTS``. ``abt_symmetric`` checks
    the rule for a symmetrically ordered product of a classical factor and a
    quantum factor and raises ``ValueError`` if B, C are not of that form.
    """
    _check_pair(A, B)
    _check_pair(A, C)
    res = _product_rule_residual(A, B, C, variant)
    return ResidualReport(f"product_rule_{variant}", res, 1, (A, B, C))


# ---------------------------------------------------------------------------
# randomized sweeps


def random_observable(
    rng: np.random.Generator,
    dim: int,
    degree: int,
    *,
    kind: str = "mixed",
    hermitian: bool = False,
    hbar: float = 1.0,
) -> HybridObservable:
    """Random observable with all monomials up to ``degree``.

    ``kind`` selects ``"mixed"`` (random matrices), ``"classical"`` (real
    multiples of the identity) or ``"quantum"`` (degree zero).
    """
    if kind == "quantum":
        monos = [(0, 0)]
    else:
        monos = [(a, b) for a in range(degree + 1) for b in range(degree + 1 - a)]
    terms = {}
    for mono in monos:
        if kind == "classical":
            terms[mono] = rng.uniform(-1, 1) * np.eye(dim)
            continue
        m = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
        if hermitian:
            m = (m + m.conj().T) / 2
        terms[mono] = m
    return HybridObservable(terms, dim, hbar)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _classical_ones(rng, dim, degree, hbar):
    return random_observable(rng, dim, degree, kind="classical", hbar=hbar)


def _make_triple(rng, dim, degree, hbar, kinds=("mixed", "mixed", "mixed")):
    return tuple(random_observable(rng, dim, degree, kind=k, hbar=hbar) for k in kinds)


def _antisymmetry(rng, dim, degree, hbar):
    A, B = _make_triple(rng, dim, degree, hbar)[:2]
    return (abt_bracket(A, B) + abt_bracket(B, A)).norm(), (A, B)


def _hermiticity(rng, dim, degree, hbar):
    A = random_observable(rng, dim, degree, hermitian=True, hbar=hbar)
    B = random_observable(rng, dim, degree, hermitian=True, hbar=hbar)
    C = abt_bracket(A, B)
    return (adjoint(C) - C).norm(), (A, B)


def _self_bracket(rng, dim, degree, hbar):
    H = random_observable(rng, dim, degree, hbar=hbar)
    return abt_bracket(H, H).norm(), (H,)


def _anderson_defect(rng, dim, degree, hbar):
    U = random_observable(rng, dim, 0, kind="quantum", hbar=hbar)
    V = random_observable(rng, dim, 0, kind="quantum", hbar=hbar)
    f = _classical_ones(rng, dim, degree, hbar)
    g = _classical_ones(rng, dim, degree, hbar)
    A, B = U * f, V * g
    lhs = anderson_bracket(A, B) + anderson_bracket(B, A)
    rhs = commutator(U, V) * poisson(f, g)
    return (lhs - rhs).norm(), (A, B)


def _product_rule(variant):
    def trial(rng, dim, degree, hbar):
        if variant == "abt_symmetric":
            A = random_observable(rng, dim, degree, hbar=hbar)
            B = _classical_ones(rng, dim, degree, hbar)
            C = random_observable(rng, dim, 0, kind="quantum", hbar=hbar)
        else:
            A, B, C = _make_triple(rng, dim, degree, hbar)
        return _product_rule_residual(A, B, C, variant), (A, B, C)

    return trial


def _jacobi(kind):
    def trial(rng, dim, degree, hbar):
        triple = _make_triple(rng, dim, degree, hbar, (kind,) * 3)
        return jacobiator(*triple).norm(), triple

    return trial


SWEEPS: dict[str, Callable] = {
    "anderson_product_rule_left": _product_rule("anderson_left"),
    "anderson_product_rule_right": _product_rule("anderson_right"),
    "abt_product_rule": _product_rule("abt"),
    "abt_symmetric_product_rule": _product_rule("abt_symmetric"),
    "abt_antisymmetry": _antisymmetry,
    "abt_hermiticity": _hermiticity,
    "abt_self_bracket": _self_bracket,
    "anderson_antisymmetry_defect": _anderson_defect,
    "jacobiator_classical": _jacobi("classical"),
    "jacobiator_quantum": _jacobi("quantum"),
}


def sweep_identity(
    name: str,
    trials: int,
    seed: int = 0,
    dims: Iterable[int] = (2, 3),
    max_degree: int = 2,
    hbar: float = 1.0,
) -> ResidualReport:
    """Run one named identity over ``trials`` random inputs.

    Trial ``i`` draws from ``default_rng([seed, i])``, so results do not depend
    on evaluation order. Dimension and degree cycle through the allowed
    values.
    """
    if name not in SWEEPS:
        raise ValueError(f"unknown identity {name!r}; choose from {sorted(SWEEPS)}")
    dims = tuple(dims)
    check = SWEEPS[name]
    worst, witness = 0.0, None
    for i, (dim, degree) in zip(
        range(trials), _cycle(_cartesian(dims, range(1, max_degree + 1)))
    ):
        res, inputs = check(_trial_rng(seed, i), dim, degree, hbar)
        if witness is None or res > worst:
            worst, witness = res, inputs
    return ResidualReport(name, worst, trials, witness)


def _cycle(items):
    items = list(items)
    while True:
        yield from items
