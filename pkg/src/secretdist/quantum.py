"""Small density-matrix engine for the three-qubit entanglement-distribution example.

Qubits carry labels; the first label is the most significant bit of the
computational-basis index, so for labels (A, B, C) the index of |abc> is
4a + 2b + c.
"""

from __future__ import annotations

import logging
from collections.abc import Iterable, Mapping, Sequence
from fractions import Fraction

import numpy as np

from .dist_core import JointDistribution, Party, VariableDef, build_distribution
from .errors import EmptyOrFullSubsystem, InvalidState, SameQubit, UnknownQubit, WrongDimension
from .jacobi import hermitian_eigenvalues

log = logging.getLogger(__name__)

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-10
OMIT_PROBABILITY = 1e-14


class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite matrix over labelled qubits."""

    __slots__ = ("matrix", "labels")

    def __init__(self, matrix, labels: Sequence[str]):
        m = np.array(matrix, dtype=complex)
        labels = tuple(labels)
        d = 2 ** len(labels)
        if m.shape != (d, d):
            raise WrongDimension(f"{len(labels)} qubits need a {d}x{d} matrix, got {m.shape}")
        if len(set(labels)) != len(labels):
            raise InvalidState(f"repeated qubit labels {labels}")
        if not np.all(np.isfinite(m)):
            raise InvalidState("matrix has non-finite entries")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL:
            raise InvalidState("matrix is not Hermitian")
        if abs(np.trace(m) - 1) > TRACE_TOL:
            raise InvalidState(f"trace is {np.trace(m).real!r}, not 1")
        lo = hermitian_eigenvalues(m)[0]
        if lo < -PSD_TOL:
            raise InvalidState(f"minimum eigenvalue {lo!r} is negative")
        m.setflags(write=False)
        self.matrix = m
        self.labels = labels

    @property
    def n_qubits(self) -> int:
        return len(self.labels)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownQubit(f"no qubit labelled {label!r} (have {list(self.labels)})") from None

    def eigenvalues(self) -> np.ndarray:
        return hermitian_eigenvalues(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix)).copy()

    def __repr__(self):
        return f"DensityMatrix({', '.join(self.labels)})"


def ket(bits: str) -> np.ndarray:
    v = np.zeros(2 ** len(bits), dtype=complex)
    v[int(bits, 2)] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    vec = np.asarray(vec, dtype=complex)
    return np.outer(vec, vec.conj())


def psi_k(k: int) -> np.ndarray:
    """(|0> + exp(i pi k / 2) |1>) / sqrt 2."""
    return np.array([1.0, np.exp(1j * np.pi * k / 2)], dtype=complex) / np.sqrt(2)


PHI_PLUS = (ket("00") + ket("11")) / np.sqrt(2)
GHZ = (ket("000") + ket("111")) / np.sqrt(2)
LABELS = ("A", "B", "C")
PAPER_STATES = ("rho_initial", "sigma_mid", "tau_final")


def build_paper_state(which: str) -> DensityMatrix:
    """``rho_initial``, ``sigma_mid`` or ``tau_final`` on qubits (A, B, C)."""
    if which == "rho_initial":
        m = np.zeros((8, 8), dtype=complex)
        for k in range(4):
            m += projector(np.kron(np.kron(psi_k(k), psi_k(-k)), ket("0"))) / 6
        for i in "01":
            m += projector(ket(i + i + "1")) / 6
    elif which == "sigma_mid":
        m = projector(GHZ) / 3
        for bits in ("001", "010", "101", "110"):
            m += projector(ket(bits)) / 6
    elif which == "tau_final":
        # the identity term carries 1/4 so the state has unit trace
        m = np.kron(projector(PHI_PLUS), projector(ket("0"))) / 3
        m += (2 / 3) * np.kron(np.eye(4) / 4, projector(ket("1")))
    else:
        raise ValueError(f"unknown state {which!r}; expected one of {PAPER_STATES}")
    return DensityMatrix(m, LABELS)


def cnot_unitary(n: int, control: int, target: int) -> np.ndarray:
    d = 2 ** n
    u = np.zeros((d, d))
    cbit, tbit = 1 << (n - 1 - control), 1 << (n - 1 - target)
    for i in range(d):
        u[i ^ tbit if i & cbit else i, i] = 1.0
    return u


def apply_cnot(state: DensityMatrix, control: str, target: str) -> DensityMatrix:
    c, t = state.index(control), state.index(target)
    if c == t:
        raise SameQubit(f"control and target are both {control!r}")
    u = cnot_unitary(state.n_qubits, c, t)
    return DensityMatrix(u @ state.matrix @ u.conj().T, state.labels)


def partial_transpose(state: DensityMatrix, subsystem: Iterable[str]) -> np.ndarray:
    """Transpose the ``subsystem`` factors; an index permutation, so exact and involutive."""
    idx = sorted({state.index(q) for q in subsystem})
    n = state.n_qubits
    if not idx or len(idx) == n:
        raise EmptyOrFullSubsystem("partial transpose needs a non-empty proper subset of the qubits")
    t = state.matrix.reshape((2,) * (2 * n))
    axes = list(range(2 * n))
    for i in idx:
        axes[i], axes[n + i] = axes[n + i], axes[i]
    return t.transpose(axes).reshape(2 ** n, 2 ** n)


def partial_transpose_min_eigenvalue(state: DensityMatrix, subsystem: Iterable[str]) -> float:
    return float(hermitian_eigenvalues(partial_transpose(state, subsystem))[0])


def measure_computational(state: DensityMatrix, qubit: str) -> list[tuple[int, float, DensityMatrix | None]]:
    """Measure ``qubit`` in the computational basis.

    Returns ``(outcome, probability, post-state on the remaining qubits)`` for
    each outcome whose probability is at least 1e-14. Measuring the last qubit
    leaves no system, in which case the post-state is ``None``.
    """
    k = state.index(qubit)
    n = state.n_qubits
    rest = state.labels[:k] + state.labels[k + 1:]
    t = state.matrix.reshape((2,) * (2 * n))
    out = []
    for outcome in (0, 1):
        block = np.take(np.take(t, outcome, axis=n + k), outcome, axis=k)
        d = 2 ** (n - 1)
        block = block.reshape(d, d)
        p = float(np.real(np.trace(block)))
        if p < OMIT_PROBABILITY:
            continue
        post = DensityMatrix(block / p, rest) if rest else None
        out.append((outcome, p, post))
    return out


def fidelity_with_phi_plus(state: DensityMatrix) -> float:
    if state.n_qubits != 2:
        raise WrongDimension(f"expected a two-qubit state, got {state.n_qubits} qubits")
    return float(np.real(PHI_PLUS.conj() @ state.matrix @ PHI_PLUS))


def _rationalize(values: np.ndarray, tol: float = 1e-12, max_den: int = 10 ** 6) -> list[Fraction] | None:
    fracs = [Fraction(float(v)).limit_denominator(max_den) for v in values]
    if any(abs(float(f) - v) > tol for f, v in zip(fracs, values)) or sum(fracs) != 1:
        return None
    return fracs


def diagonal_is_rational(state: DensityMatrix) -> bool:
    return _rationalize(state.diagonal()) is not None


def computational_distribution(state: DensityMatrix, owners: Mapping[str, Party | str] | None = None) -> JointDistribution:
    """Joint distribution of computational-basis outcomes, one binary variable per qubit.

    Diagonal entries within 1e-12 of a fraction with denominator at most 10^6
    are replaced by that fraction. Otherwise the exact binary value of each
    float is used, renormalised, and a warning is logged;
    :func:`diagonal_is_rational` reports which case applies.
    """
    owners = dict(owners or {})
    default = {"A": Party.ALICE, "B": Party.BOB, "C": Party.ALICE}
    variables = [VariableDef(q, ("0", "1"), owners.get(q, default.get(q, Party.ALICE))) for q in state.labels]
    diag = np.clip(state.diagonal(), 0.0, None)
    fracs = _rationalize(diag)
    if fracs is None:
        log.warning("diagonal of %r is not rational within 1e-12; using float values", state)
        raw = [Fraction(float(v)) for v in diag]
        total = sum(raw)
        fracs = [r / total for r in raw]
    n = state.n_qubits
    entries = [(tuple(format(i, f"0{n}b")), p) for i, p in enumerate(fracs) if p]
    return build_distribution(variables, entries)
