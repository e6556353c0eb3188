"""Dense density operators on qubit registers.

Matrices are plain ``complex128`` numpy arrays. Qubit 0 is the leftmost
(most significant) tensor factor: in a basis index ``b`` of an ``n``-qubit
register, qubit ``q`` is bit ``n - 1 - q``.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ArgumentError, SizeLimitError, StateFormatError, ValidationError

TOL_PHYS = 1e-9
DEFAULT_MAX_QUBITS = 14


def max_qubits() -> int:
    """Size guard, overridable through ``COHERENCE_MAX_QUBITS``."""
    raw = os.environ.get("COHERENCE_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        value = int(raw)
    except ValueError:
        raise ArgumentError(f"COHERENCE_MAX_QUBITS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ArgumentError("COHERENCE_MAX_QUBITS must be positive")
    return value


def _qubits_for_dim(dim: int) -> int:
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ArgumentError(f"dimension {dim} is not a power of two >= 2")
    return n


def _check_size(n_qubits: int) -> None:
    limit = max_qubits()
    if n_qubits > limit:
        raise SizeLimitError(f"{n_qubits} qubits exceeds the size limit of {limit}")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.complex128, copy=True)
    a.setflags(write=False)
    return a


def as_matrix(a) -> np.ndarray:
    """Coerce to a finite square complex matrix."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise ArgumentError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ArgumentError("matrix has non-finite entries")
    return m


@dataclass(frozen=True)
class ValidationReport:
    hermiticity_defect: float
    trace_defect: float
    min_eigenvalue: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.passes(self.tol)

    def passes(self, tol: float) -> bool:
        return self.hermiticity_defect <= tol and self.trace_defect <= tol and self.min_eigenvalue >= -tol

    def describe(self) -> str:
        problems = []
        if self.hermiticity_defect > self.tol:
            problems.append(f"not Hermitian (defect {self.hermiticity_defect:.3g})")
        if self.trace_defect > self.tol:
            problems.append(f"trace off by {self.trace_defect:.3g}")
        if self.min_eigenvalue < -self.tol:
            problems.append(f"negative eigenvalue {self.min_eigenvalue:.3g}")
        return "; ".join(problems) if problems else "ok"


@dataclass(frozen=True)
class PureState:
    """Normalized state vector on ``n_qubits`` qubits."""

    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128)
        if amps.ndim != 1:
            raise ArgumentError("amplitudes must be a vector")
        if not np.all(np.isfinite(amps)):
            raise ArgumentError("amplitudes have non-finite entries")
        n = _qubits_for_dim(amps.shape[0])
        _check_size(n)
        norm2 = float(np.vdot(amps, amps).real)
        if abs(norm2 - 1.0) > TOL_PHYS:
            raise ValidationError(f"state vector has squared norm {norm2!r}, expected 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))
        object.__setattr__(self, "n_qubits", n)


@dataclass(frozen=True)
class QubitState:
    """Density operator on ``n_qubits`` qubits.

    Construction checks shape and finiteness only; physicality is
    reported by :func:`validate` and enforced by :meth:`require_valid`.
    """

    matrix: np.ndarray
    labels: tuple[str, ...] = ()
    n_qubits: int = field(init=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        n = _qubits_for_dim(m.shape[0])
        _check_size(n)
        labels = tuple(self.labels) if self.labels else tuple(f"A{i + 1}" for i in range(n))
        if len(labels) != n:
            raise ArgumentError(f"{len(labels)} labels given for {n} qubits")
        object.__setattr__(self, "matrix", _frozen(m))
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "n_qubits", n)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @cached_property
    def report(self) -> ValidationReport:
        return validate(self)

    def require_valid(self, tol: float = TOL_PHYS) -> "QubitState":
        if not self.report.passes(tol):
            raise ValidationError(f"invalid density matrix: {self.report.describe()}")
        return self


def validate(rho: QubitState, tol: float = TOL_PHYS) -> ValidationReport:
    m = rho.matrix
    herm = float(np.max(np.abs(m - m.conj().T)))
    trace = abs(complex(np.trace(m)) - 1.0)
    # eigvalsh only reads one triangle; symmetrize so a non-Hermitian input still yields a real spectrum
    evals = np.linalg.eigvalsh((m + m.conj().T) / 2)
    return ValidationReport(herm, trace, float(evals[0]), tol)


def kron(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    dim = a.shape[0] * b.shape[0]
    if dim > (1 << max_qubits()):
        raise SizeLimitError(f"kron dimension {dim} exceeds 2**{max_qubits()}")
    return np.kron(a, b)


def from_pure(psi: PureState) -> QubitState:
    v = psi.amplitudes
    return QubitState(np.outer(v, v.conj()))


def _check_keep(keep: Sequence[int], n: int) -> tuple[int, ...]:
    keep = tuple(int(q) for q in keep)
    if not keep:
        raise ArgumentError("keep set is empty")
    if any(q < 0 or q >= n for q in keep):
        raise ArgumentError(f"keep set {keep} out of range for {n} qubits")
    if any(b <= a for a, b in zip(keep, keep[1:])):
        raise ArgumentError(f"keep set {keep} is not strictly increasing")
    return keep


def reduce_matrix(m: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Partial trace on a raw ``2**n`` square matrix, keeping ``keep``."""
    n = _qubits_for_dim(m.shape[0])
    keep = _check_keep(keep, n)
    traced = [q for q in range(n) if q not in keep]
    if not traced:
        return np.array(m, dtype=np.complex128)
    dk = 1 << len(keep)
    dt = 1 << len(traced)
    t = m.reshape((2,) * (2 * n))
    order = list(keep) + traced
    t = t.transpose(order + [n + q for q in order]).reshape(dk, dt, dk, dt)
    return np.einsum("ajbj->ab", t)


def partial_trace(rho: QubitState, keep: Sequence[int]) -> QubitState:
    keep = _check_keep(keep, rho.n_qubits)
    return QubitState(reduce_matrix(rho.matrix, keep), tuple(rho.labels[q] for q in keep))


# -- state files ------------------------------------------------------------


def _pair(x) -> complex:
    if not (isinstance(x, (list, tuple)) and len(x) == 2):
        raise StateFormatError(f"expected a [re, im] pair, got {x!r}")
    re, im = x
    if isinstance(re, bool) or isinstance(im, bool) or not all(isinstance(v, (int, float)) for v in (re, im)):
        raise StateFormatError(f"non-numeric entry {x!r}")
    return complex(float(re), float(im))


def parse_state(doc) -> PureState | QubitState:
    """Build a state from a decoded JSON document.

    Accepted forms::

        {"n": 3, "kind": "pure", "amplitudes": [[re, im], ...]}
        {"n": 3, "kind": "mixed", "matrix": [[[re, im], ...], ...]}

    ``n`` and ``kind`` are optional; when present they must agree with the
    payload.
    """
    if not isinstance(doc, dict):
        raise StateFormatError("state document must be a JSON object")
    unknown = set(doc) - {"n", "kind", "amplitudes", "matrix"}
    if unknown:
        raise StateFormatError(f"unknown keys in state document: {sorted(unknown)}")
    has_amps, has_mat = "amplitudes" in doc, "matrix" in doc
    if has_amps == has_mat:
        raise StateFormatError("state document needs exactly one of 'amplitudes' or 'matrix'")
    kind = doc.get("kind", "pure" if has_amps else "mixed")
    if kind not in ("pure", "mixed") or (kind == "pure") != has_amps:
        raise StateFormatError(f"kind {kind!r} does not match the payload")
    try:
        if has_amps:
            amps = doc["amplitudes"]
            if not isinstance(amps, list):
                raise StateFormatError("'amplitudes' must be a list")
            state: PureState | QubitState = PureState(np.array([_pair(x) for x in amps], dtype=np.complex128))
        else:
            rows = doc["matrix"]
            if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
                raise StateFormatError("'matrix' must be a list of rows")
            if len({len(r) for r in rows}) > 1:
                raise StateFormatError("'matrix' rows have unequal lengths")
            state = QubitState(np.array([[_pair(x) for x in r] for r in rows], dtype=np.complex128))
    except ArgumentError as exc:
        raise StateFormatError(str(exc)) from exc
    if "n" in doc and doc["n"] != state.n_qubits:
        raise StateFormatError(f"'n' is {doc['n']!r} but the payload has {state.n_qubits} qubits")
    return state


def load_state(path: str | Path) -> QubitState:
    """Read a state file and return its density operator (not yet validated)."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise StateFormatError(f"{path}: invalid JSON: {exc}") from exc
    state = parse_state(doc)
    return from_pure(state) if isinstance(state, PureState) else state


def _pairs(values) -> list:
    return [[float(z.real), float(z.imag)] for z in values]


def state_to_doc(state: PureState | QubitState) -> dict:
    if isinstance(state, PureState):
        return {"n": state.n_qubits, "kind": "pure", "amplitudes": _pairs(state.amplitudes)}
    return {"n": state.n_qubits, "kind": "mixed", "matrix": [_pairs(row) for row in state.matrix]}


def save_state(state: PureState | QubitState, path: str | Path) -> None:
    # json writes floats with repr(), which round-trips doubles exactly
    Path(path).write_text(json.dumps(state_to_doc(state)) + "\n")
