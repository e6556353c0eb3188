"""Seeded generation of random and constructed qubit states.

Every draw comes from a numpy ``Philox`` stream keyed by
``SeedSequence([seed, index])``, so sample ``index`` of a sweep is a pure
function of the master seed and the index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from .bounds import FORMS, TOL_INEQ
from .coherence import c_l1_product_identity
from .errors import ArgumentError, InfeasibleError
from .qmatrix import PureState, QubitState, _check_size

RNG_ALGORITHM = "numpy.random.Philox(SeedSequence([seed, index(, stream)]))"

SamplerKind = Literal["haar_pure", "ginibre_mixed", "product_pure", "targeted"]


def make_rng(seed: int, index: int = 0, stream: int = 0) -> np.random.Generator:
    if seed < 0 or index < 0:
        raise ArgumentError("seed and index must be non-negative")
    key = [int(seed), int(index)] + ([int(stream)] if stream else [])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def _complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    z = rng.standard_normal(shape + (2,) if isinstance(shape, tuple) else (shape, 2))
    return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2)


def _check_n(n: int, least: int = 2) -> None:
    if not (isinstance(n, (int, np.integer)) and n >= least):
        raise ArgumentError(f"need an integer qubit count >= {least}, got {n!r}")
    _check_size(n)


def haar_pure(n: int, seed: int, index: int = 0) -> PureState:
    _check_n(n)
    v = _complex_normal(make_rng(seed, index), 1 << n)
    return PureState(v / np.linalg.norm(v))


def ginibre_mixed(n: int, rank: int, seed: int, index: int = 0) -> QubitState:
    _check_n(n, least=1)
    dim = 1 << n
    if not (isinstance(rank, (int, np.integer)) and 1 <= rank <= dim):
        raise ArgumentError(f"rank must be in [1, {dim}], got {rank!r}")
    g = _complex_normal(make_rng(seed, index), (dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    return QubitState(rho / np.trace(rho).real)


def _qubit(c: float, phase: float, upper: bool) -> np.ndarray:
    theta = math.asin(c) / 2
    if upper:
        theta = math.pi / 2 - theta
    if c == 1:
        amp = 1 / math.sqrt(2)
        return np.array([amp, amp * np.exp(1j * phase)])
    return np.array([math.cos(theta), math.sin(theta) * np.exp(1j * phase)])


def product_pure(
    n: int,
    coherence_targets: Sequence[float],
    seed: int = 0,
    index: int = 0,
    phases: Sequence[float] | None = None,
    upper: Sequence[bool] | None = None,
) -> PureState:
    """Product of single-qubit pure states with prescribed l1 coherences.

    Qubit ``q`` is ``cos(t)|0> + e^{i phi} sin(t)|1>`` with ``sin(2t) = c_q``.
    Phases are drawn uniformly from the seed unless given; ``upper[q]``
    picks the ``t > pi/4`` solution (more weight on ``|1>``).
    """
    _check_n(n)
    targets = [float(c) for c in coherence_targets]
    if len(targets) != n:
        raise ArgumentError(f"need {n} coherence targets, got {len(targets)}")
    for q, c in enumerate(targets):
        if not (0 <= c <= 1):
            raise ArgumentError(f"target {c!r} for qubit {q} outside [0, 1]")
    rng = make_rng(seed, index)
    if phases is None:
        phases = rng.uniform(0, 2 * math.pi, n)
    if upper is None:
        upper = [False] * n
    if len(phases) != n or len(upper) != n:
        raise ArgumentError("phases and upper must have one entry per qubit")
    v = np.ones(1, dtype=np.complex128)
    for c, phi, up in zip(targets, phases, upper):
        v = np.kron(v, _qubit(c, float(phi), bool(up)))
    return PureState(v / np.linalg.norm(v))


def worked_example() -> PureState:
    """``(|0>+|1>)/sqrt2 (x) |0> (x) (|0>+3|1>)/sqrt10``."""
    a = np.array([1, 1]) / math.sqrt(2)
    b = np.array([1, 0])
    c = np.array([1, 3]) / math.sqrt(10)
    return PureState(np.kron(np.kron(a, b), c).astype(np.complex128))


def _tail_limits(n: int, k: float) -> list[float]:
    """``limits[i]``: largest tail_i (1-based, i = 1..n-1) keeping a prefix chain feasible.

    The bound propagates backwards through ``(1 + T/k)(1 + T) - 1 <= L``.
    """
    limits = [math.nan, k]
    b = 1 + 1 / k
    for _ in range(2, n):
        L = limits[-1]
        limits.append(k * (-b + math.sqrt(b * b + 4 * L / k)) / 2)
    return limits


def targeted_coherences(
    n: int, m: int, k: float, rng: np.random.Generator | None = None,
    fixed: Sequence[float | None] | None = None, form: str = "proof",
) -> list[float]:
    """Per-qubit coherences of a product state meeting the ordering conditions at ``(k, m)``.

    Solved right to left. Positions ``j > m`` get ``c_j <= k * tail_j``
    (``tail_j / k`` for ``form="stated"``), positions ``i <= m`` get
    ``c_i >= tail_i / k``. Free targets are drawn uniformly inside ranges
    that keep the rest of the chain feasible; ``fixed`` entries are taken
    as given.
    """
    if not (isinstance(m, (int, np.integer)) and 1 <= m <= n - 2):
        raise ArgumentError(f"m must be an integer in [1, {n - 2}], got {m!r}")
    if not (0 < k <= 1):
        raise ArgumentError(f"k must lie in (0, 1], got {k!r}")
    if form not in FORMS:
        raise ArgumentError(f"condition form must be one of {FORMS}, got {form!r}")
    fixed = list(fixed) if fixed is not None else [None] * n
    if len(fixed) != n:
        raise ArgumentError(f"need {n} fixed entries (None for free), got {len(fixed)}")
    rng = rng if rng is not None else make_rng(0)
    limits = _tail_limits(n, k)

    def pick(pos: int, lo: float, hi: float) -> float:
        value = fixed[pos - 1]
        if value is not None:
            return float(value)
        hi = max(lo, hi)
        return lo + (hi - lo) * rng.uniform()

    c = [0.0] * (n + 1)  # 1-based
    c[n] = pick(n, 0.0, min(1.0, limits[n - 1]))
    if not 0 <= c[n] <= 1:
        raise InfeasibleError(n, f"target for A_{n} outside [0, 1]")
    tail = c[n]
    for pos in range(n - 1, 0, -1):
        cap = 1.0 if pos == 1 else (1 + limits[pos - 1]) / (1 + tail) - 1
        if pos > m:
            allowed = k * tail if form == "proof" else tail / k
            c[pos] = pick(pos, 0.0, min(1.0, allowed, cap))
            if not (0 <= c[pos] <= 1 and c[pos] <= allowed + TOL_INEQ):
                raise InfeasibleError(pos, f"A_{pos} needs coherence <= {allowed:.6g}, got {c[pos]:.6g}")
        else:
            lo = tail / k
            if lo > 1 + TOL_INEQ:
                raise InfeasibleError(
                    pos, f"A_{pos} would need coherence {lo:.6g} > 1 to dominate its tail at k={k}"
                )
            lo = min(lo, 1.0)
            c[pos] = pick(pos, lo, min(1.0, cap))
            if not (0 <= c[pos] <= 1 and c[pos] >= lo - TOL_INEQ):
                raise InfeasibleError(pos, f"A_{pos} needs coherence >= {lo:.6g}, got {c[pos]:.6g}")
        tail = c_l1_product_identity([c[pos], tail])
    return c[1:]


def targeted(
    n: int, m: int, k: float, seed: int, index: int = 0,
    fixed: Sequence[float | None] | None = None, form: str = "proof",
) -> PureState:
    _check_n(n)
    rng = make_rng(seed, index)
    targets = targeted_coherences(n, m, k, rng, fixed, form)
    return product_pure(n, targets, seed=seed, index=index, phases=rng.uniform(0, 2 * math.pi, n))


@dataclass(frozen=True)
class SamplerSpec:
    """One sampler configuration; ``sample(i)`` is deterministic in ``(spec, i)``.

    For ``targeted``, ``m`` and ``k`` are drawn per sample when left unset.
    For ``product_pure``, per-qubit targets are uniform on ``[0, 1]``.
    """

    kind: SamplerKind
    n_qubits: int
    seed: int = 0
    rank: int | None = None
    m: int | None = None
    k: float | None = None
    form: str = "proof"

    def __post_init__(self):
        if self.kind not in ("haar_pure", "ginibre_mixed", "product_pure", "targeted"):
            raise ArgumentError(f"unknown sampler kind {self.kind!r}")
        _check_n(self.n_qubits)
        if self.kind == "ginibre_mixed":
            rank = (1 << self.n_qubits) if self.rank is None else self.rank
            if not 1 <= rank <= 1 << self.n_qubits:
                raise ArgumentError(f"rank {rank} outside [1, 2**{self.n_qubits}]")
            object.__setattr__(self, "rank", rank)
        if self.kind == "targeted" and self.n_qubits < 3:
            raise ArgumentError("targeted sampler needs at least 3 qubits")

    def sample(self, index: int) -> QubitState | PureState:
        n, seed = self.n_qubits, self.seed
        if self.kind == "haar_pure":
            return haar_pure(n, seed, index)
        if self.kind == "ginibre_mixed":
            return ginibre_mixed(n, self.rank, seed, index)
        if self.kind == "product_pure":
            rng = make_rng(seed, index)
            targets = rng.uniform(0, 1, n)
            return product_pure(n, targets, phases=rng.uniform(0, 2 * math.pi, n))
        m, k = self.targeted_params(index)
        return targeted(n, m, k, seed, index, form=self.form)

    def targeted_params(self, index: int) -> tuple[int, float]:
        # separate stream from the state draws so fixed m/k do not shift them
        rng = make_rng(self.seed, index, stream=1)
        m = self.m if self.m is not None else int(rng.integers(1, self.n_qubits - 1))
        k = self.k if self.k is not None else float(rng.uniform(0.05, 1.0))
        return m, k
