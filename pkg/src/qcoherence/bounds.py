"""Superadditivity bounds on powers of the l1 coherence of qubit registers.

Notation used throughout: for a register ``A_1 ... A_n`` in a fixed order,
``singles[i]`` is ``C^beta`` of qubit ``A_{i+1}`` alone and ``tails[i]`` is
``C^beta`` of the block ``A_{i+2} ... A_n`` (0-based lists, so ``tails[i]``
is the part of the register strictly after ``singles[i]``).  The split
index ``m`` keeps its 1-based meaning: positions ``1..m`` satisfy the
"dominant" condition ``single >= tail / k`` and positions ``m+1..n-1`` a
"dominated" condition.

Two forms of the dominated condition are supported:

``"proof"`` (default)
    ``single <= k * tail``. This is what the derivation needs: the scalar
    lemma is applied at ``x = single / tail`` and requires ``x <= k``.
``"stated"``
    ``single <= tail / k``. Weaker whenever ``k < 1`` and does *not* imply
    the bound: the product of qubits with coherences ``(0.64, 0.2, 0.1)``
    meets it at ``k = 1/2, m = 1`` yet ``C^2 = 1.3568 < 1.4596``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .coherence import offdiag_l1
from .errors import ArgumentError, ConditionError
from .qmatrix import TOL_PHYS, QubitState, reduce_matrix

TOL_INEQ = 1e-9

FORMS = ("proof", "stated")

CSV_COLUMNS = (
    "n", "alpha", "beta", "m", "k", "lhs", "rhs_theorem",
    "rhs_baseline_k1", "rhs_plain_sum", "gap", "conditions_met",
)


def _check_power(name: str, value: float) -> None:
    if not (math.isfinite(value) and value >= 1):
        raise ArgumentError(f"{name} must be a finite real >= 1, got {value!r}")


def _check_form(form: str) -> None:
    if form not in FORMS:
        raise ArgumentError(f"condition form must be one of {FORMS}, got {form!r}")


def _check_k(k: float) -> None:
    if not (0 < k <= 1):
        raise ArgumentError(f"k must lie in (0, 1], got {k!r}")


def _scaled(coef: float, x: float) -> float:
    # zero terms stay zero even when coef overflows to inf
    return 0.0 if x == 0 else coef * x


# -- scalar lemma -----------------------------------------------------------


def lemma2_factor(k: float, alpha: float) -> float:
    """Return ``((1 + k)**alpha - 1) / k**alpha``.

    Exact at the two special points: ``2**alpha - 1`` for ``k = 1`` and
    ``1`` for ``alpha = 1``.
    """
    _check_k(k)
    _check_power("alpha", alpha)
    if alpha == 1:
        return 1.0
    if k == 1:
        return 2.0**alpha - 1.0
    return math.expm1(alpha * math.log1p(k)) / k**alpha


def check_lemma2(x: float, k: float, alpha: float, tol: float = TOL_INEQ) -> bool:
    if not (0 <= x <= k):
        raise ArgumentError(f"x must lie in [0, k] = [0, {k}], got {x!r}")
    f = lemma2_factor(k, alpha)
    return (1 + x) ** alpha >= 1 + f * x**alpha - tol


# -- per-state coherence data -----------------------------------------------


@dataclass(frozen=True)
class StateCoherences:
    """Plain (``beta = 1``) coherences of a register, computed once per state.

    ``tails[-1]`` and ``singles[-1]`` describe the same one-qubit marginal
    and are taken from the same reduced matrix, so they are bitwise equal.
    """

    full: float
    singles: tuple[float, ...]
    tails: tuple[float, ...]

    @property
    def n(self) -> int:
        return len(self.singles)

    @classmethod
    def from_state(cls, rho: QubitState, tol_phys: float = TOL_PHYS) -> "StateCoherences":
        rho.require_valid(tol_phys)
        n = rho.n_qubits
        m = rho.matrix
        singles = [offdiag_l1(reduce_matrix(m, [q])) for q in range(n)]
        tails = [offdiag_l1(reduce_matrix(m, range(i + 1, n))) for i in range(n - 2)]
        tails.append(singles[-1])
        return cls(offdiag_l1(m), tuple(singles), tuple(tails))

    def profile(self, beta: float = 1.0) -> "CoherenceProfile":
        _check_power("beta", beta)
        return CoherenceProfile(
            n=self.n,
            beta=beta,
            singles=tuple(s**beta for s in self.singles),
            tails=tuple(t**beta for t in self.tails),
        )


@dataclass(frozen=True)
class CoherenceProfile:
    n: int
    beta: float
    singles: tuple[float, ...]
    tails: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "singles", tuple(float(s) for s in self.singles))
        object.__setattr__(self, "tails", tuple(float(t) for t in self.tails))
        _check_power("beta", self.beta)
        if len(self.singles) != self.n or len(self.tails) != self.n - 1:
            raise ArgumentError(
                f"profile for n={self.n} needs {self.n} singles and {self.n - 1} tails, "
                f"got {len(self.singles)} and {len(self.tails)}"
            )
        if any(not v >= 0 for v in self.singles + self.tails):
            raise ArgumentError("profile entries must be non-negative")
        if self.beta == 1:
            for i, t in enumerate(self.tails):
                downstream = sum(self.singles[i + 1:])
                if t < downstream - TOL_INEQ:
                    raise ArgumentError(
                        f"tail {i + 1} coherence {t} is below the summed downstream "
                        f"single-qubit coherences {downstream}"
                    )

    def _check_m(self, m: int) -> None:
        if not (isinstance(m, (int, np.integer)) and 1 <= m <= self.n - 2):
            raise ArgumentError(f"m must be an integer in [1, {self.n - 2}], got {m!r}")


@dataclass(frozen=True)
class BoundParams:
    k: float
    m: int
    alpha: float
    beta: float = 1.0

    def __post_init__(self):
        _check_k(self.k)
        _check_power("alpha", self.alpha)
        _check_power("beta", self.beta)
        if not (isinstance(self.m, (int, np.integer)) and self.m >= 1):
            raise ArgumentError(f"m must be a positive integer, got {self.m!r}")


@dataclass(frozen=True)
class ConditionCheck:
    index: int  # 1-based position i of A_i
    side: str  # ">=" for i <= m, "<=" for i > m
    satisfied: bool


def conditions(
    profile: CoherenceProfile, k: float, m: int, tol: float = TOL_INEQ, form: str = "proof"
) -> tuple[bool, list[ConditionCheck]]:
    profile._check_m(m)
    _check_k(k)
    _check_form(form)
    checks = []
    for i in range(profile.n - 1):
        s, t = profile.singles[i], profile.tails[i]
        if i < m:
            checks.append(ConditionCheck(i + 1, ">=", s >= t / k - tol))
        else:
            cap = k * t if form == "proof" else t / k
            checks.append(ConditionCheck(i + 1, "<=", s <= cap + tol))
    return all(c.satisfied for c in checks), checks


def theorem_rhs(profile: CoherenceProfile, params: BoundParams) -> float:
    """Lower bound on ``C^(alpha*beta)`` of the whole register.

    ``sum_{i<=m} f^(i-1) s_i^a + f^(m+1) sum_{m<j<n} s_j^a + f^m s_n^a``
    with ``f = lemma2_factor(k, alpha)`` and ``s`` the ``beta``-profile.
    """
    profile._check_m(params.m)
    if profile.beta != params.beta:
        raise ArgumentError(f"profile built at beta={profile.beta}, params ask for beta={params.beta}")
    f = lemma2_factor(params.k, params.alpha)
    a, m, n = params.alpha, params.m, profile.n
    s = [x**a for x in profile.singles]
    total = sum(_scaled(f ** (i - 1), s[i - 1]) for i in range(1, m + 1))
    total += sum(_scaled(f ** (m + 1), s[j - 1]) for j in range(m + 1, n))
    total += _scaled(f**m, s[n - 1])
    return total


def plain_sum_rhs(profile: CoherenceProfile, alpha: float) -> float:
    _check_power("alpha", alpha)
    return sum(s**alpha for s in profile.singles)


def admissible_k(profile: CoherenceProfile, m: int, form: str = "proof") -> tuple[float, float] | None:
    """Interval ``(k_lo, k_hi)`` of k values meeting the ordering conditions at ``m``.

    Exact comparisons; ``None`` when no ``k`` in ``(0, 1]`` works. In the
    ``"proof"`` form every constraint is a lower bound, so ``k_hi`` is 1.
    """
    profile._check_m(m)
    _check_form(form)
    k_lo, k_hi = 0.0, 1.0
    for i in range(m):
        s, t = profile.singles[i], profile.tails[i]
        if s == 0:
            if t > 0:
                return None
        else:
            k_lo = max(k_lo, t / s)
    for j in range(m, profile.n - 1):
        s, t = profile.singles[j], profile.tails[j]
        if s == 0:
            continue
        if t == 0:
            return None
        if form == "proof":
            k_lo = max(k_lo, s / t)
        else:
            k_hi = min(k_hi, t / s)
    if k_lo > 1 or k_lo > k_hi:
        return None
    return k_lo, k_hi


def choose_k(profile: CoherenceProfile, m: int, form: str = "proof") -> float | None:
    """Smallest admissible k (largest bound), or ``k_hi`` when ``k_lo`` is 0."""
    interval = admissible_k(profile, m, form)
    if interval is None:
        return None
    k_lo, k_hi = interval
    if k_lo == 0:
        return k_hi
    k = k_lo
    # a ratio rounded down can miss its condition by an ulp; step up until it holds exactly
    for _ in range(16):
        if k >= k_hi or conditions(profile, k, m, tol=0.0, form=form)[0]:
            break
        k = float(np.nextafter(k, 2.0))
    return min(k, k_hi)


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    n: int
    alpha: float
    beta: float
    m: int | None
    k: float | None
    lhs: float
    rhs_theorem: float
    rhs_baseline_k1: float
    rhs_plain_sum: float
    conditions_met: bool
    per_condition: tuple[ConditionCheck, ...] = field(default=())
    form: str = "proof"

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs_theorem

    @property
    def params(self) -> BoundParams | None:
        if self.m is None:
            return None
        return BoundParams(k=self.k, m=self.m, alpha=self.alpha, beta=self.beta)

    def violated(self, tol: float = TOL_INEQ) -> bool:
        return self.conditions_met and self.lhs < self.rhs_theorem - tol

    def to_dict(self) -> dict:
        d = {col: getattr(self, col) for col in CSV_COLUMNS}
        d["per_condition"] = [asdict(c) for c in self.per_condition]
        d["form"] = self.form
        return d

    def csv_fields(self) -> list[str]:
        return [_fmt(getattr(self, col)) for col in CSV_COLUMNS]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def best_bound_from(
    coh: StateCoherences, alpha: float, beta: float, tol: float = TOL_INEQ, form: str = "proof"
) -> BoundReport:
    """Best admissible bound for precomputed coherences; see :func:`best_bound`."""
    _check_power("alpha", alpha)
    _check_power("beta", beta)
    n = coh.n
    if n < 3:
        raise ArgumentError(f"the bound needs at least 3 qubits, got {n}")
    profile = coh.profile(beta)
    lhs = coh.full ** (alpha * beta)
    plain = plain_sum_rhs(profile, alpha)

    best: tuple[float, int, float] | None = None
    baseline = None
    for m in range(1, n - 1):
        if conditions(profile, 1.0, m, tol, form)[0]:
            rhs1 = theorem_rhs(profile, BoundParams(1.0, m, alpha, beta))
            if baseline is None or rhs1 > baseline:
                baseline = rhs1
        k = choose_k(profile, m, form)
        if k is None:
            continue
        rhs = theorem_rhs(profile, BoundParams(k, m, alpha, beta))
        if best is None or rhs > best[0]:  # strict: ties keep the smaller m
            best = (rhs, m, k)

    if baseline is None:
        baseline = plain
    if best is None:
        return BoundReport(n, alpha, beta, None, None, lhs, plain, baseline, plain, False, form=form)
    rhs, m, k = best
    met, checks = conditions(profile, k, m, tol, form)
    return BoundReport(n, alpha, beta, m, k, lhs, rhs, baseline, plain, met, tuple(checks), form)


def best_bound(
    rho: QubitState, alpha: float, beta: float = 1.0, tol: float = TOL_INEQ, form: str = "proof"
) -> BoundReport:
    """Maximize the theorem bound over the split ``m`` and the ratio ``k``.

    For each ``m`` the smallest admissible ``k`` gives the largest factor.
    Without any admissible pair, ``rhs_theorem`` falls back to the plain sum
    and ``conditions_met`` is false.
    """
    return best_bound_from(StateCoherences.from_state(rho), alpha, beta, tol, form)


# -- bipartite lemma ----------------------------------------------------------


@dataclass(frozen=True)
class Lemma1Report:
    split_qubit: int
    beta: float
    lhs: float
    rhs: float
    holds: bool


def check_lemma1(rho: QubitState, split_qubit: int, beta: float = 1.0, tol: float = TOL_INEQ) -> Lemma1Report:
    """``C^beta(AB) >= C^beta(A) + C^beta(B)`` with ``A`` one qubit and ``B`` the rest."""
    _check_power("beta", beta)
    n = rho.n_qubits
    if n < 2 or not (isinstance(split_qubit, (int, np.integer)) and 0 <= split_qubit < n):
        raise ArgumentError(f"split qubit {split_qubit!r} invalid for {n} qubits")
    rho.require_valid()
    m = rho.matrix
    c_a = offdiag_l1(reduce_matrix(m, [split_qubit]))
    c_b = offdiag_l1(reduce_matrix(m, [q for q in range(n) if q != split_qubit]))
    lhs = offdiag_l1(m) ** beta
    rhs = c_a**beta + c_b**beta
    return Lemma1Report(int(split_qubit), beta, lhs, rhs, lhs >= rhs - tol)


# -- proof chain ------------------------------------------------------------


@dataclass(frozen=True)
class ChainStep:
    label: str
    lhs: float
    rhs: float
    passed: bool


def verify_proof_chain(
    state: QubitState | StateCoherences, params: BoundParams, tol: float = TOL_INEQ, form: str = "proof"
) -> list[ChainStep]:
    """Evaluate every intermediate inequality of the bound's derivation.

    The first block peels off ``A_1 .. A_m`` with the bipartite lemma and
    the scalar lemma at ``x = tail/single``; the second block bounds the
    remaining tail ``A_{m+1} .. A_n`` with ``x = single/tail``.  Each step
    is recorded in undivided form so zero coherences need no special case.
    Under ``form="stated"`` the second-block scalar steps can fail, which
    is how the weaker condition shows up.
    """
    coh = state if isinstance(state, StateCoherences) else StateCoherences.from_state(state)
    profile = coh.profile(params.beta)
    ok, checks = conditions(profile, params.k, params.m, tol, form)
    if not ok:
        bad = next(c for c in checks if not c.satisfied)
        rhs = "C(tail)/k" if bad.side == ">=" or form == "stated" else "k*C(tail)"
        raise ConditionError(
            bad.index, bad.side,
            f"condition C(A_{bad.index}) {bad.side} {rhs} fails at k={params.k}, m={params.m}",
        )
    a, m, n = params.alpha, params.m, profile.n
    f = lemma2_factor(params.k, a)
    s, t = profile.singles, profile.tails
    steps: list[ChainStep] = []

    def record(label: str, lhs: float, rhs: float) -> None:
        steps.append(ChainStep(label, lhs, rhs, lhs >= rhs - tol))

    full = coh.full ** (a * params.beta)
    record("superadditivity A_1 | tail_1", full, (s[0] + t[0]) ** a)

    prefix = 0.0
    for i in range(1, m + 1):
        c = f ** (i - 1)
        pair = (s[i - 1] + t[i - 1]) ** a
        record(
            f"lemma2 at A_{i}",
            prefix + _scaled(c, pair),
            prefix + _scaled(c, s[i - 1] ** a) + _scaled(c * f, t[i - 1] ** a),
        )
        prefix += _scaled(c, s[i - 1] ** a)
        if i < m:
            record(
                f"superadditivity A_{i + 1} | tail_{i + 1}",
                prefix + _scaled(f**i, t[i - 1] ** a),
                prefix + _scaled(f**i, (s[i] + t[i]) ** a),
            )

    # second block, on the scale of C^a(tail_m)
    acc = 0.0
    for j in range(m + 1, n):
        record(
            f"superadditivity A_{j} | tail_{j}",
            acc + t[j - 2] ** a,
            acc + (s[j - 1] + t[j - 1]) ** a,
        )
        record(
            f"lemma2 at A_{j}",
            acc + (s[j - 1] + t[j - 1]) ** a,
            acc + _scaled(f, s[j - 1] ** a) + t[j - 1] ** a,
        )
        acc += _scaled(f, s[j - 1] ** a)
    block = acc + s[n - 1] ** a

    rhs = theorem_rhs(profile, params)
    record("combine blocks", prefix + _scaled(f**m, t[m - 1] ** a), prefix + _scaled(f**m, block))
    record("theorem", full, rhs)
    return steps
