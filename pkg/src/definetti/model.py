"""Mixing measures, prefix events, count laws, and moment sequences.

All types are immutable and every operation is a pure function, so any of
them can be shared across threads.  Arithmetic follows the inputs: rational
atoms/weights (Fraction or int) run exactly end to end, floats run in
double precision with compensated summation where cancellation bites.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

import numpy as np

from . import _kernels
from .numerics import (
    LogFactorialTable,
    binomial,
    conditional_prefix_prob,
    default_table,
)

Value = Union[Fraction, int, float]

FLOAT_SUM_TOL = 1e-12
# float results whose estimated rounding error exceeds this relative level
# get the cancellation flag
CANCELLATION_TOL = 1e-6


class ValidationError(ValueError):
    """An input object violates one of its stated invariants."""


class ExtendabilityError(Exception):
    """A moment vector admits no exchangeable law at the requested level.

    Carries the offending negative weight as the certificate.
    """

    def __init__(self, level: int, index: int, value: Value):
        self.level = level
        self.index = index
        self.value = value
        super().__init__(
            f"moment vector is not extendable to level {level}: "
            f"weight q_{index} = {value} < 0"
        )


def is_exact(values: Sequence[Value]) -> bool:
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in values)


def _as_exact(v: Value) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


# ---------------------------------------------------------------------------
# domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PrefixEvent:
    """A fixed 0/1 outcome pattern for the first k coordinates."""

    pattern: tuple[int, ...]

    def __post_init__(self):
        if len(self.pattern) < 1:
            raise ValidationError("pattern must have length at least 1")
        if any(e not in (0, 1) for e in self.pattern):
            raise ValidationError(f"pattern entries must be 0 or 1: {self.pattern}")

    @property
    def k(self) -> int:
        return len(self.pattern)

    @property
    def alpha(self) -> int:
        return sum(self.pattern)

    @classmethod
    def from_string(cls, text: str) -> "PrefixEvent":
        try:
            bits = tuple(int(tok) for tok in text.split(","))
        except ValueError as exc:
            raise ValidationError(f"malformed pattern {text!r}") from exc
        return cls(bits)


@dataclass(frozen=True)
class MixingMeasure:
    """Discrete probability measure on [0, 1]: (location, weight) atoms.

    Locations are strictly increasing; weights are positive and sum to one
    (exactly for rational input, within 1e-12 for floats).
    """

    atoms: tuple[tuple[Value, Value], ...]

    def __post_init__(self):
        if not self.atoms:
            raise ValidationError("measure needs at least one atom")
        prev = None
        for p, w in self.atoms:
            if not 0 <= p <= 1:
                raise ValidationError(f"atom location {p} outside [0, 1]")
            if w <= 0:
                raise ValidationError(f"atom weight {w} is not positive")
            if prev is not None and not p > prev:
                raise ValidationError("atom locations must be strictly increasing")
            prev = p
        total = sum(w for _, w in self.atoms)
        if self.is_exact:
            if total != 1:
                raise ValidationError(f"weights sum to {total}, expected 1")
        elif abs(total - 1) > FLOAT_SUM_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within 1e-12")

    @property
    def is_exact(self) -> bool:
        return is_exact([x for pair in self.atoms for x in pair])

    @classmethod
    def from_pairs(cls, pairs: Sequence[tuple[Value, Value]]) -> "MixingMeasure":
        """Build from unordered pairs, merging duplicate locations."""
        merged: dict[Value, Value] = {}
        for p, w in pairs:
            merged[p] = merged.get(p, 0) + w
        return cls(tuple(sorted(merged.items(), key=lambda pw: pw[0])))

    @classmethod
    def point_mass(cls, p: Value) -> "MixingMeasure":
        one = Fraction(1) if isinstance(p, (Fraction, int)) else 1.0
        return cls(((p, one),))


class SampleMeanLaw:
    """Distribution of the sample mean over {0, 1/N, ..., 1} as weights q_0..q_N.

    Exact laws built by this package carry their weights internally as
    integer numerators over one common denominator; the public ``weights``
    tuple of Fractions materializes lazily.  This keeps N ~ 1e4 exact
    pipelines free of per-entry gcd reductions, which would otherwise
    dominate the runtime.  ``class_numerators`` additionally holds the
    per-count-class word weight (q_i / C(N, i)) when the law came from a
    mixture, which is what the verifier's left-hand sums want.
    """

    __slots__ = (
        "N",
        "cancellation_flagged",
        "_weights",
        "_nums",
        "_den",
        "_class_nums",
    )

    def __init__(
        self,
        N: int,
        weights: Sequence[Value] | None = None,
        cancellation_flagged: bool = False,
    ):
        if N < 1:
            raise ValidationError("N must be positive")
        self.N = N
        self.cancellation_flagged = cancellation_flagged
        self._nums = None
        self._den = None
        self._class_nums = None
        if weights is None:
            self._weights = None
            return
        weights = tuple(weights)
        if len(weights) != N + 1:
            raise ValidationError(
                f"expected {N + 1} weights for N={N}, got {len(weights)}"
            )
        for i, q in enumerate(weights):
            if q < 0:
                raise ValidationError(f"weight q_{i} = {q} is negative")
        total = sum(weights)
        if is_exact(weights):
            if total != 1:
                raise ValidationError(f"weights sum to {total}, expected 1")
        elif abs(total - 1) > FLOAT_SUM_TOL:
            raise ValidationError(f"weights sum to {total!r}, expected 1 within 1e-12")
        self._weights = weights

    @classmethod
    def from_integer_ratios(
        cls,
        nums: Sequence[int],
        den: int,
        class_nums: Sequence[int] | None = None,
        cancellation_flagged: bool = False,
    ) -> "SampleMeanLaw":
        """Exact law q_i = nums[i] / den, validated without any reduction."""
        if den <= 0:
            raise ValidationError("denominator must be positive")
        if len(nums) < 2:
            raise ValidationError("count law needs at least two entries (N >= 1)")
        for i, v in enumerate(nums):
            if v < 0:
                raise ValidationError(f"weight q_{i} = {Fraction(v, den)} is negative")
        if sum(nums) != den:
            raise ValidationError(
                f"weights sum to {Fraction(sum(nums), den)}, expected 1"
            )
        law = cls(N=len(nums) - 1, cancellation_flagged=cancellation_flagged)
        law._nums = tuple(nums)
        law._den = den
        law._class_nums = tuple(class_nums) if class_nums is not None else None
        return law

    @property
    def weights(self) -> tuple[Value, ...]:
        if self._weights is None:
            self._weights = tuple(Fraction(v, self._den) for v in self._nums)
        return self._weights

    @property
    def is_exact(self) -> bool:
        return self._nums is not None or is_exact(self.weights)

    def integer_form(self) -> tuple[tuple[int, ...], int] | None:
        """(numerators, denominator) when the law carries them, else None."""
        if self._nums is None:
            return None
        return self._nums, self._den

    def class_numerators(self) -> tuple[tuple[int, ...], int] | None:
        """(per-count-class word weights, denominator) for mixture-built laws."""
        if self._class_nums is None:
            return None
        return self._class_nums, self._den

    def __eq__(self, other) -> bool:
        if not isinstance(other, SampleMeanLaw):
            return NotImplemented
        return self.N == other.N and self.weights == other.weights

    def __repr__(self) -> str:
        kind = "exact" if self.is_exact else "float"
        return f"SampleMeanLaw(N={self.N}, {kind})"


@dataclass(frozen=True)
class MomentVector:
    """Prefix probabilities c_j = P(first j coordinates all one), c_0 = 1.

    Construction enforces only the necessary monotonicity
    1 >= c_1 >= ... >= c_n >= 0; full realizability is the job of
    check_complete_monotonicity.
    """

    c: tuple[Value, ...]

    def __post_init__(self):
        if not self.c:
            raise ValidationError("moment vector must not be empty")
        c0 = self.c[0]
        if is_exact([c0]):
            if c0 != 1:
                raise ValidationError(f"c_0 = {c0}, expected exactly 1")
        elif abs(c0 - 1) > FLOAT_SUM_TOL:
            raise ValidationError(f"c_0 = {c0!r}, expected 1 within 1e-12")
        tol = 0 if self.is_exact else FLOAT_SUM_TOL
        for j in range(len(self.c) - 1):
            if self.c[j + 1] - self.c[j] > tol:
                raise ValidationError(
                    f"moments must be nonincreasing: c_{j} = {self.c[j]} < c_{j + 1} = {self.c[j + 1]}"
                )
        if self.c[-1] < -tol:
            raise ValidationError(f"moments must be nonnegative: c_{len(self.c) - 1} = {self.c[-1]}")

    @property
    def is_exact(self) -> bool:
        return is_exact(self.c)

    @property
    def order(self) -> int:
        return len(self.c) - 1


@dataclass(frozen=True)
class MonotonicityCheck:
    """Outcome of the alternating-difference test on a moment vector."""

    ok: bool
    order: int | None = None
    index: int | None = None
    value: Value | None = None


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def mixture_prefix_prob(mu: MixingMeasure, e: PrefixEvent) -> Value:
    """P(prefix pattern) under the mixture of iid coin flips drawn from mu."""
    k, alpha = e.k, e.alpha
    return sum(w * p**alpha * (1 - p) ** (k - alpha) for p, w in mu.atoms)


def mixture_class_numerators(mu: MixingMeasure, N: int) -> tuple[list[int], int]:
    """Integer numerators m_0..m_N over one denominator D with
    m_i / D = sum_w w p^i (1-p)^(N-i), the common weight of every length-N
    word with i ones.  Built by multiplicative recurrences: no reductions,
    no per-entry gcds."""
    atom_dens = []
    for p, w in mu.atoms:
        p, w = _as_exact(p), _as_exact(w)
        atom_dens.append(w.denominator * p.denominator**N)
    den = atom_dens[0]
    for d in atom_dens[1:]:
        den = den * d // math.gcd(den, d)
    nums = [0] * (N + 1)
    for (p, w), d in zip(mu.atoms, atom_dens):
        p, w = _as_exact(p), _as_exact(w)
        scale = w.numerator * (den // d)
        pn, pd = p.numerator, p.denominator
        qn = pd - pn
        if pn == 0:
            nums[0] += scale * pd**N
        elif qn == 0:
            nums[N] += scale * pd**N
        else:
            t = scale * qn**N
            nums[0] += t
            for i in range(1, N + 1):
                t = t // qn * pn
                nums[i] += t
    return nums, den


def sample_mean_law(
    mu: MixingMeasure, N: int, table: LogFactorialTable | None = None
) -> SampleMeanLaw:
    """Law of the sample mean of N coordinates under the mixture; exact for
    rational atoms, log-space double precision otherwise."""
    if N < 1:
        raise ValidationError("N must be positive")
    if mu.is_exact:
        class_nums, den = mixture_class_numerators(mu, N)
        nums = []
        choose = 1
        for i in range(N + 1):
            nums.append(choose * class_nums[i])
            choose = choose * (N - i) // (i + 1)
        return SampleMeanLaw.from_integer_ratios(nums, den, class_nums=class_nums)
    lq = _log_mean_law_array(mu, N, table)
    return SampleMeanLaw(N=N, weights=tuple(float(x) for x in np.exp(lq)))


def _log_mean_law_array(
    mu: MixingMeasure, N: int, table: LogFactorialTable | None = None
) -> np.ndarray:
    t = table or default_table()
    t.ensure(N)
    ps = np.array([float(p) for p, _ in mu.atoms], dtype=np.float64)
    log_ws = np.log(np.array([float(w) for _, w in mu.atoms], dtype=np.float64))
    return _kernels.log_mean_law(t.delta, N, ps, log_ws)


def prefix_prob_from_mean_law(
    law: SampleMeanLaw, e: PrefixEvent, table: LogFactorialTable | None = None
) -> Value:
    """P(prefix pattern) implied by a count law via the exchangeable
    conditional weights: sum_i P(prefix | count=i) q_i."""
    N, k, alpha = law.N, e.k, e.alpha
    if k > N:
        raise ValidationError(f"pattern length {k} exceeds N={N}")
    if law.is_exact:
        cls = law.class_numerators()
        if cls is not None:
            # P(prefix | count=i) q_i telescopes to C(N-k, i-alpha) m_i / D
            class_nums, den = cls
            acc = 0
            choose = 1  # C(N-k, i-alpha) along i = alpha .. N-k+alpha
            for j, i in enumerate(range(alpha, N - k + alpha + 1)):
                acc += choose * class_nums[i]
                choose = choose * (N - k - j) // (j + 1)
            return Fraction(acc, den)
        return sum(
            conditional_prefix_prob(N, k, alpha, i) * q
            for i, q in enumerate(law.weights)
            if q != 0
        )
    t = table or default_table()
    t.ensure(N)
    idx = np.arange(N + 1, dtype=np.int64)
    log_a, _ = _kernels.scan_log_ab(t.delta, N, k, alpha, idx)
    q = np.array([float(x) for x in law.weights], dtype=np.float64)
    return math.fsum(np.exp(log_a) * q)


def moments_from_measure(mu: MixingMeasure, n: int) -> MomentVector:
    """Raw moments c_j = E[p^j], j = 0..n."""
    if n < 0:
        raise ValidationError("moment order must be nonnegative")
    zero = Fraction(0) if mu.is_exact else 0.0
    c = []
    for j in range(n + 1):
        c.append(sum((w * p**j for p, w in mu.atoms), zero))
    return MomentVector(tuple(c))


def prefix_prob_from_moments(c: MomentVector, e: PrefixEvent) -> Value:
    """P(prefix pattern) from the moment sequence by inclusion-exclusion:
    sum_t (-1)^t C(k-alpha, t) c_{alpha+t}."""
    k, alpha = e.k, e.alpha
    if k > c.order:
        raise ValidationError(
            f"pattern length {k} needs moments up to order {k}, have {c.order}"
        )
    terms = [
        (-1) ** t * binomial(k - alpha, t) * c.c[alpha + t] for t in range(k - alpha + 1)
    ]
    if c.is_exact:
        return sum(terms, Fraction(0))
    return math.fsum(terms)


def mean_law_from_moments(c: MomentVector, n: int) -> SampleMeanLaw:
    """The unique level-n exchangeable count law with the given moments:
    q_j = C(n, j) sum_t (-1)^t C(n-j, t) c_{j+t}.

    Raises ExtendabilityError carrying the first negative weight when the
    vector admits no such law.  The alternating sum is evaluated exactly for
    rational input; the float path uses exactly-rounded summation and flags
    the law when cancellation may exceed 1e-6 relative.
    """
    if n < 1:
        raise ValidationError("level must be positive")
    if c.order < n:
        raise ValidationError(f"need moments up to order {n}, have {c.order}")
    exact = c.is_exact
    weights: list[Value] = []
    flagged = False
    for j in range(n + 1):
        terms = [
            (-1) ** t * binomial(n - j, t) * c.c[j + t] for t in range(n - j + 1)
        ]
        if exact:
            q = binomial(n, j) * sum(terms, Fraction(0))
            if q < 0:
                raise ExtendabilityError(level=n, index=j, value=q)
        else:
            inner = math.fsum(terms)
            gross = math.fsum(abs(t) for t in terms)
            q = binomial(n, j) * inner
            if gross > 0 and abs(inner) < CANCELLATION_TOL * gross:
                flagged = True
            if q < -FLOAT_SUM_TOL:
                raise ExtendabilityError(level=n, index=j, value=q)
            q = max(q, 0.0)
        weights.append(q)
    if not exact:
        total = math.fsum(weights)
        if abs(total - 1) > FLOAT_SUM_TOL:
            raise ExtendabilityError(level=n, index=0, value=total - 1)
    return SampleMeanLaw(N=n, weights=tuple(weights), cancellation_flagged=flagged)


def check_complete_monotonicity(c: MomentVector) -> MonotonicityCheck:
    """Alternating finite differences (-1)^m Delta^m c_j >= 0 for m + j <= n.

    Scans depth by depth and reports the first negative difference as the
    certificate; floats get a 1e-12 slack.
    """
    tol = 0 if c.is_exact else FLOAT_SUM_TOL
    row = list(c.c)
    n = c.order
    for m in range(1, n + 1):
        row = [row[j] - row[j + 1] for j in range(len(row) - 1)]
        for j, v in enumerate(row):
            if v < -tol:
                return MonotonicityCheck(ok=False, order=m, index=j, value=v)
    return MonotonicityCheck(ok=True)


def exchangeable_law_from_counts(q: Sequence[Value]) -> SampleMeanLaw:
    """Wrap a simplex vector over 0..N as the count law of an exchangeable
    word law (uniform arrangement within each count class)."""
    if len(q) < 2:
        raise ValidationError("count law needs at least two entries (N >= 1)")
    return SampleMeanLaw(N=len(q) - 1, weights=tuple(q))


def support_consistency_check(law: SampleMeanLaw, e: PrefixEvent) -> int | None:
    """If the prefix probability vanishes, every count i >= alpha must carry
    zero mass; returns the first offending index, or None when consistent.

    Vacuously passes when the prefix probability is nonzero.  Counts above
    N - k + alpha have vanishing conditional probability, so for laws
    supported there this check can flag exchangeable-consistent input; it
    implements the stated implication verbatim as a diagnostic.
    """
    p = prefix_prob_from_mean_law(law, e)
    zero = p == 0 if law.is_exact else abs(p) < 1e-15
    if not zero:
        return None
    for i in range(e.alpha, law.N + 1):
        if law.weights[i] > 0:
            return i
    return None
