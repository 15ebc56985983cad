"""Finite-N verifier for the mixture approximation of prefix probabilities.

For a count law q and a prefix pattern (k, alpha) it computes

    lhs = sum_i P(prefix | count=i) q_i      (the exchangeable value)
    rhs = sum_i (i/N)^alpha (1-i/N)^(k-alpha) q_i   (the iid-kernel value)

splits both sums into lower tail (i <= M1), mid window (M1 < i <= M2) and
upper tail (i > M2), and assembles a sound bound for |lhs - rhs| from the
max ratio deviation in the mid window plus the four tail partial sums.
Everything is exact rationals for N <= 2000 (or on request) and log-space
float64 above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .model import (
    MixingMeasure,
    PrefixEvent,
    SampleMeanLaw,
    ValidationError,
    Value,
    sample_mean_law,
    _log_mean_law_array,
)
from .numerics import (
    LogFactorialTable,
    RegionBounds,
    conditional_prefix_prob,
    default_table,
    iid_kernel,
    region_bounds,
    replacement_correction,
    replacement_correction_float,
)

EXACT_BACKEND_MAX_N = 2000
# full scans above this size are strided by default
FULL_SCAN_MAX_N = 100_000
FLOAT_PATHOLOGICAL_TOL = 1e-15


def resolve_backend(backend: str, N: int) -> str:
    if backend not in ("exact", "log", "auto"):
        raise ValidationError(f"unknown backend {backend!r}")
    if backend == "auto":
        return "exact" if N <= EXACT_BACKEND_MAX_N else "log"
    return backend


# ---------------------------------------------------------------------------
# ratio scan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanRow:
    i: int
    a: Value          # log backend: natural log, -inf for exact zero
    b: Value
    ratio: Value | None
    region: str


@dataclass(frozen=True)
class RatioScan:
    N: int
    k: int
    alpha: int
    bounds: RegionBounds
    rows: tuple[ScanRow, ...]
    r: Value
    eps_mid: Value
    stride: int
    sampled: bool
    backend: str

    @property
    def log_columns(self) -> bool:
        return self.backend == "log"


def scan_indices(N: int, bounds: RegionBounds, stride: int) -> np.ndarray:
    """Strided index set over 0..N with the region edges always included."""
    idx = np.arange(0, N + 1, stride, dtype=np.int64)
    forced = np.array(
        [0, bounds.M1, bounds.M1 + 1, bounds.M2, min(bounds.M2 + 1, N), N],
        dtype=np.int64,
    )
    return np.unique(np.concatenate([idx, forced]))


def ratio_scan(
    N: int,
    k: int,
    alpha: int,
    stride: int = 1,
    backend: str = "auto",
    table: LogFactorialTable | None = None,
    m1: int | None = None,
) -> RatioScan:
    """Per-index scan of the two kernels and their ratio over 0..N.

    The ratio column is absent exactly where the iid kernel vanishes or
    where the count is too small to match the pattern (i < alpha); the max
    mid-window deviation eps_mid is taken over the present ratios.  Every
    present ratio is asserted to stay below the replacement correction
    (exactly in the exact backend, within float rounding in the log one).
    """
    if not (0 <= alpha <= k <= N):
        raise ValidationError(f"invalid (N, k, alpha) = ({N}, {k}, {alpha})")
    if k < 1:
        raise ValidationError("pattern length must be at least 1")
    if stride < 1:
        raise ValidationError("stride must be at least 1")
    bounds = region_bounds(N, m1=m1)
    backend = resolve_backend(backend, N)
    idx = scan_indices(N, bounds, stride)
    if backend == "exact":
        rows, eps_mid, r = _scan_exact(N, k, alpha, bounds, idx)
    else:
        rows, eps_mid, r = _scan_log(N, k, alpha, bounds, idx, table)
    return RatioScan(
        N=N,
        k=k,
        alpha=alpha,
        bounds=bounds,
        rows=tuple(rows),
        r=r,
        eps_mid=eps_mid,
        stride=stride,
        sampled=stride > 1,
        backend=backend,
    )


def _scan_exact(N, k, alpha, bounds, idx):
    r = replacement_correction(N, k)
    rows = []
    eps_mid = Fraction(0)
    for i in map(int, idx):
        a = conditional_prefix_prob(N, k, alpha, i)
        b = iid_kernel(N, k, alpha, i)
        region = bounds.region_of(i)
        ratio = None
        if b != 0 and not (a == 0 and i < alpha):
            ratio = a / b
            if ratio > r:
                raise AssertionError(
                    f"ratio bound violated at i={i}: {ratio} > {r}"
                )
            if region == "mid":
                eps_mid = max(eps_mid, abs(ratio - 1))
        rows.append(ScanRow(i=i, a=a, b=b, ratio=ratio, region=region))
    return rows, eps_mid, r


def _scan_log(N, k, alpha, bounds, idx, table):
    t = table or default_table()
    t.ensure(N)
    log_a, log_b = _kernels.scan_log_ab(t.delta, N, k, alpha, idx)
    r = replacement_correction_float(N, k)
    log_r = math.log(r)
    rows = []
    eps_mid = 0.0
    # float slack for the row-wise ratio bound; the bound is exact math,
    # only the evaluation rounds
    slack = 1e-9
    for t_pos, i in enumerate(map(int, idx)):
        la = float(log_a[t_pos])
        lb = float(log_b[t_pos])
        region = bounds.region_of(i)
        ratio = None
        if lb != _kernels.NEG_INF and not (la == _kernels.NEG_INF and i < alpha):
            if la == _kernels.NEG_INF:
                ratio = 0.0
            else:
                if la - lb > log_r + slack:
                    raise AssertionError(
                        f"ratio bound violated at i={i}: log ratio {la - lb} > log r {log_r}"
                    )
                ratio = math.exp(la - lb)
            if region == "mid":
                eps_mid = max(eps_mid, abs(ratio - 1.0))
        rows.append(ScanRow(i=i, a=la, b=lb, ratio=ratio, region=region))
    return rows, eps_mid, r


# ---------------------------------------------------------------------------
# sandwich bound
# ---------------------------------------------------------------------------

def sandwich_bound(
    terms_a: Sequence[Value], terms_b: Sequence[Value], eps: Value
) -> tuple[Value, Value]:
    """Certified two-sided bound (1-eps) sum(b) <= sum(a) <= (1+eps) sum(b).

    Checks the premises term by term: everything nonnegative, a_j = 0
    wherever b_j = 0, and |a_j/b_j - 1| <= eps elsewhere; raises on any
    violation, returns the (lower, upper) bound for sum(a).
    """
    if len(terms_a) != len(terms_b):
        raise ValidationError("term vectors must have equal length")
    if eps < 0:
        raise ValidationError("eps must be nonnegative")
    exact = all(
        isinstance(x, (Fraction, int)) for x in (*terms_a, *terms_b, eps)
    )
    # float inputs get an ulp-scale slack so representable-boundary cases
    # like |1.01/1.0 - 1| <= 0.01 certify; exact inputs are compared exactly
    slack = 0 if exact else eps * 1e-12 + 1e-15
    for j, (a, b) in enumerate(zip(terms_a, terms_b)):
        if a < 0 or b < 0:
            raise ValidationError(f"negative term at position {j}")
        if b == 0:
            if a != 0:
                raise ValidationError(
                    f"term {j}: a={a} nonzero where b=0, ratio unbounded"
                )
        elif abs(a / b - 1) > eps + slack:
            raise ValidationError(
                f"term {j}: ratio {a / b} deviates more than eps={eps}"
            )
    total_b = sum(terms_b)
    return (1 - eps) * total_b, (1 + eps) * total_b


# ---------------------------------------------------------------------------
# tail bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TailBounds:
    """Exact-arithmetic check of the two tail estimates.

    Lower tail (alpha >= 1): sum of kernels over i <= M1 against the chain
    middle M1^(1+alpha)/N^alpha and the cap N^(-(2*alpha-1)/3).
    Upper tail (alpha <= k-1): max kernel over i > M2 against N^(-(k-alpha)/2).
    Irrational caps are compared by integer cross powers, so `ok` flags are
    exact statements, not float comparisons.
    """

    N: int
    k: int
    alpha: int
    bounds: RegionBounds
    lower_applicable: bool
    lower_sum: Fraction | None
    lower_chain_mid: Fraction | None
    lower_cap: float | None
    lower_ok: bool | None
    upper_applicable: bool
    upper_max: Fraction | None
    upper_cap: float | None
    upper_ok: bool | None


def tail_bounds_check(N: int, k: int, alpha: int) -> TailBounds:
    """Verify both tail estimates exactly; inapplicable sides report None."""
    if not (0 <= alpha <= k <= N):
        raise ValidationError(f"invalid (N, k, alpha) = ({N}, {k}, {alpha})")
    if k < 1:
        raise ValidationError("pattern length must be at least 1")
    b = region_bounds(N)
    lower_applicable = alpha >= 1
    upper_applicable = alpha <= k - 1

    lower_sum = lower_chain_mid = lower_cap = lower_ok = None
    if lower_applicable:
        lower_sum = sum(
            (iid_kernel(N, k, alpha, i) for i in range(b.M1 + 1)), Fraction(0)
        )
        lower_chain_mid = Fraction(b.M1 ** (1 + alpha), N**alpha)
        lower_cap = float(N) ** (-(2 * alpha - 1) / 3)
        # sum <= N^(-(2a-1)/3)  <=>  sum^3 * N^(2a-1) <= 1, exactly
        chain_first = lower_sum <= lower_chain_mid
        chain_second = lower_chain_mid**3 * N ** (2 * alpha - 1) <= 1
        cap_ok = lower_sum**3 * N ** (2 * alpha - 1) <= 1
        lower_ok = bool(chain_first and cap_ok)
        if chain_first and chain_second and not cap_ok:
            raise AssertionError("inconsistent tail chain")  # unreachable
    upper_max = upper_cap = upper_ok = None
    if upper_applicable:
        upper_max = max(
            (iid_kernel(N, k, alpha, i) for i in range(b.M2 + 1, N + 1)),
            default=Fraction(0),
        )
        upper_cap = float(N) ** (-(k - alpha) / 2)
        # max <= N^(-(k-a)/2)  <=>  max^2 * N^(k-a) <= 1, exactly
        upper_ok = bool(upper_max**2 * N ** (k - alpha) <= 1)
    return TailBounds(
        N=N,
        k=k,
        alpha=alpha,
        bounds=b,
        lower_applicable=lower_applicable,
        lower_sum=lower_sum,
        lower_chain_mid=lower_chain_mid,
        lower_cap=lower_cap,
        lower_ok=lower_ok,
        upper_applicable=upper_applicable,
        upper_max=upper_max,
        upper_cap=upper_cap,
        upper_ok=upper_ok,
    )


# ---------------------------------------------------------------------------
# full verification report
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VerificationReport:
    N: int
    k: int
    alpha: int
    M1: int
    M2: int
    backend: str
    lhs: Value
    rhs: Value
    abs_diff: Value
    lhs_lower: Value
    lhs_mid: Value
    lhs_upper: Value
    rhs_lower: Value
    rhs_mid: Value
    rhs_upper: Value
    eps_mid: Value
    eps_mid_sampled: bool
    sandwich_bound: Value
    lower_tail_bound: float | None   # N^(-(2*alpha-1)/3), alpha >= 1
    upper_tail_bound: float | None   # N^(-(k-alpha)/2), alpha <= k-1
    pathological: bool
    pathological_label: str | None
    rhs_below_alpha: Value
    rhs_above_support: Value


def verify_approximation(
    source: MixingMeasure | SampleMeanLaw,
    e: PrefixEvent,
    N: int | None = None,
    backend: str = "auto",
    stride: int | None = None,
    table: LogFactorialTable | None = None,
) -> VerificationReport:
    """Compute both sides of the approximation and a sound error budget.

    ``source`` is either a mixing measure (then ``N`` is required) or a
    ready count law.  The mid-window deviation eps_mid here includes rows
    where the conditional probability is exactly zero (deviation 1), so the
    reported bound

        eps_mid * rhs_mid + lhs_lower + rhs_lower + lhs_upper + rhs_upper

    dominates |lhs - rhs| by the triangle inequality whenever eps_mid is
    computed without striding.  In the exact backend every report field is
    a Fraction and the domination is an identity, not a float statement.
    """
    if isinstance(source, MixingMeasure):
        if N is None:
            raise ValidationError("N is required when verifying from a measure")
        law_n = int(N)
    else:
        law_n = source.N
        if N is not None and int(N) != law_n:
            raise ValidationError(f"law has N={law_n}, got N={N}")
    k, alpha = e.k, e.alpha
    if k > law_n:
        raise ValidationError(f"pattern length {k} exceeds N={law_n}")
    bounds = region_bounds(law_n)
    if backend == "auto" and not source.is_exact:
        backend = "log"       # float data cannot run the exact pipeline
    backend = resolve_backend(backend, law_n)
    if backend == "exact":
        if not source.is_exact:
            raise ValidationError(
                "exact backend requires rational input data (num/den strings)"
            )
        return _verify_exact(source, e, law_n, bounds)
    if stride is None:
        stride = 1 if law_n <= FULL_SCAN_MAX_N else 97
    return _verify_log(source, e, law_n, bounds, stride, table)


def _verify_exact(source, e, N, bounds) -> VerificationReport:
    law = sample_mean_law(source, N) if isinstance(source, MixingMeasure) else source
    if law.class_numerators() is not None:
        fields = _exact_fields_integer(law, e, N, bounds)
    else:
        fields = _exact_fields_fractions(law, e, N, bounds)
    (
        parts,
        eps_mid,
        rhs_below_alpha,
        rhs_above_support,
    ) = fields
    k, alpha = e.k, e.alpha
    lhs = parts[("a", "lower")] + parts[("a", "mid")] + parts[("a", "upper")]
    rhs = parts[("b", "lower")] + parts[("b", "mid")] + parts[("b", "upper")]
    abs_diff = abs(lhs - rhs)
    budget = (
        eps_mid * parts[("b", "mid")]
        + parts[("a", "lower")]
        + parts[("b", "lower")]
        + parts[("a", "upper")]
        + parts[("b", "upper")]
    )
    pathological = lhs == 0
    if pathological and rhs != rhs_below_alpha + rhs_above_support:
        # impossible for nonnegative weights: lhs = 0 forces q_i = 0 at
        # every index with a positive conditional probability
        raise AssertionError("pathological run with interior kernel mass")
    return VerificationReport(
        N=N,
        k=k,
        alpha=alpha,
        M1=bounds.M1,
        M2=bounds.M2,
        backend="exact",
        lhs=lhs,
        rhs=rhs,
        abs_diff=abs_diff,
        lhs_lower=parts[("a", "lower")],
        lhs_mid=parts[("a", "mid")],
        lhs_upper=parts[("a", "upper")],
        rhs_lower=parts[("b", "lower")],
        rhs_mid=parts[("b", "mid")],
        rhs_upper=parts[("b", "upper")],
        eps_mid=eps_mid,
        eps_mid_sampled=False,
        sandwich_bound=budget,
        lower_tail_bound=_lower_tail_bound(N, alpha),
        upper_tail_bound=_upper_tail_bound(N, k, alpha),
        pathological=pathological,
        pathological_label="exact zero" if pathological else None,
        rhs_below_alpha=rhs_below_alpha,
        rhs_above_support=rhs_above_support,
    )


def _exact_fields_fractions(law, e, N, bounds):
    """Reference exact accumulation, Fraction per term (small N only)."""
    k, alpha = e.k, e.alpha
    q = law.weights
    zero = Fraction(0)
    parts = {("a", r): zero for r in ("lower", "mid", "upper")}
    parts.update({("b", r): zero for r in ("lower", "mid", "upper")})
    rhs_below_alpha = zero
    rhs_above_support = zero
    eps_mid = zero
    for i in range(N + 1):
        qi = q[i]
        region = bounds.region_of(i)
        b = iid_kernel(N, k, alpha, i)
        a = conditional_prefix_prob(N, k, alpha, i)
        if region == "mid" and b != 0:
            eps_mid = max(eps_mid, abs(a / b - 1))
        if qi == 0:
            continue
        parts[("a", region)] += a * qi
        parts[("b", region)] += b * qi
        if i < alpha:
            rhs_below_alpha += b * qi
        if i - alpha > N - k:
            rhs_above_support += b * qi
    return parts, eps_mid, rhs_below_alpha, rhs_above_support


def _exact_fields_integer(law, e, N, bounds):
    """Integer accumulation over the law's common denominator.

    The left sums telescope to C(N-k, i-alpha) * m_i / D where m_i is the
    per-count-class word weight; the right sums live over D * N^k.  The
    exact mid-window deviation is found by a float prescan (error <= ~1e-9)
    that nominates candidate indices, whose deviations are then compared
    exactly; a final exact inequality check on the mid sums guards the
    prescan, falling back to a full exact scan if it ever misses.
    """
    k, alpha = e.k, e.alpha
    class_nums, den = law.class_numerators()
    nums, _ = law.integer_form()
    m1, m2 = bounds.M1, bounds.M2
    n_pow_k = N**k
    hi = N - k + alpha  # conditional prefix probability vanishes above

    candidates = _eps_candidates(N, k, alpha, bounds)

    lhs_num = [0, 0, 0]   # lower, mid, upper over denominator den
    rhs_num = [0, 0, 0]   # over denominator den * N^k
    below_num = 0
    above_num = 0
    eps_num, eps_den = 0, 1   # running max deviation |u - v| / v
    choose_a = 1              # C(N-k, i-alpha), valid on [alpha, hi]
    choose_full = 1           # C(N, i)
    for i in range(N + 1):
        reg = 0 if i <= m1 else (1 if i <= m2 else 2)
        b_factor = i**alpha * (N - i) ** (k - alpha)
        rhs_term = b_factor * nums[i]
        rhs_num[reg] += rhs_term
        if i < alpha:
            below_num += rhs_term
        elif i > hi:
            above_num += rhs_term
        in_support = alpha <= i <= hi
        if in_support:
            lhs_num[reg] += choose_a * class_nums[i]
        if i in candidates and b_factor != 0:
            u = (choose_a if in_support else 0) * n_pow_k
            v = choose_full * b_factor
            d_num = abs(u - v)
            if d_num * eps_den > eps_num * v:
                eps_num, eps_den = d_num, v
        if in_support and i < hi:
            j = i - alpha
            choose_a = choose_a * (N - k - j) // (j + 1)
        choose_full = choose_full * (N - i) // (i + 1)
    # guard: the nominated eps must dominate the mid window, provable from
    # the sums alone; rescan exactly if the float prescan missed the peak
    if abs(lhs_num[1] * n_pow_k - rhs_num[1]) * eps_den > eps_num * rhs_num[1]:
        eps_num, eps_den = _eps_full_rescan(N, k, alpha, bounds)
    parts = {
        ("a", "lower"): Fraction(lhs_num[0], den),
        ("a", "mid"): Fraction(lhs_num[1], den),
        ("a", "upper"): Fraction(lhs_num[2], den),
        ("b", "lower"): Fraction(rhs_num[0], den * n_pow_k),
        ("b", "mid"): Fraction(rhs_num[1], den * n_pow_k),
        ("b", "upper"): Fraction(rhs_num[2], den * n_pow_k),
    }
    return (
        parts,
        Fraction(eps_num, eps_den),
        Fraction(below_num, den * n_pow_k),
        Fraction(above_num, den * n_pow_k),
    )


def _eps_candidates(N, k, alpha, bounds) -> set[int]:
    """Mid-window indices that may attain the max ratio deviation.

    Nominated from a float scan with a slack far above its ~1e-9 error;
    the window edges are always included.
    """
    t = default_table()
    t.ensure(N)
    mid_idx = np.arange(bounds.M1 + 1, bounds.M2 + 1, dtype=np.int64)
    log_a, log_b = _kernels.scan_log_ab(t.delta, N, k, alpha, mid_idx)
    dev = np.abs(np.expm1(log_a - log_b))
    cut = dev.max() * (1.0 - 1e-6) - 1e-7
    chosen = mid_idx[dev >= cut]
    out = set(map(int, chosen))
    out.update((bounds.M1 + 1, bounds.M2))
    return out


def _eps_full_rescan(N, k, alpha, bounds) -> tuple[int, int]:
    n_pow_k = N**k
    hi = N - k + alpha
    eps_num, eps_den = 0, 1
    start = bounds.M1 + 1
    choose_a = math.comb(N - k, start - alpha) if start >= alpha else 1
    choose_full = math.comb(N, start)
    for i in range(start, bounds.M2 + 1):
        b_factor = i**alpha * (N - i) ** (k - alpha)
        u = (choose_a if alpha <= i <= hi else 0) * n_pow_k
        v = choose_full * b_factor
        d_num = abs(u - v)
        if d_num * eps_den > eps_num * v:
            eps_num, eps_den = d_num, v
        if alpha <= i < hi:
            j = i - alpha
            choose_a = choose_a * (N - k - j) // (j + 1)
        choose_full = choose_full * (N - i) // (i + 1)
    return eps_num, eps_den


def _verify_log(source, e, N, bounds, stride, table) -> VerificationReport:
    k, alpha = e.k, e.alpha
    t = table or default_table()
    t.ensure(N)
    if isinstance(source, MixingMeasure):
        log_q = _log_mean_law_array(source, N, t)
    else:
        weights = np.array([float(x) for x in source.weights], dtype=np.float64)
        with np.errstate(divide="ignore"):
            log_q = np.log(weights)
    idx = np.arange(N + 1, dtype=np.int64)
    log_a, log_b = _kernels.scan_log_ab(t.delta, N, k, alpha, idx)
    sums = _kernels.pair_region_sums(log_a, log_b, log_q, idx, bounds.M1, bounds.M2)
    lhs_lower, lhs_mid, lhs_upper, rhs_lower, rhs_mid, rhs_upper = map(float, sums)
    lhs = math.fsum((lhs_lower, lhs_mid, lhs_upper))
    rhs = math.fsum((rhs_lower, rhs_mid, rhs_upper))
    sampled = stride > 1
    if sampled:
        mid_idx = scan_indices(N, bounds, stride)
        mid_idx = mid_idx[(mid_idx > bounds.M1) & (mid_idx <= bounds.M2)]
        la_m, lb_m = _kernels.scan_log_ab(t.delta, N, k, alpha, mid_idx)
        eps_mid = float(
            _kernels.max_ratio_dev(la_m, lb_m, np.ones(mid_idx.shape, dtype=np.bool_))
        )
    else:
        mid_mask = (idx > bounds.M1) & (idx <= bounds.M2)
        eps_mid = float(_kernels.max_ratio_dev(log_a, log_b, mid_mask))
    below = idx < alpha
    rhs_below_alpha = math.fsum(np.exp(log_b[below] + log_q[below])) if alpha > 0 else 0.0
    above = idx - alpha > N - k
    rhs_above_support = (
        math.fsum(np.exp(log_b[above] + log_q[above])) if np.any(above) else 0.0
    )
    pathological = lhs < FLOAT_PATHOLOGICAL_TOL
    budget = eps_mid * rhs_mid + lhs_lower + rhs_lower + lhs_upper + rhs_upper
    return VerificationReport(
        N=N,
        k=k,
        alpha=alpha,
        M1=bounds.M1,
        M2=bounds.M2,
        backend="log",
        lhs=lhs,
        rhs=rhs,
        abs_diff=abs(lhs - rhs),
        lhs_lower=lhs_lower,
        lhs_mid=lhs_mid,
        lhs_upper=lhs_upper,
        rhs_lower=rhs_lower,
        rhs_mid=rhs_mid,
        rhs_upper=rhs_upper,
        eps_mid=eps_mid,
        eps_mid_sampled=sampled,
        sandwich_bound=budget,
        lower_tail_bound=_lower_tail_bound(N, alpha),
        upper_tail_bound=_upper_tail_bound(N, k, alpha),
        pathological=pathological,
        pathological_label="numerically pathological" if pathological else None,
        rhs_below_alpha=rhs_below_alpha,
        rhs_above_support=rhs_above_support,
    )


def _lower_tail_bound(N: int, alpha: int) -> float | None:
    return float(N) ** (-(2 * alpha - 1) / 3) if alpha >= 1 else None


def _upper_tail_bound(N: int, k: int, alpha: int) -> float | None:
    return float(N) ** (-(k - alpha) / 2) if alpha <= k - 1 else None
