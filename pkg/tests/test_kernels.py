import math
import os
import subprocess
import sys

import numpy as np
import pytest

from definetti import _kernels as K
from definetti.numerics import LogFactorialTable


def test_backend_selection_reflects_environment():
    assert K.KERNEL_BACKEND in ("numba", "numpy")
    if K.USE_NUMBA:
        assert K.scan_log_ab is K.scan_log_ab_nb
    else:
        assert K.scan_log_ab is K.scan_log_ab_np


def test_env_flag_forces_numpy_path():
    code = (
        "from definetti import _kernels as K; "
        "print(K.KERNEL_BACKEND); print(K.scan_log_ab is K.scan_log_ab_np)"
    )
    env = dict(os.environ, DEFINETTI_NUMBA="0")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.stdout.split() == ["numpy", "True"]


def test_table_cap_env_override():
    code = (
        "from definetti.numerics import default_table; "
        "print(default_table().cap)"
    )
    env = dict(os.environ, DEFINETTI_TABLE_CAP="55555")
    out = subprocess.run(
        [sys.executable, "-c", code], env=env, capture_output=True, text=True
    )
    assert out.stdout.strip() == "55555"


def test_residual_table_extension_matches_rebuild():
    base = K.build_residual_table(500)
    grown = K.extend_residual_table(K.build_residual_table(100), 500)
    assert np.allclose(base, grown, rtol=0, atol=1e-15)
    assert np.array_equal(base[:101], K.build_residual_table(100))


def test_residual_series_agrees_with_table():
    delta = K.build_residual_table(5000)
    for x in (1500, 3000, 5000):
        assert abs(K.residual_series(x) - delta[x]) < 1e-13


def test_scalar_log_binomial_vs_exact():
    delta = K.build_residual_table(2048)
    worst = 0.0
    for n in (2, 17, 300, 1999):
        for r in range(n + 1):
            got = K.log_binomial_scalar(delta, n, r)
            worst = max(worst, abs(math.expm1(got - math.log(math.comb(n, r)))))
    assert worst < 1e-12


def _random_inputs(seed, N=4000, k=4, alpha=2):
    rng = np.random.default_rng(seed)
    table = LogFactorialTable()
    table.ensure(N)
    idx = np.arange(N + 1, dtype=np.int64)
    log_q = np.log(rng.dirichlet(np.ones(N + 1)))
    return table, N, k, alpha, idx, log_q


numba_missing = not K.USE_NUMBA


@pytest.mark.skipif(numba_missing, reason="numba disabled or unavailable")
def test_scan_paths_agree():
    table, N, k, alpha, idx, _ = _random_inputs(0)
    la_nb, lb_nb = K.scan_log_ab_nb(table.delta, N, k, alpha, idx)
    la_np, lb_np = K.scan_log_ab_np(table.delta, N, k, alpha, idx)
    assert np.allclose(la_nb, la_np, rtol=1e-12, atol=1e-12, equal_nan=False)
    assert np.array_equal(np.isneginf(la_nb), np.isneginf(la_np))
    assert np.allclose(lb_nb, lb_np, rtol=1e-12, atol=1e-12)
    assert np.array_equal(np.isneginf(lb_nb), np.isneginf(lb_np))


@pytest.mark.skipif(numba_missing, reason="numba disabled or unavailable")
def test_mean_law_paths_agree():
    table, N, _, _, _, _ = _random_inputs(1)
    ps = np.array([0.0, 0.2, 0.5, 0.9, 1.0])
    lws = np.log(np.array([0.1, 0.2, 0.3, 0.2, 0.2]))
    a = K.log_mean_law_nb(table.delta, N, ps, lws)
    b = K.log_mean_law_np(table.delta, N, ps, lws)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-12)
    assert abs(math.fsum(np.exp(b)) - 1.0) < 1e-9


@pytest.mark.skipif(numba_missing, reason="numba disabled or unavailable")
def test_region_sum_paths_agree():
    table, N, k, alpha, idx, log_q = _random_inputs(2)
    la, lb = K.scan_log_ab_np(table.delta, N, k, alpha, idx)
    s_nb = K.pair_region_sums_nb(la, lb, log_q, idx, 15, N - 70)
    s_np = K.pair_region_sums_np(la, lb, log_q, idx, 15, N - 70)
    assert np.allclose(s_nb, s_np, rtol=1e-13, atol=1e-300)


@pytest.mark.skipif(numba_missing, reason="numba disabled or unavailable")
def test_max_ratio_dev_paths_agree():
    table, N, k, alpha, idx, _ = _random_inputs(3)
    la, lb = K.scan_log_ab_np(table.delta, N, k, alpha, idx)
    mask = (idx > 15) & (idx <= N - 70)
    a = K.max_ratio_dev_nb(la, lb, mask)
    b = K.max_ratio_dev_np(la, lb, mask)
    assert abs(a - b) < 1e-14
    empty = np.zeros_like(mask)
    assert K.max_ratio_dev_nb(la, lb, empty) == 0.0
    assert K.max_ratio_dev_np(la, lb, empty) == 0.0


def test_array_log_binomial_matches_scalar():
    table = LogFactorialTable()
    n = 10**6
    table.ensure(n)
    r = np.array([-1, 0, 1, 17, 10**5, 5 * 10**5, n - 1, n, n + 1], dtype=np.int64)
    arr = K.log_binomial_array(table.delta, n, r)
    for rv, got in zip(r, arr):
        want = K.log_binomial_scalar(table.delta, n, int(rv))
        if want == K.NEG_INF:
            assert got == K.NEG_INF
        else:
            assert abs(got - want) < 1e-8


def test_region_sums_compensated_order():
    # fixed ascending order: tiny terms after a huge one must not be lost
    idx = np.arange(4, dtype=np.int64)
    log_a = np.log(np.array([1.0, 1e-16, 1e-16, 1e-16]))
    log_b = np.full(4, K.NEG_INF)
    log_q = np.zeros(4)
    sums = K.pair_region_sums(log_a, log_b, log_q, idx, 5, 6)
    assert sums[0] == pytest.approx(1.0 + 3e-16, abs=0, rel=1e-15)
    assert sums[3] == 0.0
