"""Acceptance criteria, one test each.

Every test records a ``ACCEPT <n>: PASS|FAIL ...`` line; pytest prints them
in the terminal summary, and running this file as a script prints them
directly.
"""

import math
import time

import numpy as np
import pytest

from spilab import capacity, gauss_lsi, hermite, measure, orlicz, spectrum, transfer
from spilab.cli import main as cli_main

from conftest import ACCEPTANCE_LINES


def report(n, ok, detail):
    line = f"ACCEPT {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def gaussian_moment(k):
    """``E[x^k]`` under the standard Gaussian."""
    return 0.0 if k % 2 else float(np.prod(np.arange(k - 1, 0, -2))) if k else 1.0


def test_01_ou_spectrum():
    t = time.perf_counter()
    m = measure.build_measure(measure.gaussian(), (-10.0, 10.0), 2000)
    spec = spectrum.low_spectrum(m, 6)
    dt = time.perf_counter() - t
    err = float(np.max(np.abs(spec.eigenvalues - np.arange(6))))
    ok = err <= 1e-3 and dt < 10.0
    assert report(1, ok, f"max |lambda_i - i| = {err:.2e}, {dt:.2f} s")


def test_02_hermite_orthonormality():
    l2 = np.array([hermite.lp_norm(n, 2.0) for n in range(41)])
    err_norm = float(np.max(np.abs(l2 - 1.0)))
    gram = hermite.HermiteBasis(30).gram()
    err_gram = float(np.max(np.abs(gram - np.eye(31))))
    ok = err_norm <= 1e-8 and err_gram <= 1e-8
    assert report(2, ok, f"max |‖H_n‖₂ - 1| = {err_norm:.1e}, Gram error {err_gram:.1e}")


def test_03_lp_oracle():
    # (x^2 - 1)^4 / 2!^2 expanded in Gaussian moments
    coeffs = {8: 1, 6: -4, 4: 6, 2: -4, 0: 1}
    oracle_h2 = (sum(c * gaussian_moment(k) for k, c in coeffs.items()) / 4.0) ** 0.25
    oracle_h1 = gaussian_moment(4) ** 0.25
    e2 = abs(hermite.lp_norm(2, 4.0) - oracle_h2)
    e1 = abs(hermite.lp_norm(1, 4.0) - oracle_h1)
    ok = abs(oracle_h2 - 15**0.25) < 1e-15 and e2 <= 1e-6 and e1 <= 1e-8
    assert report(3, ok, f"‖H_2‖_4 error {e2:.1e}, ‖H_1‖_4 error {e1:.1e}")


def test_04_growth_audit():
    table, c_sup = hermite.audit_lp_bound(40, [3, 4, 6, 8, 12])
    lo = hermite.c_sup_over(table, 10, 20)
    hi = hermite.c_sup_over(table, 20, 40)
    finite = bool(np.all(np.isfinite(table["c"])))
    rel = abs(hi - lo) / lo
    ok = finite and rel <= 0.2
    assert report(4, ok, f"c_sup = {c_sup:.4f}, max[10,20] = {lo:.4f}, max[20,40] = {hi:.4f}, change {rel:.1%}")


def test_05_plancherel_rotach():
    err200 = float(np.max(hermite.oscillating_error(200, np.linspace(-1.0, 1.0, 2001))))
    w = [hermite.window_error(n, 0.5) for n in (100, 200, 400)]
    ok = err200 <= 5e-2 and w[0] > w[1] > w[2]
    assert report(5, ok, f"n=200 max error {err200:.2e}; phi=0.5 errors {w[0]:.2e} > {w[1]:.2e} > {w[2]:.2e}")


def test_06_capacity_oracle(uniform01):
    ms = [
        measure.build_measure(measure.gaussian(), (-10.0, 10.0), 2001),
        measure.build_measure(measure.double_well(), None, 2001),
        measure.build_measure(measure.power(1.5), None, 2001),
        uniform01,
    ]
    rng = np.random.default_rng(2024)
    worst = 0.0
    for i in range(20):
        m = ms[i % 4]
        mass = rng.uniform(0.01, 0.45)
        start = rng.uniform(0, 0.5 - mass) if rng.random() < 0.5 else rng.uniform(0, 1 - mass)
        a = m.left_quantile(start) if start > 0 else m.domain[0]
        b = m.left_quantile(start + mass)
        c = capacity.interval_capacity(m, a, b)
        bf = capacity.brute_force_capacity(m, a, b)
        worst = max(worst, abs(c - bf) / bf)
    u = capacity.interval_capacity(uniform01, 0.45, 0.55)
    ok = worst <= 0.02 and abs(u - 10.0) <= 1e-6
    assert report(6, ok, f"worst relative gap {worst:.2%} over 20 instances; uniform [0.45,0.55] -> {u:.12f}")


def test_07_poincare_sandwich(gauss_profile):
    lo, hi = capacity.poincare_from_mc(gauss_profile)
    ok = lo <= 1.0 <= hi and hi / lo == 4.0
    assert report(7, ok, f"C_P in [{lo:.4f}, {hi:.4f}], width ratio {hi / lo!r}")


def test_08_capacity_endgame(gauss_profile):
    sel = gauss_profile.kappa <= 1e-3
    ks = gauss_profile.kappa[sel]
    cs = gauss_profile.c_kappa[sel]
    chain = np.log(1.0 / ks) / 32.0
    dominates = bool(np.all(cs >= chain))
    c = gauss_lsi.default_c_const((5, 7, 13, 23))
    family = [gauss_lsi.GaussChainParams.standard(d, c) for d in (1, 2, 5, 10)]
    k1, lk1 = gauss_lsi.find_kappa1(family)
    exact = True
    for lk in (lk1 + 0.5, 20.0, 32.0, 100.0, 1000.0):
        for prm in family:
            exact &= gauss_lsi.c_kappa_chain(None, prm, kappa1=k1, log_inv_kappa=lk) == lk / 32.0
    common = all(gauss_lsi.claim_record(None, prm, lk).passed for prm in family for lk in np.linspace(lk1, 400, 400))
    ok = dominates and exact and common
    assert report(
        8,
        ok,
        f"min C_kappa/(log(1/kappa)/32) = {float(np.min(cs / chain)):.2f} on [1e-8,1e-3]; "
        f"chain exact: {exact}; kappa1 = {k1:.4g} for d in {{1,2,5,10}}",
    )


def test_09_spi_certification(gauss, gauss_spec):
    pair = orlicz.power_pair(4)
    ospi = spectrum.spectral_ospi(gauss_spec, pair, np.array([0.1, 0.5, 1.0]))
    worst = -math.inf
    passed = True
    for r in (0.1, 0.5, 1.0):
        rep = spectrum.verify_spi(gauss, ospi, r, trials=1000, seed=9, generator=gauss_spec.generator)
        passed &= rep.passed
        worst = max(worst, rep.max_violation)
    q_ratio = 0.0
    gen = gauss_spec.generator
    for f in spectrum.random_test_functions(gauss, 200, seed=10):
        for r in (0.1, 0.5, 1.0):
            _, q = spectrum.projection_split(gauss, gauss_spec, f, r)
            q_ratio = max(q_ratio, q / (r * gen.energy(f)))
    ok = passed and q_ratio <= 1.0 + 1e-10
    assert report(
        9, ok, f"3 x 1000 trials, max relative violation {worst:.3g}; max Q/(r energy) = {q_ratio:.4f} on 200 functions"
    )


def test_10_transfer_round_trip():
    beta = transfer.BetaFunction.from_callable(lambda r: 1.0 + 1.0 / (r - 1.0), r0=1.0)
    new = transfer.ospi_to_spi(
        transfer.OrliczSpi(beta, orlicz.power_pair(4)),
        0.5,
        psi=np.sqrt,
        kappa_grid=np.geomspace(1e-60, 0.25, 121),
    )
    # chain via the public two-step route as well
    prof = transfer.spi_to_mc(beta, 0.5, psi=np.sqrt, b_star=1e-6, kappa_grid=np.geomspace(1e-60, 0.25, 121))
    back = transfer.mc_to_spi(prof)
    r_first = back.finite_from()
    ok = math.isinf(back(8.0 - 1e-9)) and math.isinf(back(7.9)) and 8.0 <= r_first <= 8.0 * (1 + 1e-4)
    ok &= 8.0 <= new.finite_from() <= 8.0 * (1 + 1e-4)
    assert report(10, ok, f"beta~ finite from r = {r_first:.6f} (ospi route {new.finite_from():.6f}), inf below 8")


def test_11_lsi_defect(gauss):
    rep = gauss_lsi.lsi_defect_check(gauss, 2.0, trials=1000, seed=11)
    ok = 1.9 <= rep.max_ratio <= 2.1
    assert report(11, ok, f"max Ent/energy = {rep.max_ratio:.10f} ({rep.worst}), check at c=2: {rep.passed}")


def test_12_determinism(tmp_path):
    runs = [
        ["spectrum", "--preset", "gaussian", "--domain=-10:10", "--nodes", "2000", "--k", "6", "--seed", "5"],
        ["gauss-lsi", "--d", "1,2,5,10", "--trials", "50", "--seed", "5"],
        ["hermite", "--n-max", "20"],
    ]
    same = True
    n_files = 0
    for args in runs:
        outs = []
        for rep in range(2):
            d = tmp_path / f"{args[0]}-{rep}"
            assert cli_main(args + ["--out", str(d), "--format", "svg"]) == 0
            outs.append({p.name: p.read_bytes() for p in sorted(d.iterdir())})
        same &= outs[0] == outs[1]
        n_files += len(outs[0])
    assert report(12, same, f"{n_files} artifacts byte-identical across repeated runs")


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
