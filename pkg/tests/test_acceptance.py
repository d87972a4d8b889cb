"""Exit criteria: weight identities, Mittag-Leffler accuracy, relaxation order and the three convergence studies.

Every criterion prints one ``ACk PASS`` or ``ACk FAIL`` line (also repeated in
the terminal summary) before asserting.
"""

import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import VERDICTS
from fracflow.fracops import apply_frac_derivative, apply_frac_integral, binomial_weights, cq_weights, scalar_relaxation
from fracflow.harness import StudyConfig, run_study
from fracflow.mittag_leffler import ml
from scipy.special import rgamma

pytestmark = pytest.mark.acceptance

ALPHAS = (0.3, 0.7)


def verdict(tag, ok, detail):
    line = f"{tag} {'PASS' if ok else 'FAIL'}: {detail}"
    print(line)
    VERDICTS.append(line)
    assert ok, line


def timed(cfg):
    t0 = time.perf_counter()
    report = run_study(cfg)
    return report, time.perf_counter() - t0


def orders(report, alpha, key):
    return [getattr(r, key) for r in report.select(alpha)[1:]]


def fmt(values):
    return "[" + ", ".join("-" if v is None else f"{v:.3f}" for v in values) + "]"


def within(values, lo, hi):
    return all(v is not None and lo <= v <= hi for v in values)


def test_ac1_weight_identities():
    t0 = time.perf_counter()
    w = cq_weights(0.5, 4).weights
    prefix_ok = w[0] == 1.0 and list(w) == [1.0, -0.5, -0.125, -0.0625]
    n = 10_001
    partial = 0.0
    for alpha in np.arange(1, 10) / 10:
        lhs = np.cumsum(binomial_weights(alpha, n))
        partial = max(partial, float(np.max(np.abs(lhs - binomial_weights(alpha - 1.0, n)))))
    rng = np.random.default_rng(7)
    comp = 0.0
    for alpha in (0.1, 0.5, 0.9):
        phi = rng.standard_normal(41)
        wa = cq_weights(alpha, 41, 0.01)
        d = np.array([apply_frac_derivative(wa, phi, k) for k in range(41)])
        for k in range(41):
            comp = max(comp, abs(apply_frac_integral(alpha, d, k, 0.01) - phi[k]) / max(1.0, abs(phi).max()))
    elapsed = time.perf_counter() - t0
    ok = prefix_ok and partial <= 1e-13 and comp <= 1e-12 and elapsed < 1.0
    verdict("AC1", ok, f"prefix={[float(v) for v in w]} partial-sum defect={partial:.2e} composition defect={comp:.2e} "
                       f"time={elapsed:.2f}s")


def test_ac2_mittag_leffler():
    t0 = time.perf_counter()
    z = np.linspace(-30.0, 0.0, 3001)
    exp_err = float(np.max(np.abs(ml(1.0, 1.0, z) - np.exp(z)) / np.exp(z)))
    half = float(ml(0.5, 1.0, -1.0))
    rec = 0.0
    x = -np.linspace(0.0, 50.0, 501)
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0):
        for beta in (0.5, 1.0, 1.5, 2.0):
            lhs = ml(alpha, beta, x)
            shifted = x * ml(alpha, alpha + beta, x)
            scale = np.maximum.reduce([np.abs(lhs), np.abs(shifted), np.full_like(x, abs(rgamma(beta)))])
            rec = max(rec, float(np.max(np.abs(lhs - shifted - rgamma(beta)) / scale)))
    elapsed = time.perf_counter() - t0
    ok = exp_err <= 1e-12 and abs(half - 0.427583576) <= 1e-8 and rec <= 1e-9 and elapsed < 1.0
    verdict("AC2", ok, f"exp rel err={exp_err:.2e} E_0.5(-1)={half:.10f} recurrence defect={rec:.2e} "
                       f"time={elapsed:.2f}s")


def test_ac3_scalar_relaxation():
    t0 = time.perf_counter()
    Ns = (40, 80, 160, 320)
    details, ok = [], True
    for alpha in (0.3, 0.5, 0.7):
        errs = []
        for N in Ns:
            t = np.linspace(0.0, 1.0, N + 1)
            errs.append(float(np.max(np.abs(scalar_relaxation(alpha, 1.0, N, 1.0) - ml(alpha, 1.0, -(t**alpha))))))
        oc = np.log2(np.array(errs[:-1]) / errs[1:])
        ok &= bool(np.all(oc >= 0.9))
        details.append(f"alpha={alpha} max-norm oc={fmt(oc)}")
    tau = 1.0 / 40
    be = scalar_relaxation(1.0, 1.0, 40, 1.0)
    exact_be = bool(np.allclose(be, (1 + tau) ** -np.arange(41.0), rtol=1e-14, atol=0))
    elapsed = time.perf_counter() - t0
    ok = ok and exact_be and elapsed < 5.0
    verdict("AC3", ok, "; ".join(details) + f"; alpha=1 exact={exact_be} time={elapsed:.2f}s")


@pytest.fixture(scope="module")
def example2_space():
    return timed(StudyConfig(2, alphas=ALPHAS, levels=(1, 2, 3, 4), tau=1.0 / 1200))


def test_ac4_example2_space(example2_space):
    report, elapsed = example2_space
    reference_l4 = {0.3: 5.317e-05, 0.7: 3.140e-05}
    ok, details = not report.failed, []
    for alpha in ALPHAS:
        ou, os_ = orders(report, alpha, "oc_u")[-2:], orders(report, alpha, "oc_sigma")[-2:]
        e4 = report.select(alpha)[-1].err_u
        ratio = e4 / reference_l4[alpha]
        ok &= within(ou, 1.8, 2.25) and within(os_, 1.8, 2.25) and 1 / 3 <= ratio <= 3
        details.append(f"alpha={alpha} oc_u={fmt(ou)} oc_sigma={fmt(os_)} err_u(L4)={e4:.3e} "
                       f"(x{ratio:.3f} of reference)")
    ok = ok and elapsed <= 1800
    verdict("AC4", ok, "; ".join(details) + f"; time={elapsed:.0f}s")


@pytest.fixture(scope="module")
def example2_time():
    return timed(StudyConfig(2, alphas=ALPHAS, axis="time", nsteps=(10, 20, 40, 80, 160), level=5))


def test_ac5_example2_time(example2_time):
    report, elapsed = example2_time
    reference = {
        0.3: (3.1744041e-02, 1.7003601e-02, 8.0542173e-03, 4.3481248e-03, 2.1347824e-03),
        0.7: (1.679786e-02, 7.812162e-03, 3.287313e-03, 1.595068e-03, 8.042011e-04),
    }
    ok, details = not report.failed, []
    for alpha in ALPHAS:
        oc = orders(report, alpha, "oc_u")
        mean = float(np.mean(oc))
        ratios = [r.err_u / p for r, p in zip(report.select(alpha), reference[alpha])]
        ok &= abs(mean - 1.0) <= 0.15 and all(1 / 3 <= q <= 3 for q in ratios)
        details.append(f"alpha={alpha} oc_u={fmt(oc)} mean={mean:.3f} "
                       f"err/reference in [{min(ratios):.2e}, {max(ratios):.2e}]")
    ok = ok and elapsed <= 600
    verdict("AC5", ok, "; ".join(details) + f"; time={elapsed:.0f}s")


@pytest.fixture(scope="module")
def example3_space():
    return timed(StudyConfig(3, alphas=ALPHAS, levels=(1, 2, 3, 4), tau=6.25e-4))


def test_ac6_example3_space(example3_space):
    report, elapsed = example3_space
    ok, details = not report.failed, []
    for alpha in ALPHAS:
        ou, os_ = orders(report, alpha, "oc_u"), orders(report, alpha, "oc_sigma")
        ok &= within(ou, 1.8, 2.2) and within(os_, 1.5, 1.8)
        details.append(f"alpha={alpha} oc_u={fmt(ou)} oc_sigma={fmt(os_)}")
    ok = ok and elapsed <= 1800
    verdict("AC6", ok, "; ".join(details) + f"; time={elapsed:.0f}s")


@pytest.fixture(scope="module")
def example1_studies():
    rt0 = timed(StudyConfig(1, alphas=ALPHAS, element="rt0", levels=(1, 2, 3, 4, 5), ref_level=6))
    rt1 = timed(StudyConfig(1, alphas=ALPHAS, element="rt1", levels=(1, 2, 3, 4), ref_level=5))
    return rt0, rt1


def test_ac7_example1_self_convergence(example1_studies):
    (rt0, t0), (rt1, t1) = example1_studies
    ok, details = not (rt0.failed or rt1.failed), []
    for alpha in ALPHAS:
        o = [orders(rt0, alpha, k) for k in ("oc_u", "oc_sigma")]
        p = [orders(rt1, alpha, k) for k in ("oc_u", "oc_sigma")]
        ok &= all(within(v, 0.8, 1.2) for v in o) and all(within(v, 1.75, 2.25) for v in p)
        details.append(f"alpha={alpha} RT0 oc_u={fmt(o[0])} oc_sigma={fmt(o[1])} "
                       f"RT1 oc_u={fmt(p[0])} oc_sigma={fmt(p[1])}")
    ok = ok and t0 + t1 <= 2700
    verdict("AC7", ok, "; ".join(details) + f"; time={t0 + t1:.0f}s")


STRUCTURAL = [
    "test_mesh.py::test_counts_small",
    "test_mesh.py::test_counting_formulas",
    "test_quadrature.py::test_exactness_sweep",
    "test_quadrature.py::test_exactness_property",
    "test_fe_space.py::test_normal_continuity",
    "test_assembly.py::test_symmetric_positive_definite",
    "test_assembly.py::test_divergence_theorem_columns",
    "test_stepper.py::test_alpha_one_matches_classical_solver",
    "test_stepper.py::test_heat_equation_limit_no_drift",
    "test_stepper.py::test_zero_data_fixed_point",
    "test_stepper.py::test_factor_once_equivalence",
]


def test_ac8_structural_invariants():
    here = Path(__file__).parent
    t0 = time.perf_counter()
    res = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *(str(here / s) for s in STRUCTURAL)],
        capture_output=True, text=True, cwd=here.parent,
    )
    elapsed = time.perf_counter() - t0
    summary = res.stdout.strip().splitlines()[-1] if res.stdout.strip() else res.stderr.strip()
    ok = res.returncode == 0 and elapsed < 120
    verdict("AC8", ok, f"{len(STRUCTURAL)} invariant groups: {summary}; time={elapsed:.0f}s")


def test_study_reports_are_finite(example2_space, example3_space):
    for report, _ in (example2_space, example3_space):
        assert all(math.isfinite(r.err_u) and math.isfinite(r.err_sigma) for r in report.rows)
