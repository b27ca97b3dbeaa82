"""Acceptance gate: twelve end-to-end checks at release tolerances.

Each check prints (and registers) exactly one PASS/FAIL line; the lines
are replayed in a terminal summary section after the run.  The ising
checks share one production-grade family of k=2 Parisi solutions
(quad_nodes=40, x_points=1024), solved once per session in the `master`
fixture; per-check elapsed times quoted in the lines are the marginal
work of the check itself, with the shared build reported separately.

Check 09 is expected to fail on its cold REM leg: at N=14 the
finite-size bias of the frozen phase is about thirty standard errors of
a 32-replica average (see notes in the line itself).  The assertion is
kept faithful to the stated bound rather than widened to pass.
"""

import io
import json
import math
import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from glassdual import cli
from glassdual.core import MixtureSpec, StepDistribution, TemperatureVector
from glassdual.duality import (
    FreeEnergyHandle,
    SearchBox,
    concavity_check,
    corollary_check,
    ising_handle,
    legendre_sup_V,
    rem_handle,
    roundtrip_gap,
)
from glassdual.ising import (
    ParisiNumerics,
    gamma_transform,
    ising_derivative,
    parisi_family,
    parisi_minimize,
    verify_thm7,
)
from glassdual.oracle import (
    disorder_average,
    exact_free_energy,
    finite_n_inequality_check,
    sample_disorder,
)
from glassdual.rem import rem_duality_roundtrip, rem_free_energy, rem_parisi_minimize
from glassdual.spherical import (
    QHAT_CAP,
    cs_functional,
    cs_minimize,
    lambda_functional,
    spherical_partial,
    verify_thm10,
)

SK = MixtureSpec(((2, math.sqrt(0.5)),), "ising")
NUM = ParisiNumerics(quad_nodes=40, x_points=1024, multistart=4, seed=1234, tol=1e-10)
GOLDEN = Path(__file__).parent / "golden"

# handle grid; betas used elsewhere are snapped onto it so the spline
# never sees two knots a few ulp apart
LIN = [float(b) for b in np.linspace(0.1, 4.0, 40)]
THM_GRID = [float(b) for b in np.linspace(0.4, 2.4, 6)]
REM_GRID = [float(b) for b in np.linspace(0.1, 3.0, 59)]


def snap(b: float) -> float:
    best = min(LIN, key=lambda l: abs(l - b))
    return best if abs(best - b) < 1e-9 else float(b)


def record(lines, label, ok, detail):
    line = f"{label}: {'PASS' if ok else 'FAIL'} [{detail}]"
    print(line)
    lines.append(line)
    assert ok, line


@pytest.fixture(scope="session")
def master():
    t0 = time.perf_counter()
    family = {}
    solve_seconds = {}
    for b in (0.2, 0.5, 0.8):
        bb = snap(b)
        t1 = time.perf_counter()
        family[bb] = parisi_minimize(SK, bb, 2, NUM)
        solve_seconds[b] = time.perf_counter() - t1
    family.update(parisi_family(SK, sorted(set(LIN) - set(family)), 2, NUM))
    handle = ising_handle(SK, 2, NUM, beta_max=4.0, grid_points=40, family=family)
    return SimpleNamespace(
        family=family,
        handle=handle,
        solve_seconds=solve_seconds,
        build_seconds=time.perf_counter() - t0,
    )


def test_01_rem_closed_form(acceptance_lines):
    t0 = time.perf_counter()
    worst_value = max(
        abs(rem_parisi_minimize(b)[1] - rem_free_energy(b)) for b in REM_GRID
    )
    worst_gap = rem_duality_roundtrip(REM_GRID).max_gap
    dt = time.perf_counter() - t0
    record(
        acceptance_lines,
        "01 rem closed form",
        worst_value <= 1e-10 and worst_gap <= 1e-6 and dt < 1.0,
        f"value err {worst_value:.1e} <= 1e-10, roundtrip {worst_gap:.1e} <= 1e-6, {dt:.2f}s < 1s",
    )


def test_02_rem_squared_identity(acceptance_lines):
    t0 = time.perf_counter()
    handle = rem_handle()
    box = SearchBox(lo=0.0, hi=32.0)
    log2 = math.log(2.0)
    worst = max(
        abs(legendre_sup_V(handle, 0.1 * i, box).value - (log2 / (0.1 * i) - log2))
        for i in range(1, 11)
    )
    dt = time.perf_counter() - t0
    record(
        acceptance_lines,
        "02 rem squared free energy",
        worst <= 1e-6 and dt < 1.0,
        f"max |sup - (log2/m - log2)| {worst:.1e} <= 1e-6, {dt:.2f}s < 1s",
    )


def test_03_ising_replica_symmetric(acceptance_lines, master):
    worst_err = 0.0
    worst_excess = -math.inf
    worst_dt = 0.0
    for b in (0.2, 0.5, 0.8):
        bb = snap(b)
        sol = master.family[bb]
        worst_err = max(worst_err, abs(sol.value - bb * bb / 4.0))
        # annealed bound: value may sit below beta^2 xi(1)/2, never above
        worst_excess = max(worst_excess, sol.value - bb * bb / 4.0)
        worst_dt = max(worst_dt, master.solve_seconds[b])
    record(
        acceptance_lines,
        "03 ising replica symmetric",
        worst_err <= 5e-4 and worst_excess <= 1e-10 and worst_dt < 30.0,
        f"|F - b^2/4| {worst_err:.1e} <= 5e-4, annealed excess {worst_excess:.1e} <= 1e-10, "
        f"slowest solve {worst_dt:.1f}s < 30s",
    )


def test_04_derivative_identity(acceptance_lines, master):
    h = 1e-3
    worst = 0.0
    for b in (0.8, 1.5):
        bb = snap(b)
        pair = parisi_family(SK, [bb - h, bb + h], 2, NUM)
        fd = (pair[bb + h].value - pair[bb - h].value) / (2.0 * h)
        der = ising_derivative(SK, bb, master.family[bb].alpha_star)
        worst = max(worst, abs(der - fd))
    record(
        acceptance_lines,
        "04 envelope derivative",
        worst <= 1e-3,
        f"max |beta int alpha xi' - centered FD| {worst:.1e} <= 1e-3 at beta 0.8, 1.5",
    )


def test_05_concavity_in_squared_temperature(acceptance_lines):
    t0 = time.perf_counter()
    t_grid = [float(t) for t in np.linspace(4.0 / 30.0, 4.0, 30)]
    fam = parisi_family(SK, [math.sqrt(t) for t in t_grid], 2, NUM)
    pointwise = FreeEnergyHandle(
        name="parisi pointwise", dim=1, evaluate=lambda arr: fam[float(arr[0])].value
    )
    ising_rep = concavity_check(pointwise, t_grid)
    rem_rep = concavity_check(rem_handle(), t_grid)
    dt = time.perf_counter() - t0
    record(
        acceptance_lines,
        "05 concavity in beta^2",
        ising_rep["max_violation"] <= 1e-6 and rem_rep["max_violation"] <= 1e-9,
        f"ising max second difference {ising_rep['max_violation']:.1e} <= 1e-6, "
        f"rem {rem_rep['max_violation']:.1e} <= 1e-9, {dt:.0f}s",
    )


def test_06_duality_roundtrip(acceptance_lines, master):
    t0 = time.perf_counter()
    worst_ising = max(roundtrip_gap(master.handle, b).max_gap for b in (0.8, 1.5))
    worst_rem = rem_duality_roundtrip(REM_GRID).max_gap
    dt = time.perf_counter() - t0
    record(
        acceptance_lines,
        "06 legendre roundtrip",
        worst_ising <= 5e-3 and worst_rem <= 1e-6 and dt < 300.0,
        f"ising {worst_ising:.1e} <= 5e-3, rem {worst_rem:.1e} <= 1e-6, "
        f"marginal {dt:.0f}s < 300s (shared family {master.build_seconds:.0f}s)",
    )


def test_07_transform_identities(acceptance_lines, master):
    gam_one = gamma_transform(SK, StepDistribution.constant(1.0), NUM)
    worst = 0.0
    for b in (0.8, 1.5):
        bb = snap(b)
        fam = {kk: master.family[kk] for kk in {snap(x) for x in THM_GRID} | {bb}}
        worst = max(worst, verify_thm7(SK, bb, 2, NUM, family=fam).max_gap)
    record(
        acceptance_lines,
        "07 gamma transform identities",
        worst <= 5e-3 and abs(gam_one.value) <= 1e-6,
        f"max gap {worst:.1e} <= 5e-3, |Gamma(alpha=1)| {abs(gam_one.value):.1e} <= 1e-6",
    )


def test_08_finite_size_inequality(acceptance_lines):
    t0 = time.perf_counter()
    rng = np.random.default_rng(20260816)
    worst = math.inf
    for _ in range(100):
        model = "rem" if rng.random() < 0.5 else "ising"
        spec = None
        if model == "ising":
            degs = sorted(rng.choice([1, 2, 3], size=int(rng.integers(1, 4)), replace=False))
            spec = MixtureSpec(
                tuple((int(p), float(rng.uniform(0.2, 1.0))) for p in degs), "ising"
            )
        sample = sample_disorder(
            model, spec=spec, N=int(rng.integers(4, 13)), seed=int(rng.integers(0, 2**63 - 1))
        )
        gap = finite_n_inequality_check(
            sample, float(rng.uniform(0.05, 2.5)), float(rng.uniform(0.05, 3.0))
        )
        worst = min(worst, gap)
    dt = time.perf_counter() - t0
    record(
        acceptance_lines,
        "08 finite-size inequality",
        worst >= -1e-12 and dt < 60.0,
        f"100 cases, worst gap {worst:+.1e} >= -1e-12, {dt:.0f}s < 60s",
    )


def test_09_finite_size_convergence(acceptance_lines):
    t0 = time.perf_counter()
    legs = []
    ok = True
    for beta in (0.5, 1.5):
        mean, se = disorder_average(
            lambda seed, b=beta: exact_free_energy(sample_disorder("rem", None, 14, seed), b),
            replicas=32,
            base_seed=2026,
        )
        z = abs(mean - rem_free_energy(beta)) / se
        ok = ok and z <= 3.0
        note = "" if z <= 3.0 else " (frozen-phase finite-size bias at N=14, not noise; see notes)"
        legs.append(f"rem b={beta} z={z:.1f}{note}")
    devs = []
    for n in (8, 12, 16):
        mean, _ = disorder_average(
            lambda seed, n=n: exact_free_energy(
                sample_disorder("ising", spec=SK, N=n, seed=seed), 0.8
            ),
            replicas=4096,
            base_seed=2027,
        )
        devs.append(abs(mean - 0.16))
    trend_ok = all(a >= b - 1e-12 for a, b in zip(devs, devs[1:]))
    ok = ok and trend_ok
    legs.append("ising |mean-0.16| " + " > ".join(f"{d:.4f}" for d in devs))
    dt = time.perf_counter() - t0
    ok = ok and dt < 600.0
    record(acceptance_lines, "09 finite-size convergence", ok, "; ".join(legs) + f"; {dt:.0f}s < 600s")


def test_10_spherical_identities(acceptance_lines):
    rng = np.random.default_rng(777)
    worst_inv = 0.0
    for _ in range(20):
        k = int(rng.integers(1, 4))
        qs = np.sort(rng.uniform(0.05, 0.9, size=k))
        lv = np.sort(rng.uniform(0.05, 0.95, size=k))
        alpha = StepDistribution(
            knots=(0.0, *qs.tolist(), 1.0), levels=(*lv.tolist(), 1.0), qhat=float(qs[-1])
        )
        beta = TemperatureVector(tuple(rng.uniform(0.1, 2.0, size=3)))
        q_alt = float(alpha.qhat + rng.uniform(0.0, 1.0) * (QHAT_CAP - alpha.qhat))
        worst_inv = max(
            worst_inv,
            abs(cs_functional(beta, alpha.with_qhat(q_alt)) - cs_functional(beta, alpha)),
        )
    lam_one = lambda_functional(StepDistribution.constant(1.0, qhat=0.0))
    thm10 = verify_thm10(TemperatureVector((0.0, 0.5)), k=2, num=NUM)

    bmix = TemperatureVector((0.3, 0.5))
    sol = cs_minimize(bmix, 2, NUM)
    h = 1e-4
    worst_fd = 0.0
    for p in (1, 2):
        up = list(bmix.entries)
        dn = list(bmix.entries)
        up[p - 1] += h
        dn[p - 1] -= h
        fd = (
            cs_minimize(TemperatureVector(tuple(up)), 2, NUM).value
            - cs_minimize(TemperatureVector(tuple(dn)), 2, NUM).value
        ) / (2.0 * h)
        worst_fd = max(worst_fd, abs(spherical_partial(bmix, sol.alpha_star, p) - fd))
    record(
        acceptance_lines,
        "10 spherical identities",
        worst_inv <= 1e-10 and lam_one == 0.0 and thm10.max_gap <= 5e-3 and worst_fd <= 1e-3,
        f"qhat invariance {worst_inv:.1e} <= 1e-10, Lambda(alpha=1) == {lam_one!r}, "
        f"transform gaps {thm10.max_gap:.1e} <= 5e-3, partial vs FD {worst_fd:.1e} <= 1e-3",
    )


def test_11_maximization_bound(acceptance_lines, master):
    worst_l = worst_g = worst_excess = 0.0
    for b in (0.8, 1.5):
        bb = snap(b)
        fam = {kk: master.family[kk] for kk in {snap(x) for x in THM_GRID} | {bb}}
        rep = corollary_check(SK, bb, 2, NUM, family=fam)
        worst_l = max(worst_l, rep.gaps["l_star_at_witness"])
        worst_g = max(worst_g, rep.gaps["gamma_star_at_witness"])
        worst_excess = max(
            worst_excess, rep.gaps["excess_over_F"], rep.gaps["witness_attainment"]
        )
    record(
        acceptance_lines,
        "11 maximization bound",
        worst_l <= 1e-8 and worst_g <= 5e-3 and worst_excess <= 5e-3,
        f"L*(witness) {worst_l:.1e} <= 1e-8, |Gamma*(witness)+F| {worst_g:.1e} <= 5e-3, "
        f"candidate excess {worst_excess:.1e} <= 5e-3",
    )


SEEDED_RUNS = {
    "rem.csv": ["rem", "--beta-grid", "0.2:1.6:0.2"],
    "ising.csv": [
        "ising", "--xi", json.dumps({"kind": "ising", "terms": [[2, 0.7071067811865476]]}),
        "--beta-grid", "0.4,0.8", "--k", "1", "--quad-nodes", "16",
        "--x-points", "256", "--multistart", "2", "--tol", "1e-8",
    ],
    "spherical.csv": ["spherical", "--beta", "[0.3, 0.5]", "--k", "2"],
    "oracle.csv": [
        "oracle", "--model", "rem", "--N", "8", "--replicas", "4",
        "--beta", "1.2", "--seed", "777",
    ],
    "duality.csv": ["duality", "--model", "rem", "--beta-grid", "0.5,1.5"],
}


def test_12_seeded_runs_are_reproducible(acceptance_lines):
    stale = []
    for name, argv in SEEDED_RUNS.items():
        outs = []
        for _ in range(2):
            buf = io.StringIO()
            args = cli._build_parser().parse_args(argv)
            assert cli.run(cli._resolve(args), stream=buf) == 0
            outs.append(buf.getvalue())
        golden = (GOLDEN / name).read_text()
        if not (outs[0] == outs[1] == golden):
            stale.append(name)
    record(
        acceptance_lines,
        "12 seeded reproducibility",
        not stale,
        f"{len(SEEDED_RUNS)} commands, two runs each, bit-identical to goldens"
        + (f"; MISMATCH: {stale}" if stale else ""),
    )
