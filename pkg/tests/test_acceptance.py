"""Acceptance criteria, one test per criterion.

Each test records a ``PASS``/``FAIL`` line; the lines are printed in the
pytest terminal summary and also when this file is run as a script.
"""
import json
import math
import os
import subprocess
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

from unruh_lab.oscillatory import AmplitudePair, Regularization, eval_I, eval_pair, oracle_quadrature
from unruh_lab.states import (
    BARE,
    ProbabilityContext,
    catalysis_fraction,
    coherent_excitation_probability,
    emission_probabilities,
    fock_probabilities,
)
from unruh_lab.trajectory import PhaseFunction, check_phase_consistency, check_timelike, make_piecewise_alpha
from unruh_lab.trajectory import reconstruct_trajectory
from unruh_lab.transparency import demo_spec, transparency_report
from unruh_lab.unruh import UnruhSpec, thermal_spectrum_check

RESULTS = []


def record(number, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}"
    RESULTS.append(line)
    print(line)
    assert ok, line


_demo = {}


def demo():
    if "report" not in _demo:
        t = time.perf_counter()
        _demo["report"] = transparency_report(demo_spec())
        _demo["seconds"] = time.perf_counter() - t
    return _demo["report"], _demo["seconds"]


def test_1_oracle_equivalence():
    rng = np.random.default_rng(20240601)
    t = time.perf_counter()
    worst = {"adiabatic": 0.0, "window": 0.0}
    n_pf = 0
    while n_pf < 100:
        s0, s1, s2 = rng.uniform(0.2, 4.0, 3)
        T1 = rng.uniform(0.5, 5.0)
        T2 = rng.uniform(T1, 20.0)
        if not T2 > T1:
            continue
        n_pf += 1
        pf = make_piecewise_alpha(s0, s1, s2, T1, T2, 1.0)
        regs = {
            "adiabatic": Regularization.adiabatic(0.05),
            "window": Regularization.hard_window(-10.0, T2 + 10.0),
        }
        for om in rng.uniform(0.1, 10.0, 20):
            for name, reg in regs.items():
                for s in (1, -1):
                    ref = oracle_quadrature(pf, om, s, reg, tol=1e-12)
                    worst[name] = max(worst[name], abs(eval_I(pf, om, s, reg) - ref) / abs(ref))
    dt = time.perf_counter() - t
    ok = max(worst.values()) < 1e-8 and dt < 60
    record(1, "closed form vs oracle", ok,
           f"100 phase functions x 20 gaps x 2 signs x 2 modes, worst rel err adiabatic {worst['adiabatic']:.2e}, "
           f"window {worst['window']:.2e} (< 1e-8), {dt:.1f}s (< 60s)")


def test_2_transparency():
    rep, dt = demo()
    best = rep.best
    spec = rep.spec
    pair = eval_pair(spec.phase_function(best.s1, best.T2), spec.omega, spec.regularization)
    sp = rep.spectrum
    step = sp.omega[1] - sp.omega[0]
    peaks = sp.omega[sp.peaks()]
    near = [min(abs(peaks - w)) <= step for w in (spec.k0 * spec.s0, spec.k0 * spec.s2)]
    k = int(np.argmin(np.abs(sp.omega - spec.omega)))
    dip = sp.abs_minus[k] < sp.abs_plus[k]
    ok = len(rep.points) >= 1 and pair.ratio <= 1e-6 and all(near) and dip and dt < 300
    record(2, "acceleration-induced transparency", ok,
           f"{len(rep.points)} point(s) at Omega={spec.omega:.6g}, best (s1, T2)=({best.s1:.6f}, {best.T2:.6f}), "
           f"|I-/I+|={pair.ratio:.2e} (<= 1e-6), peaks at 1 and 2 within one step: {all(near)}, dip: {dip}, "
           f"{dt:.1f}s (< 300s)")


def test_3_kms():
    t = time.perf_counter()
    rep = thermal_spectrum_check(UnruhSpec(a=1.0, omegas=(0.5, 1.0, 1.5, 2.0, 2.5, 3.0)))
    dt = time.perf_counter() - t
    ok = rep.max_deviation < 0.02 and rep.slope_deviation < 0.02 and dt < 120
    record(3, "detailed balance at a=1", ok,
           f"max rel dev {rep.max_deviation:.2e} (< 2%), slope {rep.slope:.6f} vs {-2 * math.pi:.6f} "
           f"(rel {rep.slope_deviation:.2e} < 2%), {dt:.1f}s (< 120s)")


def test_4_einstein():
    pair = AmplitudePair(0.37 - 0.81j, 1.23 + 0.05j)
    ctx = ProbabilityContext(G=0.2, convention=BARE)
    base = fock_probabilities(pair, 0, ctx)["stimulated_unruh"]
    spont_em = emission_probabilities(pair, 0, ctx)["stimulated_emission"]
    worst = 0.0
    for n in (0, 1, 5, 100):
        worst = max(worst, abs(fock_probabilities(pair, n, ctx)["stimulated_unruh"] / ((n + 1) * base) - 1))
        worst = max(worst, abs(emission_probabilities(pair, n, ctx)["stimulated_emission"] / ((n + 1) * spont_em) - 1))
        if n:
            worst = max(worst, abs(fock_probabilities(pair, n, ctx)["absorption"] / (n * spont_em) - 1))
    record(4, "Einstein and stimulation relations", worst <= 1e-12,
           f"n in {{0,1,5,100}}, worst rel deviation {worst:.1e} (<= 1e-12)")


def test_5_coherent():
    ctx = ProbabilityContext()
    pair = AmplitudePair(0.6 + 0.2j, -0.3 + 0.9j)
    spont_exact = coherent_excitation_probability(pair, 0, ctx) == fock_probabilities(pair, 0, ctx)["stimulated_unruh"]
    lim = abs(catalysis_fraction(AmplitudePair(0.6 + 0.2j, 0j), 3) - 0.9)
    rep, _ = demo()
    best = rep.best
    tp = eval_pair(rep.spec.phase_function(best.s1, best.T2), rep.spec.omega, rep.spec.regularization)
    worst = 0.0
    for alpha in (0.5, 3.0, 10.0 * np.exp(0.3j)):
        a2 = abs(alpha) ** 2
        worst = max(worst, abs(catalysis_fraction(tp, alpha) - a2 / (1 + a2)))
    ok = spont_exact and lim <= 1e-12 and worst <= tp.ratio
    record(5, "coherent-state formulas", ok,
           f"P_alpha(0) == spontaneous: {spont_exact}; |fraction - 0.9| = {lim:.1e} (<= 1e-12); "
           f"at transparency |fraction - |a|^2/(1+|a|^2)| = {worst:.1e} <= |I-/I+| = {tp.ratio:.1e}")


def test_6_trajectories():
    rng = np.random.default_rng(7)
    pfs = [make_piecewise_alpha(1, 2, 1.5, 1, 3, 1)]
    for _ in range(50):
        T1 = rng.uniform(0.5, 5)
        pfs.append(make_piecewise_alpha(*rng.uniform(0.2, 4, 3), T1, T1 + rng.uniform(0.1, 15), rng.uniform(0.5, 3)))
    rep, _ = demo()
    pfs.append(rep.spec.phase_function(rep.best.s1, rep.best.T2))
    norm = phase = 0.0
    for pf in pfs:
        traj = reconstruct_trajectory(pf, -5.0, pf.knots[-1] + 5.0, 2001)
        norm = max(norm, check_timelike(traj))
        phase = max(phase, check_phase_consistency(traj))
    flat = 0.0
    for s in (0.3, 1.0, 2.7):
        for pf in (PhaseFunction.inertial(1.3, s), make_piecewise_alpha(s, s, s, 1.0, 4.0, 1.3)):
            traj = reconstruct_trajectory(pf, -3.0, 7.0, 101)
            flat = max(flat, float(np.ptp(traj.velocity, axis=0).max()))
    ok = norm < 1e-10 and phase < 1e-10 and flat == 0.0
    record(6, "trajectory physicality", ok,
           f"{len(pfs)} trajectories, max|u.u-1|={norm:.1e}, max|k.u-alpha_dot|={phase:.1e} (< 1e-10), "
           f"constant-slope velocity spread {flat:.1e}")


def test_7_inertial_limits():
    rest = PhaseFunction.inertial(1.0)
    lines = []
    ok = True
    for eps in (1e-2, 1e-3, 1e-4):
        reg = Regularization.adiabatic(eps)
        m = eps * abs(eval_I(rest, 1.0, -1, reg))
        p = abs(eval_I(rest, 1.0, +1, reg))
        bound = 2 * eps / (eps**2 + 4.0) * (1 + 1e-6)
        ok &= abs(m - 2) / 2 < 1e-3 and p <= bound
        lines.append(f"eps={eps:g}: eps|I-|={m:.6f}, |I+|={p:.3e} <= {bound:.3e}")
    record(7, "inertial limits", ok, "; ".join(lines))


def _cli(args):
    return subprocess.run([sys.executable, "-m", "unruh_lab.cli", *args], capture_output=True, text=True)


def test_8_determinism():
    commands = {
        "scan": None,
        "find-transparency": None,
        "reconstruct": None,
        "unruh-check": None,
        "probability": {"amplitude_pair": {"i_plus": [0.5, 0.1], "i_minus": [0.0, 1e-9]},
                        "state": {"type": "coherent", "value": [3, 0]}},
    }
    same = True
    codes = []
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for cmd, cfg in commands.items():
            extra = []
            if cfg is not None:
                path = tmp / f"{cmd}.json"
                path.write_text(json.dumps(cfg))
                extra = ["--config", str(path)]
            blobs = []
            for i, threads in enumerate((1, 4, 1, 4)):
                out = tmp / f"{cmd}-{i}"
                res = _cli([cmd, "--out", str(out), "--threads", str(threads), *extra])
                codes.append(res.returncode)
                blobs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            same &= all(b == blobs[0] for b in blobs)
    ok = same and set(codes) == {0}
    record(8, "CLI determinism", ok,
           f"{len(commands)} subcommands x 4 runs (--threads 1,4,1,4): byte-identical {same}, exit codes {sorted(set(codes))}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
