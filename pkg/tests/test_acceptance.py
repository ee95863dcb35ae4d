"""Acceptance criteria, one test per criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion is reported rather than hidden.
"""

import math
import subprocess
import sys

import numpy as np
import pytest
from scipy.linalg import subspace_angles

from sipcheck.auerbach import auerbach_search
from sipcheck.checker import (
    Sampler,
    adjoint_abelian_gap,
    adjoint_abelian_residual,
    check_isometry,
    check_transversal_normal,
    direct_sum_defect,
    lemma_decomposition_residual,
    power_identity_residual,
    verify_theorem,
)
from sipcheck.geometry import (
    ellipse_fit_residual,
    lipschitz_scan,
    make_frame,
    ode_residual,
    uniform_continuity_probe,
)
from sipcheck.norms import NormSpec, build_direct_sum, norm_eval
from sipcheck.sip import sip_axiom_report, sip_eval
from sipcheck.spectral import spectral_decompose

from corpus import (
    adversarial_pairs,
    cli_commands,
    corpus,
    seeded_rotation,
    seeded_spd,
    shrinking_pairs,
    straddling_pair,
    write_cli_inputs,
)
from test_auerbach import matches_up_to_sign_and_order, q_gram_schmidt

LP4 = NormSpec.lp(4, 2)
E1, E2 = np.array([1.0, 0.0]), np.array([0.0, 1.0])
# 30-digit evaluation of |f'(x) + x f(x) / (1 - x^2)| for f = (1 - x^4)^(1/4) at x = 0.5
L4_ODE_ORACLE = 0.524797245670781


def test_criterion_01_axioms(record):
    specs = [NormSpec.lp(p, d) for p in (1.5, 2, 3, 4) for d in (2, 3, 5)]
    specs += [NormSpec.ellipsoid(seeded_spd(n, 100 + n)) for n in (2, 3, 5)]
    specs += [
        build_direct_sum([NormSpec.lp(4, 2), NormSpec.lp(3, 1)]),
        build_direct_sum([NormSpec.ellipsoid(seeded_spd(2, 7)), NormSpec.lp(1.5, 3)]),
    ]
    worst = max(sip_axiom_report(s, 256, seed=i).max_residual for i, s in enumerate(specs))
    ok = record(1, worst <= 1e-8, f"{len(specs)} norms x 256 samples, worst axiom residual {worst:.2e}")
    assert ok


def test_criterion_02_biconditional(record):
    items = corpus()
    operators = {name.split("/")[1] for name, _, _ in items}
    norms_ = {name.split("/")[0] for name, _, _ in items}
    bad = [name for name, spec, A in items if not verify_theorem(spec, A, Sampler(seed=7), 1e-7).consistent]
    ok = record(2, not bad and len(operators) >= 40 and len(norms_) >= 4,
                f"{len(items)} cases, {len(operators)} operators, {len(norms_)} norms, "
                f"{len(bad)} inconsistent")
    assert ok, bad


def test_criterion_03_non_example(record):
    A = np.diag([2.0, 1.0])
    x = np.array([1.0, 1.0])
    gap = adjoint_abelian_gap(LP4, A, x, x)
    hand = abs(3 / math.sqrt(2) - 9 / math.sqrt(17))
    report = verify_theorem(LP4, A)
    defect = direct_sum_defect(LP4, [E1, E2], [E1, E2])
    ok = (abs(gap - hand) <= 1e-9 and not report.verdicts["aa"]
          and not report.verdicts["cond1"] and report.cond1_residual >= 0.1
          and abs(defect - (2 - math.sqrt(2))) <= 1e-12)
    record(3, ok, f"gap {gap:.12f} (hand {hand:.12f}), cond1 defect {report.cond1_residual:.4f}, "
                  f"witness defect {defect:.12f}")
    assert ok


def test_criterion_04_swap_example(record):
    A = np.array([[0.0, 2.0], [2.0, 0.0]])
    aa = adjoint_abelian_residual(LP4, A)
    tn = check_transversal_normal(LP4, [[1, 1]], [[1, -1]])
    iso = check_isometry(LP4, A / 2)
    ok = record(4, aa <= 1e-9 and tn <= 1e-10 and iso <= 1e-12,
                f"aa {aa:.2e}, transversal {tn:.2e}, isometry {iso:.2e}")
    assert ok


def test_criterion_05_decomposition_identities(record):
    rng = np.random.default_rng(2024)
    worst_lemma = worst_power = 0.0
    members = 0
    for name, spec, A in corpus():
        sd = spectral_decompose(A)
        if adjoint_abelian_residual(spec, A, Sampler(count=128), sd) > 1e-7:
            continue
        members += 1
        top = sd.Ebar[0]
        for _ in range(256):
            x = rng.standard_normal(spec.dim)
            B = sd.Ebar[rng.integers(sd.k)]
            z = B @ rng.standard_normal(B.shape[1])
            worst_lemma = max(worst_lemma, lemma_decomposition_residual(spec, A, z, x, sd))
            z1 = top @ rng.standard_normal(top.shape[1])
            for n in (1, 2, 5, 10):
                worst_power = max(worst_power, power_identity_residual(spec, A, z1, x, n, sd))
    ok = record(5, members > 0 and worst_lemma <= 1e-7 and worst_power <= 1e-7,
                f"{members} adjoint abelian members, lemma {worst_lemma:.2e}, "
                f"power identity {worst_power:.2e}")
    assert ok


def test_criterion_06_ode(record):
    lp2 = NormSpec.lp(2, 2)
    frame2 = make_frame(lp2, E1, E2)
    euclid = max(ode_residual(lp2, frame2, x0).residual
                 for x0 in (0.0, 0.25, -0.25, 0.5, -0.5, 0.75, -0.75))
    at_zero = ode_residual(lp2, frame2, 0.0).residual
    l4 = ode_residual(LP4, make_frame(LP4, E1, E2), 0.5).residual
    ok = record(6, euclid <= 1e-6 and at_zero <= 1e-6 and abs(l4 - L4_ODE_ORACLE) <= 0.02,
                f"Euclidean max {euclid:.2e}, x0=0 {at_zero:.2e}, l4 {l4:.10f} "
                f"(oracle {L4_ODE_ORACLE:.10f})")
    assert ok


def test_criterion_07_ellipse_fit(record):
    rng = np.random.default_rng(77)
    quadratic = [NormSpec.lp(2, d) for d in (2, 3, 5)]
    quadratic += [NormSpec.ellipsoid(seeded_spd(n, 200 + n)) for n in (2, 3, 5)]
    worst = 0.0
    for spec in quadratic:
        for _ in range(8):
            frame = make_frame(spec, *rng.standard_normal((2, spec.dim)))
            worst = max(worst, ellipse_fit_residual(spec, frame, 64))
    worst_ds = 0.0
    for parts in ([NormSpec.lp(4, 2), NormSpec.lp(1.5, 2)],
                  [NormSpec.ellipsoid(np.diag([1.0, 4.0])), NormSpec.lp(3, 1)]):
        spec = build_direct_sum(parts)
        d0 = parts[0].dim
        for _ in range(8):
            u = np.zeros(spec.dim)
            v = np.zeros(spec.dim)
            u[:d0] = rng.standard_normal(d0)
            v[d0:] = rng.standard_normal(spec.dim - d0)
            worst_ds = max(worst_ds, ellipse_fit_residual(spec, make_frame(spec, u, v), 64))
    l4 = ellipse_fit_residual(LP4, make_frame(LP4, E1, E2), 64)
    ok = record(7, worst <= 1e-9 and worst_ds <= 1e-9 and l4 >= 0.01,
                f"quadratic sections {worst:.2e}, cross-part {worst_ds:.2e}, l4 {l4:.6f}")
    assert ok


def test_criterion_08_lipschitz_dichotomy(record):
    details, ok = [], True
    for p in (2, 3, 4):
        spec = NormSpec.lp(p, 2)
        est = lipschitz_scan(spec, E1)
        gaps = uniform_continuity_probe(spec, E1, shrinking_pairs(spec, 40)).gaps
        ok &= est.stabilized(0.9, 1.1) and gaps[-1] < 1e-6
        details.append(f"p={p} ratio {est.last_ratio:.4f} gap {gaps[-1]:.1e}")
    lp15 = NormSpec.lp(1.5, 2)
    ts = [10.0 ** -k for k in range(2, 11)]
    report = uniform_continuity_probe(lp15, E1, adversarial_pairs(lp15, E1, ts))
    y, z = straddling_pair(lp15, 1e-4)
    q = abs(sip_eval(lp15, E1, y) - sip_eval(lp15, E1, z)) / norm_eval(lp15, y - z)
    ok &= all(abs(g - 1) <= 0.05 for g in report.gaps) and report.distances[-1] < 1e-3 and q > 50
    details.append(f"p=1.5 gaps in [{min(report.gaps):.4f}, {max(report.gaps):.4f}] at "
                   f"distance {report.distances[-1]:.1e}, straddling quotient {q:.1f}")
    assert record(8, ok, "; ".join(details))


def test_criterion_09_auerbach(record):
    details, ok = [], True
    for seed in range(3):
        R = seeded_rotation(3, seed)
        Q = R.T @ np.diag([1.0, 3.0, 9.0]) @ R
        for spec in (NormSpec.ellipsoid(Q), NormSpec.ellipsoid(seeded_spd(3, 300 + seed))):
            basis = auerbach_search(spec, seed=seed, restarts=3)
            oracle = q_gram_schmidt(spec.Q_array, basis.vectors)
            ok &= basis.pair_residual <= 1e-6
            ok &= matches_up_to_sign_and_order(basis.vectors, oracle, 1e-5)
    details.append("ellipsoids match the Gram oracle" if ok else "ellipsoid mismatch")
    for p in (1.5, 4):
        basis = auerbach_search(NormSpec.lp(p, 3), seed=0, restarts=4)
        std = matches_up_to_sign_and_order(basis.vectors, np.eye(3), 1e-5)
        ok &= std
        details.append(f"lp({p},3) standard basis {'recovered' if std else 'not recovered'} "
                       f"(det {basis.det_value:.4f}, pair residual {basis.pair_residual:.1e})")
    assert record(9, ok, "; ".join(details))


def test_criterion_10_cli_determinism(record, tmp_path):
    paths = write_cli_inputs(tmp_path)
    differing = []
    for argv in cli_commands(paths):
        outs = [subprocess.run([sys.executable, "-m", "sipcheck", *argv], capture_output=True,
                               check=False).stdout for _ in range(2)]
        if outs[0] != outs[1] or not outs[0]:
            differing.append(argv[0])
    ok = record(10, not differing, f"{len(cli_commands(paths))} subcommands rerun in fresh "
                                   f"processes, {len(differing)} differ")
    assert ok, differing
