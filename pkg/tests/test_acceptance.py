"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the summary lines.
"""

import json
import math

import numpy as np
import pytest

from qfingerprint import cli
from qfingerprint import linalg as la
from qfingerprint.fingerprint import (
    alice_fingerprint_basic,
    alice_fingerprint_decomp,
    bob_fingerprint_basic,
    bob_fingerprint_decomp,
    inner_product,
)
from qfingerprint.referee import RefereeConfig, copies_estimate, count_errors, required_copies
from qfingerprint.smp import accepting_coins, pad_to_square
from qfingerprint.width import (
    convw_to_rcw,
    cyclic_diagonal_decomposition,
    ip_lower_bound_check,
    svd_decomposition,
    trivial_decomposition,
    validate_convw,
    width_report,
)
from qfingerprint.zoo import (
    EqualityParams,
    build_equality_protocol,
    first_column_ones,
    ip_matrix,
    random_boolean_matrix,
    random_protocol,
)

MASTER_SEED = 777


def report(number, ok, detail):
    print(f"\n[criterion {number:>2}] {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def random_protocols(count=50):
    rng = np.random.default_rng(MASTER_SEED)
    for i in range(count):
        n = int(rng.integers(1, 5))
        L = int(rng.integers(1, 17))
        cA, cB = (int(c) for c in rng.integers(0, 4, size=2))
        yield random_protocol(n, L, cA, cB, float(rng.uniform(0.1, 0.9)), seed=[MASTER_SEED, i])


def exact_p_acc(p):
    return accepting_coins(p) / p.L


def random_matrices(count=100, max_M=16):
    rng = np.random.default_rng([MASTER_SEED, 1])
    for i in range(count):
        M = int(rng.integers(1, max_M + 1))
        yield random_boolean_matrix(M, float(rng.uniform(0.05, 0.95)), seed=[MASTER_SEED, 2, i])


def test_criterion_01_basic_inner_product():
    worst = 0.0
    for p in random_protocols():
        p_acc = exact_p_acc(p)
        U = [alice_fingerprint_basic(p, x) for x in range(p.num_inputs)]
        V = [bob_fingerprint_basic(p, y) for y in range(p.num_inputs)]
        for x, u in enumerate(U):
            for y, v in enumerate(V):
                worst = max(worst, abs(inner_product(u, v) * math.sqrt(p.MA) - p_acc[x, y]))
    report(1, worst <= 1e-10, f"basic fingerprints: max |<u|v> sqrt(MA) - p_acc| = {worst:.3g} (tol 1e-10)")


def test_criterion_02_decomposition_inner_product():
    worst = 0.0
    for p in random_protocols():
        p_acc = exact_p_acc(p)
        family = pad_to_square(p).referee
        for d in (trivial_decomposition(family), svd_decomposition(family)):
            if d.rw == 0 or d.cw == 0:
                assert not p_acc.any()
                continue
            U = [alice_fingerprint_decomp(p, d, x) for x in range(p.num_inputs)]
            V = [bob_fingerprint_decomp(p, d, y) for y in range(p.num_inputs)]
            for x, u in enumerate(U):
                for y, v in enumerate(V):
                    worst = max(worst, abs(inner_product(u, v) * d.rw * d.cw - p_acc[x, y]))
    report(2, worst <= 1e-8, f"trivial+svd decompositions: max |<u|v> rw cw - p_acc| = {worst:.3g} (tol 1e-8)")


def test_criterion_03_end_to_end_error():
    p = build_equality_protocol(EqualityParams(n=4, L=64, t=3, seed=0))
    cfg = RefereeConfig.basic(p, delta=0.25)
    trials = 1000
    bound = 0.25 + 3 * math.sqrt(0.25 * 0.75 / trials)
    root = np.random.SeedSequence(MASTER_SEED)
    errors = {1: [], 0: []}
    for x in range(p.num_inputs):
        for y in range(p.num_inputs):
            f = int(x == y)
            rng = np.random.default_rng(root.spawn(1)[0])
            errors[f].append(count_errors(p, "basic", x, y, f, cfg, trials, rng) / trials)
    worst = {f: max(v) for f, v in errors.items()}
    ok = max(worst.values()) <= bound
    report(
        3,
        ok,
        f"equality n=4 L=64 t=3, {required_copies(cfg)} copies, {trials} trials/pair: "
        f"worst error f=1 {worst[1]:.4f}, f=0 {worst[0]:.4f} (bound {bound:.4f})",
    )


def test_criterion_04_copy_scaling():
    base_est = copies_estimate(RefereeConfig(1.0))
    base = required_copies(RefereeConfig(1.0))
    parts, ok = [], True
    for g2 in (2, 4, 8):
        g = math.sqrt(g2)
        c = required_copies(RefereeConfig(g))
        dev = abs(c - g**4 * base_est)
        ok &= dev <= 1
        parts.append(f"g^2={g2}: {c} vs {g**4 * base_est:.2f} (ratio {c / base:.3f})")
    report(4, ok, "copies(g) vs g^4 copies(1) within 1: " + "; ".join(parts))


def test_criterion_05_cyclic_decomposition():
    failures = 0
    for D in random_matrices():
        cd = cyclic_diagonal_decomposition(D)
        exact = np.array_equal(sum(G @ P for G, P in zip(cd.G, cd.P)), D)
        if not (validate_convw(D, cd).ok and exact and cd.W == D.shape[0]):
            failures += 1
    report(5, failures == 0, f"100 random boolean matrices (M <= 16): {failures} cyclic decompositions failed")


def test_criterion_06_conversion():
    worst_rn = worst_cn = worst_rec = 0.0
    for D in random_matrices():
        cd = cyclic_diagonal_decomposition(D)
        d = convw_to_rcw(D, cd)
        root_w = math.sqrt(cd.W)
        worst_rn = max(worst_rn, la.row_norm(d.E[0]) - root_w)
        worst_cn = max(worst_cn, la.column_norm(d.F[0]) - root_w)
        worst_rec = max(worst_rec, d.reconstruction_error)
    ok = worst_rn <= 1e-8 and worst_cn <= 1e-8 and worst_rec <= 1e-8
    report(
        6,
        ok,
        f"max rn(E)-sqrt(W) = {worst_rn:.3g}, max cn(F)-sqrt(W) = {worst_cn:.3g}, "
        f"max reconstruction = {worst_rec:.3g}",
    )


def test_criterion_07_separating_example():
    values = {M: width_report(first_column_ones(M)).best_rcw_upper for M in (2, 4, 8, 16, 32)}
    ok = all(v <= 1 + 1e-8 for v in values.values())
    report(7, ok, "first-column-ones best rcw: " + ", ".join(f"M={M}: {v:.12g}" for M, v in values.items()))


def test_criterion_08_fact1():
    parts, ok = [], True
    for n in range(1, 7):
        rep = ip_lower_bound_check(n)
        M = rep.M
        best = width_report(ip_matrix(n)).best_rcw_upper
        good = (
            rep.signed_square_is_scaled_identity
            and abs(rep.trace_norm_signed - M**1.5) <= 1e-6 * M**1.5
            and rep.rcw_lower_bound >= (math.sqrt(M) - 1) / 2 - 1e-6
            and rep.rcw_lower_bound <= best + 1e-6
        )
        ok &= good
        parts.append(f"n={n}: {rep.rcw_lower_bound:.4g} <= {best:.4g}")
    report(8, ok, "IP lower <= upper: " + "; ".join(parts))


def test_criterion_09_bound_ladder():
    worst_upper = worst_lower = -math.inf
    for D in random_matrices():
        rep = width_report(D)
        M = D.shape[0]
        ceiling = min(math.sqrt(M), la.column_norm(D), la.operator_norm(D))
        worst_upper = max(worst_upper, rep.best_rcw_upper - ceiling)
        worst_lower = max(worst_lower, la.trace_norm(D) / M - rep.best_rcw_upper)
    ok = worst_upper <= 1e-6 and worst_lower <= 1e-6
    report(
        9,
        ok,
        f"max best - min(sqrt M, cn, ||D||) = {worst_upper:.3g}; max trace/M - best = {worst_lower:.3g}",
    )


CLI_RUNS = [
    ["simulate", "--eq", "3,16,3", "--all-pairs", "--trials", "300", "--seed", "11"],
    ["simulate", "--eq", "2,8,2", "--x", "1", "--y", "2", "--mode", "decomp:best", "--json", "--seed", "4"],
    ["analyze", "--matrix", "{ip}", "--json"],
    ["fact1", "--n", "3"],
    ["make-protocol", "--random", "2,4,2,2", "--seed", "9"],
]


def test_criterion_10_cli_determinism(tmp_path, capsys):
    ip = tmp_path / "ip.txt"
    la.save_matrix(ip, ip_matrix(3))
    mismatches = []
    for k, argv in enumerate(CLI_RUNS):
        argv = [a.format(ip=ip) for a in argv]
        out = tmp_path / f"run{k}.out"
        manifest = tmp_path / f"run{k}.json"
        assert cli.main(argv + ["--out", str(out), "--manifest", str(manifest)]) == 0
        first = out.read_bytes()
        recorded = json.loads(manifest.read_text())["argv"]
        for rep in range(2):
            out.unlink()
            assert cli.main(["replay", str(manifest)]) == 0
            if out.read_bytes() != first:
                mismatches.append(f"{argv[0]} replay {rep}")
        assert "--manifest" not in recorded
    capsys.readouterr()
    report(10, not mismatches, f"{len(CLI_RUNS)} commands replayed twice: mismatches {mismatches or 'none'}")
