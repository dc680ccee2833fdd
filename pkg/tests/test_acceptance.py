"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary."""
import time

import numpy as np
import pytest

from conftest import separable_set
from shm.appendix import verify_appendix
from shm.fileio import dump_model, parse_model
from shm.linalg import condensed_svd, min_eigenvalue_bound
from shm.qp import QpProblem, brute_force_oracle, solve
from shm.reduction import consistency_report, full_objective, reduce, reduced_objective
from shm.train import KernelSpec, TrainConfig, hessian, kernel_matrix, projector, train

INSTANCES = 100
PROPERTY_SECONDS = 30.0


def check(log, name, ok, detail=""):
    log.append(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def appendix_report():
    return verify_appendix(TrainConfig(qp_mode="script"))


def test_c1_appendix_replication(appendix_report, acceptance_log):
    names = ["inv_xxt", "G[1,1]", "K[1,1]", "H[1,1]", "H[1,2]", "W", "w0", "b",
             "R (h at training points)", "S (supporting hyperplanes)", "runtime"]
    items = [appendix_report.item(n) for n in names]
    failed = [i.name for i in items if not i.passed]
    worst = max((i.delta / i.tol for i in items if i.tol > 0 and i.name != "runtime"))
    check(acceptance_log, "C1 appendix replication", not failed,
          f"worst delta/tol={worst:.3f}, runtime={appendix_report.seconds:.3f}s"
          + (f", failed={failed}" if failed else ""))


def test_c2_alpha(appendix_report, acceptance_log):
    item = appendix_report.item("alpha")
    check(acceptance_log, "C2 alpha multiset / dual objective", item.passed, item.detail)


def test_c3_table_signs(appendix_report, acceptance_log):
    item = appendix_report.item("signs")
    check(acceptance_log, "C3 sign agreement on 16 training points", item.passed, item.detail)


@pytest.fixture(scope="module")
def property_suite():
    """Run every randomized property once; the whole block is timed."""
    rng = np.random.default_rng(20240601)
    worst = {}

    def note(key, value):
        worst[key] = max(worst.get(key, 0.0), value)

    start = time.perf_counter()
    for _ in range(INSTANCES):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(m, 9))
        gp = projector(rng.standard_normal((m, n)))
        note("sym", float(np.max(np.abs(gp.g - gp.g.T))))
        note("idem", float(np.max(np.abs(gp.g @ gp.g - gp.g))))

    kernels = [KernelSpec.linear(), KernelSpec.polynomial(2, 1.0), KernelSpec.rbf(0.5)]
    for trial in range(INSTANCES):
        ts = separable_set(rng)
        h = hessian(ts.d, kernel_matrix(ts.y, kernels[trial % 3]), projector(ts.x).g)
        note("psd", -min_eigenvalue_bound(h))

    for mode in ("script", "kkt", "box"):
        for _ in range(INSTANCES):
            ts = separable_set(rng, with_threshold=mode != "script", max_n=6)
            h = hessian(ts.d, kernel_matrix(ts.y), projector(ts.x).g)
            p = QpProblem(h, d=None if mode == "script" else ts.d,
                          upper=float(rng.uniform(0.1, 10.0)) if mode == "box" else None)
            note(f"qp-{mode}", abs(solve(p).objective - brute_force_oracle(p).objective))

    hard_cfg = TrainConfig(qp_mode="kkt", sv_truncation=False)
    soft_cfg = TrainConfig(qp_mode="kkt", c=1e9, sv_truncation=False)
    for _ in range(INSTANCES):
        ts = separable_set(rng)
        model = train(ts, cfg=hard_cfg)
        hv = model.decide(ts.x, ts.y)
        alpha = np.zeros(ts.n)
        alpha[model.sv_index] = model.sv_alpha
        note("primal", float(np.max(1 - ts.d * hv)))
        note("slack", float(np.max(np.abs(alpha * (ts.d * hv - 1)))))

        px = rng.standard_normal((ts.m, 20))
        py = rng.standard_normal((ts.z, 20))
        gap = np.abs(model.decide(px, py, path="explicit") - model.decide(px, py, path="expansion"))
        note("paths", float(gap.max()))

        soft = train(ts, cfg=soft_cfg)
        note("soft", abs(soft.meta.objective - model.meta.objective))
    return worst, time.perf_counter() - start


PROPERTIES = [
    ("C4a G symmetry exact", "sym", 0.0),
    ("C4a G idempotency", "idem", 1e-8),
    ("C4b H PSD (-min eigenvalue)", "psd", 1e-8),
    ("C4c QP vs oracle, script", "qp-script", 1e-8),
    ("C4c QP vs oracle, kkt", "qp-kkt", 1e-8),
    ("C4c QP vs oracle, box", "qp-box", 1e-8),
    ("C4d hard-margin primal feasibility (1 - d h)", "primal", 1e-6),
    ("C4d complementary slackness", "slack", 1e-5),
    ("C4e explicit vs expansion decision", "paths", 1e-9),
    ("C4f C=1e9 vs hard-margin objective", "soft", 1e-6),
]


@pytest.mark.parametrize("name, key, tol", PROPERTIES, ids=[p[1] for p in PROPERTIES])
def test_c4_properties(property_suite, acceptance_log, name, key, tol):
    worst, _ = property_suite
    value = worst[key]
    check(acceptance_log, name, value <= tol, f"worst={value:.3e} tol={tol:g} over {INSTANCES} instances")


def test_c4_runtime(property_suite, acceptance_log):
    _, seconds = property_suite
    check(acceptance_log, "C4 property suite runtime", seconds < PROPERTY_SECONDS,
          f"{seconds:.2f}s < {PROPERTY_SECONDS:g}s")


def test_c5_reduction(appendix_set, acceptance_log):
    rng = np.random.default_rng(7)
    sv_gap = 0.0
    for _ in range(INSTANCES):
        m = int(rng.integers(1, 4))
        svd = condensed_svd(projector(rng.standard_normal((m, int(rng.integers(m, 9))))).g)
        sv_gap = max(sv_gap, float(np.max(np.abs(svd.s - 1))))
    rank1_gap = 0.0
    for _ in range(INSTANCES):
        n = int(rng.integers(2, 9))
        gp = projector(rng.standard_normal((1, n)))
        k = kernel_matrix(rng.standard_normal((int(rng.integers(1, 4)), n)))
        d = rng.choice([-1.0, 1.0], n)
        rp = reduce(gp, d, k)
        alpha = rng.random(n)
        rank1_gap = max(rank1_gap, abs(reduced_objective(rp, alpha) - full_objective(gp, d, k, alpha)))
    ts = appendix_set
    gp = projector(ts.x)
    k = kernel_matrix(ts.y)
    report = consistency_report(reduce(gp, ts.d, k), gp, ts.d, k, 100, seed=0)
    emitted = report.rank >= 2 and np.isfinite(report.max_gap) and np.isfinite(report.mean_gap)
    ok = sv_gap <= 1e-8 and rank1_gap <= 1e-10 and emitted
    check(acceptance_log, "C5 condensed-SVD reduction", ok,
          f"max|s-1|={sv_gap:.2e}, rank-1 gap={rank1_gap:.2e}, "
          f"rank-{report.rank} report max={report.max_gap:.3e} mean={report.mean_gap:.3e}")


def test_c6_serialization(appendix_model, acceptance_log):
    back = parse_model(dump_model(appendix_model))
    rng = np.random.default_rng(6)
    x = rng.uniform(-10, 10, (2, 100))
    y = rng.uniform(-15, 15, (2, 100))
    same = np.array_equal(back.decide(x, y), appendix_model.decide(x, y))
    check(acceptance_log, "C6 model round trip bit-identical on 100 probes", same)
