"""Acceptance gate: one check per criterion, printed pass/fail.

Tolerances are pinned here; the slow relative-efficiency and determinism
checks run last.  Budget: the whole module stays well inside the stated
per-criterion runtimes (the corner-ratio check dominates at ~15 min).
"""

import time

import pytest

from zaklink.validation import (
    check_crystallization_behavior,
    check_determinism,
    check_ici_scaling,
    check_ofdm_oracle,
    check_overhead_formulas,
    check_pnr_formula,
    check_relative_efficiency,
    check_transforms,
    check_twisted_algebra,
    check_zak_oracle,
)

_RESULTS = []


def _report(name, passed, detail, elapsed):
    line = f"{'PASS' if passed else 'FAIL'}  {name}  [{detail}]  ({elapsed:.1f}s)"
    print(line)
    _RESULTS.append(line)
    assert passed, line


def _run(check, budget_s):
    t0 = time.perf_counter()
    name, passed, detail = check()
    elapsed = time.perf_counter() - t0
    _report(name, passed, detail, elapsed)
    assert elapsed < budget_s, f"{name} exceeded its {budget_s}s budget ({elapsed:.1f}s)"


def test_p1_transform_pair():
    _run(check_transforms, 1.0)


def test_p2_twisted_convolution_algebra():
    _run(check_twisted_algebra, 5.0)


def test_p3_zak_oracle_equivalence():
    _run(check_zak_oracle, 120.0)


def test_p4_ofdm_oracle_equivalence():
    _run(check_ofdm_oracle, 60.0)


def test_p5_overhead_formulas():
    _run(check_overhead_formulas, 1.0)


def test_p6_pnr_formula():
    _run(check_pnr_formula, 1.0)


def test_p7_crystallization_behavior():
    _run(check_crystallization_behavior, 120.0)


def test_p8_ici_scaling():
    _run(check_ici_scaling, 10.0)


@pytest.mark.slow
def test_p9_relative_efficiency_corners():
    _run(check_relative_efficiency, 1800.0)


@pytest.mark.slow
def test_p10_determinism(tmp_path):
    _run(lambda: check_determinism(str(tmp_path)), 600.0)
