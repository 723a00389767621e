"""Oracle-backed verification suite behind the ``verify`` CLI verb.

Each property compares the fast decoding path against exhaustive
enumeration on small instances and reports a single pass/fail outcome.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .harness import run_fixed_erasure
from .oracle import (reroute_into_forest, solutions_by_syndrome,
                     verify_coset_equiprobability)
from .peeling import grow_forest, peel
from .surface import build_planar, build_torus, restricted_boundary


@dataclass(frozen=True)
class VerificationResult:
    name: str
    passed: bool
    detail: str


def _sample_erasure(s, rng, max_edges: int) -> frozenset[int]:
    qubits = np.asarray(sorted(s.qubit_edges))
    k = int(rng.integers(1, min(max_edges, len(qubits)) + 1))
    return frozenset(rng.choice(qubits, size=k, replace=False).tolist())


def run_verification(max_edges: int = 10, samples: int = 100, seed: int = 7,
                     mc_shots: int = 4000,
                     mc_erasures: int = 6) -> list[VerificationResult]:
    rng = np.random.default_rng(seed)
    surfaces = [build_torus(3), build_planar(3, 3)]

    peel_ok = reroute_ok = coset_ok = True
    peel_detail = reroute_detail = coset_detail = ""
    checked = 0
    for s in surfaces:
        for _ in range(samples):
            erasure = _sample_erasure(s, rng, max_edges)
            forest = grow_forest(s, erasure)
            in_forest = forest.edge_set
            groups = solutions_by_syndrome(s, erasure)
            for sigma, sols in groups.items():
                a = peel(s, forest, sigma)
                contained = [b for b in sols if b <= in_forest]
                if a not in sols or contained != [a]:
                    peel_ok = False
                    peel_detail = (f"sigma {sorted(sigma)} on erasure "
                                   f"{sorted(erasure)}")
                for b in sols:
                    r, steps = reroute_into_forest(s, b, forest,
                                                   record_steps=True)
                    bnd = restricted_boundary(s, b)
                    if r != a or any(restricted_boundary(s, step) != bnd
                                     for step in steps):
                        reroute_ok = False
                        reroute_detail = f"B {sorted(b)} in {sorted(erasure)}"
                checked += 1
            report = verify_coset_equiprobability(s, erasure)
            if not report.all_equal:
                coset_ok = False
                coset_detail = f"erasure {sorted(erasure)}"

    results = [
        VerificationResult(
            "peel-matches-enumeration", peel_ok,
            peel_detail or f"{checked} syndrome groups checked"),
        VerificationResult(
            "reroute-equals-peel", reroute_ok,
            reroute_detail or "all enumerated B reroute to the peeled set"),
        VerificationResult(
            "coset-equiprobability", coset_ok,
            coset_detail or "all classes equal-sized on every erasure"),
    ]

    # Monte Carlo conditional success against the 1/N optimum
    torus = build_torus(3)
    mc_ok = True
    mc_detail = ""
    done = 0
    while done < mc_erasures:
        erasure = _sample_erasure(torus, rng, max_edges)
        report = verify_coset_equiprobability(torus, erasure)
        if not report.all_equal:
            mc_ok = False
            mc_detail = f"unequal cosets on {sorted(erasure)}"
            break
        n = report.n_total
        if n > 8:
            continue
        target = 1.0 / n
        succ = run_fixed_erasure(torus, erasure,
                                 mc_shots, int(rng.integers(2 ** 31)))
        rate = succ / mc_shots
        tol = 3.0 * np.sqrt(target * (1 - target) / mc_shots)
        if abs(rate - target) > tol + 1e-12:
            mc_ok = False
            mc_detail = (f"erasure {sorted(erasure)}: rate {rate:.4f} vs "
                         f"1/{n} = {target:.4f}")
            break
        done += 1
    results.append(VerificationResult(
        "conditional-success-1-over-N", mc_ok,
        mc_detail or f"{done} erasures within 3 sigma of 1/N"))
    return results
