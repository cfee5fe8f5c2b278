#!/usr/bin/env python3
"""Regenerate the packaged aggregation fixtures.

Expected weights and models are computed here with exact rational
arithmetic (fractions.Fraction) as an independent check on the package's
float implementation; the two routes share no code. Inputs are dyadic
rationals so every value converts to binary64 without rounding.

Usage: python tools/gen_fixtures.py
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

OUT_DIR = Path(__file__).resolve().parent.parent / "src" / "fedsim" / "fixtures"

F = Fraction


def fedavg(sizes):
    total = sum(sizes)
    return [F(s, total) for s in sizes], "none"


def fedcostwavg(sizes, histories, alpha):
    a = F(alpha)
    total = sum(sizes)
    ks = [F(h[-2]) / F(h[-1]) for h in histories]
    ksum = sum(ks)
    return [a * F(s, total) + (1 - a) * k / ksum for s, k in zip(sizes, ks)], "none"


def fedpidavg(sizes, histories, coeffs, window=6, k_abs=False):
    a, b, g = (F(c) for c in coeffs)
    total = sum(sizes)
    ks = [F(h[-2]) - F(h[-1]) for h in histories]
    if k_abs:
        ks = [abs(k) for k in ks]
    ksum = sum(ks)
    ms = [sum(F(c) for c in h[-min(window, len(h)):]) for h in histories]
    msum = sum(ms)
    fallback = "none"
    if ksum == 0:
        a, b = a + b, F(0)
        fallback = "degenerate_normalizer"
    if msum == 0:
        a, g = a + g, F(0)
        fallback = "degenerate_normalizer"
    weights = []
    for s, k, m in zip(sizes, ks, ms):
        w = a * F(s, total)
        if b:
            w += b * k / ksum
        if g:
            w += g * m / msum
        weights.append(w)
    return weights, fallback


def expected_model(weights, models):
    dim = len(models[0])
    out = []
    for d in range(dim):
        out.append(float(sum(w * F(m[d]) for w, m in zip(weights, models))))
    return out


def fixture(name, strategy, sizes, models, histories, params, weights, fallback):
    return {
        "name": name,
        "strategy": strategy,
        "params": params,
        "inputs": [
            {
                "client_id": i,
                "size": s,
                "model": list(m),
                "cost_history": list(h),
            }
            for i, (s, m, h) in enumerate(zip(sizes, models, histories))
        ],
        "expected": {
            "weights": [float(w) for w in weights],
            "model": expected_model(weights, models),
            "fallback": fallback,
        },
    }


def build():
    cases = []

    sizes = [2, 5, 9]
    models = [[1.0, -2.0], [0.5, 4.0], [-1.25, 0.25]]
    histories = [[1.0, 0.5], [2.0, 1.5], [1.5, 1.25]]
    w, fb = fedavg(sizes)
    cases.append(
        fixture("fedavg_three_clients", "fedavg", sizes, models, histories, {}, w, fb)
    )

    sizes = [7]
    models = [[2.0, 4.0]]
    histories = [[1.0, 0.5]]
    w, fb = fedavg(sizes)
    cases.append(
        fixture("fedavg_single_client", "fedavg", sizes, models, histories, {}, w, fb)
    )

    sizes = [1, 3]
    models = [[1.0, 0.0], [0.0, 1.0]]
    histories = [[2.0, 1.0], [2.0, 2.0]]
    w, fb = fedcostwavg(sizes, histories, 0.5)
    cases.append(
        fixture(
            "fedcostwavg_ratio_form",
            "fedcostwavg",
            sizes,
            models,
            histories,
            {"cw_alpha": 0.5},
            w,
            fb,
        )
    )

    sizes = [4, 2, 2]
    models = [[1.5, -0.5, 2.0], [0.25, 0.25, 0.25], [-1.0, 1.0, -1.0]]
    histories = [[4.0, 2.0, 1.0], [3.0, 1.5, 1.5], [2.0, 2.5, 2.0]]
    w, fb = fedcostwavg(sizes, histories, 0.25)
    cases.append(
        fixture(
            "fedcostwavg_quarter_alpha",
            "fedcostwavg",
            sizes,
            models,
            histories,
            {"cw_alpha": 0.25},
            w,
            fb,
        )
    )

    sizes = [1, 1]
    models = [[1.0, 2.0], [3.0, 4.0]]
    histories = [[1.0, 1.0, 1.0, 1.0, 1.0, 0.5], [2.0, 2.0, 2.0, 2.0, 2.0, 2.0]]
    w, fb = fedpidavg(sizes, histories, (0.45, 0.45, 0.1))
    cases.append(
        fixture(
            "fedpidavg_two_clients",
            "fedpidavg",
            sizes,
            models,
            histories,
            {"coeffs": [0.45, 0.45, 0.1]},
            w,
            fb,
        )
    )

    sizes = [3, 5, 2]
    models = [[0.5, 0.5], [1.0, -1.0], [2.0, 0.0]]
    histories = [
        [8.0, 4.0, 2.0, 1.0],
        [6.0, 5.0, 4.5, 4.25],
        [3.0, 3.5, 3.25, 3.5],
    ]
    w, fb = fedpidavg(sizes, histories, (0.45, 0.45, 0.1), window=3)
    cases.append(
        fixture(
            "fedpidavg_short_window",
            "fedpidavg",
            sizes,
            models,
            histories,
            {"coeffs": [0.45, 0.45, 0.1], "window": 3},
            w,
            fb,
        )
    )

    sizes = [2, 6]
    models = [[1.0, 1.0], [-1.0, 1.0]]
    histories = [[1.5, 1.5], [2.5, 2.5]]
    w, fb = fedpidavg(sizes, histories, (0.45, 0.45, 0.1))
    cases.append(
        fixture(
            "fedpidavg_flat_histories",
            "fedpidavg",
            sizes,
            models,
            histories,
            {"coeffs": [0.45, 0.45, 0.1]},
            w,
            fb,
        )
    )

    sizes = [4, 4]
    models = [[0.75, -0.25], [0.25, 0.5]]
    histories = [[1.0, 2.0], [4.0, 1.0]]
    w, fb = fedpidavg(sizes, histories, (0.5, 0.25, 0.25), k_abs=True)
    cases.append(
        fixture(
            "fedpidavg_k_abs",
            "fedpidavg",
            sizes,
            models,
            histories,
            {"coeffs": [0.5, 0.25, 0.25], "k_abs": True},
            w,
            fb,
        )
    )

    return cases


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for case in build():
        path = OUT_DIR / f"{case['name']}.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(case, fh, indent=2)
            fh.write("\n")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
