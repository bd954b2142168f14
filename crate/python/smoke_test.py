#!/usr/bin/env python3
"""Smoke test for the skyplace_py extension module.

Locates the cdylib built by cargo (release preferred, then debug), stages it
under an importable name, and exercises the bound API end to end on a small
scenario. Build the module first:

    cargo build --release -p skyplace-python

then run:

    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO_ROOT = Path(__file__).resolve().parent.parent


def stage_module() -> None:
    """Copy the built cdylib next to a temp dir on sys.path as skyplace_py.so."""
    candidates = [
        REPO_ROOT / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("libskyplace_py.so", "libskyplace_py.dylib", "skyplace_py.dll")
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit(
            "skyplace_py cdylib not found; run `cargo build --release -p skyplace-python` first"
        )
    stage = Path(tempfile.mkdtemp(prefix="skyplace_py_"))
    suffix = ".pyd" if built.suffix == ".dll" else ".so"
    shutil.copy2(built, stage / f"skyplace_py{suffix}")
    sys.path.insert(0, str(stage))


def approx(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main() -> None:
    stage_module()
    import skyplace_py as sp

    # Channel-level helpers.
    sv = sp.steering_vector(0.0, 6)
    assert len(sv) == 6
    assert all(approx(v.real, 1 / math.sqrt(6), 1e-12) and approx(v.imag, 0.0, 1e-12) for v in sv)
    assert approx(sum(abs(v) ** 2 for v in sv), 1.0, 1e-12)
    assert approx(sp.distance((0, 0, 0), (3, 4, 12)), 13.0, 1e-15)
    assert approx(sp.dbm_to_mw(-35.0), 10 ** (-3.5), 1e-12)
    assert approx(sp.linear_to_db(sp.db_to_linear(-6.38)), -6.38, 1e-12)

    # Reference-scale combination count.
    cfg = sp.Config()
    assert sp.combination_count(cfg) == 160_000

    # Small scenario end to end, nudged to a deliberately easy threshold.
    cfg = sp.Config.parse(
        "region_rows = 1\n"
        "region_cols = 2\n"
        "num_uavs = 2\n"
        "users_per_region = 3\n"
        "grid_nx = 2\n"
        "grid_ny = 1\n"
        "grid_nz = 2\n"
        "seed = 11\n"
        "gamma_th_db = -20\n"
    )
    result = sp.solve(cfg, method="lp")
    assert result.combination_count == 16
    assert result.placement.feasible
    assert len(result.placement.positions) == 2
    assert len(result.placement.sinrs_db) == 6
    assert all(s >= -20.0 for s in result.placement.sinrs_db)
    assert result.placement.min_sinr_db == min(result.placement.sinrs_db)
    for (_x, _y, z) in result.placement.positions:
        assert 22.0 <= z <= 36.0
    assert len(result.users) == 6
    assert dict(result.timing_ms)["total"] > 0.0

    # Exhaustive method agrees on the verdict; repeat runs are identical.
    brute = sp.solve(cfg, method="brute")
    assert brute.placement.feasible == result.placement.feasible
    again = sp.solve(cfg, method="lp")
    assert again.placement.positions == result.placement.positions
    assert again.placement.sinrs_db == result.placement.sinrs_db

    # Sweep: feasible count grows as the threshold drops.
    rows = sp.sweep(cfg, -2.0, -12.0, steps=6)
    assert len(rows) == 6
    counts = [r.feasible_count for r in rows]
    assert counts == sorted(counts)

    # Config errors surface as ValueError.
    try:
        sp.Config.parse("no_such_key = 1\n")
    except ValueError as e:
        assert "no_such_key" in str(e)
    else:
        raise AssertionError("unknown key must raise ValueError")

    print("skyplace_py smoke test: all checks passed")


if __name__ == "__main__":
    main()
