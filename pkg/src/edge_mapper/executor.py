"""Bit-exact execution of a layer plan, for validating tiling decisions.

Replays the two-level loop nest a plan describes: spatial tiles over
(p_k, p_n), per-tile repetitions of the unrolled API block, and the
innermost API-shaped sub-block products.  Partial sums travel west to
east across the column split exactly like the cascade does, so a plan
whose loop bounds are wrong produces a numerically wrong result rather
than a plausible-looking one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

import numpy as np

from .aiecost import memory_feasible
from .model import DOMAIN_AIE, DOMAIN_PL, LayerPlan, ValidationError, _require

INT32_MIN = -(2 ** 31)
INT32_MAX = 2 ** 31 - 1


@dataclass(frozen=True)
class ExecTrace:
    """Result and accounting of one plan execution."""

    c: np.ndarray                  # logical (m x n) output, int32, saturation applied
    macroblock_invocations: int    # API calls actually issued
    cascade_hops: int              # west-to-east partial-sum transfers
    tile_checksums: dict           # (p_k index, p_n index) -> int sum of the tile's contribution
    saturated: int                 # elements clipped on the final 32-bit cast


def naive_gemm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Reference product with an exact wide accumulator.

    Row-by-row integer dot products, independent of any tiling; int8
    inputs cannot overflow 64-bit sums at any practical depth.
    """
    _require(a.ndim == 2 and b.ndim == 2 and a.shape[1] == b.shape[0], ValidationError,
             f"shape mismatch: {a.shape} x {b.shape}")
    a64 = a.astype(np.int64)
    b64 = b.astype(np.int64)
    out = np.empty((a.shape[0], b.shape[1]), dtype=np.int64)
    for i in range(a.shape[0]):
        out[i, :] = a64[i, :] @ b64
    return out


def _check_entry(entry: LayerPlan, a: np.ndarray, b: np.ndarray) -> None:
    _require(a.shape == (entry.m, entry.k), ValidationError,
             f"A must be {(entry.m, entry.k)}, got {a.shape}")
    _require(b.shape == (entry.k, entry.n), ValidationError,
             f"B must be {(entry.k, entry.n)}, got {b.shape}")
    _require(entry.p_k * entry.q_k == entry.padded_k, ValidationError,
             f"plan is inconsistent: p_k*q_k = {entry.p_k * entry.q_k} "
             f"but padded_k = {entry.padded_k}")
    _require(entry.p_n * entry.q_n == entry.padded_n, ValidationError,
             f"plan is inconsistent: p_n*q_n = {entry.p_n * entry.q_n} "
             f"but padded_n = {entry.padded_n}")
    _require(entry.padded_m >= entry.m and entry.padded_k >= entry.k
             and entry.padded_n >= entry.n, ValidationError,
             "padded dimensions cannot be smaller than logical ones")
    _require(all(s >= 1 for s in entry.api_shape) and all(u >= 1 for u in entry.unroll),
             ValidationError, "bad API shape or unroll in plan")


def execute_plan(entry: LayerPlan, a: np.ndarray, b: np.ndarray) -> ExecTrace:
    """Run one layer's plan over concrete matrices.

    The loop bounds come from the plan entry itself (r counts, splits,
    padding), not from re-derivation, so corrupted plans are executed
    as-is and show up as mismatches against the reference product.
    """
    _check_entry(entry, a, b)
    s_m, s_k, s_n = entry.api_shape
    u_m, u_k, u_n = entry.unroll
    e_m, e_k, e_n = s_m * u_m, s_k * u_k, s_n * u_n

    a_pad = np.zeros((entry.padded_m, entry.padded_k), dtype=np.int64)
    b_pad = np.zeros((entry.padded_k, entry.padded_n), dtype=np.int64)
    a_pad[: entry.m, : entry.k] = a
    b_pad[: entry.k, : entry.n] = b
    c_pad = np.zeros((entry.padded_m, entry.padded_n), dtype=np.int64)

    invocations = 0
    cascade_hops = 0
    checksums = {}
    for pn in range(entry.p_n):
        n0 = pn * entry.q_n
        for pk in range(entry.p_k):   # west to east: cascade accumulation order
            k0 = pk * entry.q_k
            tile_sum = 0
            for rm in range(entry.r_m):
                row0 = rm * e_m
                for rn in range(entry.r_n):
                    col0 = n0 + rn * e_n
                    acc = np.zeros((e_m, e_n), dtype=np.int64)
                    for rk in range(entry.r_k):
                        base_k = k0 + rk * e_k
                        for um, uk, un in product(range(u_m), range(u_k), range(u_n)):
                            a_sub = a_pad[row0 + um * s_m: row0 + (um + 1) * s_m,
                                          base_k + uk * s_k: base_k + (uk + 1) * s_k]
                            b_sub = b_pad[base_k + uk * s_k: base_k + (uk + 1) * s_k,
                                          col0 + un * s_n: col0 + (un + 1) * s_n]
                            acc[um * s_m: (um + 1) * s_m, un * s_n: (un + 1) * s_n] += a_sub @ b_sub
                            invocations += 1
                    c_pad[row0: row0 + e_m, col0: col0 + e_n] += acc
                    tile_sum += int(acc.sum())
                    if pk > 0:
                        cascade_hops += 1   # this sub-block arrived over the cascade
            checksums[(pk, pn)] = tile_sum

    c_logical = c_pad[: entry.m, : entry.n]
    saturated = int(np.count_nonzero((c_logical > INT32_MAX) | (c_logical < INT32_MIN)))
    c_out = np.clip(c_logical, INT32_MIN, INT32_MAX).astype(np.int32)
    return ExecTrace(
        c=c_out,
        macroblock_invocations=invocations,
        cascade_hops=cascade_hops,
        tile_checksums=checksums,
        saturated=saturated,
    )


@dataclass(frozen=True)
class VerifyReport:
    trials: int
    passed: bool
    mismatches: int
    first_mismatch: Optional[tuple]   # (trial, row, col, got, expected)
    warning: str = ""


def verify_plan(entry: LayerPlan, trials: int = 25, seed: int = 0) -> VerifyReport:
    """Compare plan execution against the reference product on random data.

    Draws `trials` seeded int8 matrix pairs; reports the first mismatch
    coordinate if any.  With zero trials the result is a vacuous pass,
    flagged as such.
    """
    _require(trials >= 0, ValidationError, "trials must be nonnegative")
    if trials == 0:
        return VerifyReport(trials=0, passed=True, mismatches=0, first_mismatch=None,
                            warning="no trials run; nothing was actually verified")
    rng = np.random.default_rng(seed)
    mismatches = 0
    first = None
    for trial in range(trials):
        a = rng.integers(-128, 128, size=(entry.m, entry.k), dtype=np.int64)
        b = rng.integers(-128, 128, size=(entry.k, entry.n), dtype=np.int64)
        got = execute_plan(entry, a, b).c.astype(np.int64)
        want = naive_gemm(a, b)
        diff = got != want
        if diff.any():
            mismatches += 1
            if first is None:
                i, j = np.argwhere(diff)[0]
                first = (trial, int(i), int(j), int(got[i, j]), int(want[i, j]))
    return VerifyReport(trials=trials, passed=mismatches == 0, mismatches=mismatches,
                        first_mismatch=first)


def audit_plan(plan, device) -> list:
    """Structural legality check of a saved plan against a device.

    Returns violation strings, empty when clean.  Checks the spatial
    arithmetic (splits divide the padded dims, padding covers the logical
    dims, column spans, per-band width and row budgets) but deliberately
    not the per-tile repetition counts: those are loop bounds, and a bad
    loop bound is the executor's job to expose as a wrong product.
    """
    problems = []
    shapes = {tuple(s) for s in device.legal_api_shapes}
    band_width: dict = {}
    band_rows: dict = {}
    for entry in plan.layers:
        tag = f"layer {entry.name!r}"
        if entry.domain not in (DOMAIN_PL, DOMAIN_AIE):
            problems.append(f"{tag}: unknown domain {entry.domain!r}")
            continue
        if entry.domain == DOMAIN_PL:
            if entry.reuse_factor is None or entry.reuse_factor < 1:
                problems.append(f"{tag}: fabric layer without a reuse factor")
            continue
        if entry.p_k * entry.q_k != entry.padded_k:
            problems.append(f"{tag}: p_k * q_k = {entry.p_k * entry.q_k} "
                            f"does not divide padded K = {entry.padded_k} evenly")
        if entry.p_n * entry.q_n != entry.padded_n:
            problems.append(f"{tag}: p_n * q_n = {entry.p_n * entry.q_n} "
                            f"does not divide padded N = {entry.padded_n} evenly")
        if entry.padded_m < entry.m or entry.padded_k < entry.k or entry.padded_n < entry.n:
            problems.append(f"{tag}: padded dims smaller than logical dims")
        if tuple(entry.api_shape) not in shapes:
            problems.append(f"{tag}: API shape {tuple(entry.api_shape)} "
                            f"is not legal on {device.name}")
        else:
            e_m, e_k, e_n = device.effective_tile(entry.api_shape)
            if entry.padded_m % e_m or entry.q_k % e_k or entry.q_n % e_n:
                problems.append(f"{tag}: per-tile workload ({entry.padded_m}, "
                                f"{entry.q_k}, {entry.q_n}) is not a multiple of the "
                                f"unrolled API block ({e_m}, {e_k}, {e_n})")
        if not memory_feasible(entry.q_k, entry.q_n, entry.padded_m, device):
            problems.append(f"{tag}: per-tile workload overflows local memory")
        if entry.last_col - entry.first_col + 1 != entry.p_k:
            problems.append(f"{tag}: column span [{entry.first_col}, {entry.last_col}] "
                            f"does not hold p_k = {entry.p_k} columns")
        if not (device.usable_column_lo <= entry.first_col
                and entry.last_col <= device.usable_column_hi):
            problems.append(f"{tag}: columns outside the usable range "
                            f"[{device.usable_column_lo}, {device.usable_column_hi}]")
        band_width[entry.band] = band_width.get(entry.band, 0) + entry.p_k
        band_rows[entry.band] = max(band_rows.get(entry.band, 0), entry.p_n)
    for band, width in sorted(band_width.items()):
        if width > device.usable_width:
            problems.append(f"band {band}: total width {width} exceeds "
                            f"the usable {device.usable_width} columns")
    if sum(band_rows.values()) > device.rows:
        problems.append(f"bands need {sum(band_rows.values())} rows stacked, "
                        f"device has {device.rows}")
    return problems
