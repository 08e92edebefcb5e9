"""Latency-adjusted resource equivalence (LARE) between the two domains.

For one layer, the PL tradeoff curve maps reuse factor to (interval,
resources) and the array offers one fixed latency.  LARE asks: how much
fabric does the layer need so that a PL implementation matches the
array's speed?  The answer is the resource vector of the curve point
whose interval equals the array latency, interpolating between legal
reuse factors when the match falls between points.  A layer with more
fabric available than its LARE value can stay on the PL without losing
throughput; anything less and the array wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    CalibrationTable,
    DeviceSpec,
    LayerSpec,
    ResourceVector,
    RESOURCE_CLASSES,
    STRATEGY_RESOURCE,
    ValidationError,
    _require,
)
from .aiecost import AieLatency, spatial_latency
from .plcost import SOURCE_ANALYTIC, SOURCE_CALIBRATED, TradeoffCurve, tradeoff_curve

VERDICT_PL = "prefer_pl"
VERDICT_AIE = "prefer_aie"
VERDICT_BOUNDARY = "boundary"

ABOVE_CURVE = "above_curve"   # array beats even the fully parallel PL point
BELOW_CURVE = "below_curve"   # array slower than the fully serialized PL point

SOURCE_MIXED = "mixed"


@dataclass(frozen=True)
class LareResult:
    k: int
    n: int
    strategy: str
    aie_cycles: int
    aie_seconds: float
    rf_eq: float                 # equivalent reuse factor at the matching interval
    lare: ResourceVector         # PL resources needed to match the array
    lare_scalar: float
    range_marker: str = ""       # "", above_curve, below_curve
    forced_verdict: str = ""     # set when the match is out of range
    under_utilized: bool = False
    pl_source: str = SOURCE_ANALYTIC
    aie_source: str = SOURCE_ANALYTIC


def _curve_source(curve: TradeoffCurve) -> str:
    sources = {p.source for p in curve.points}
    if sources == {SOURCE_CALIBRATED}:
        return SOURCE_CALIBRATED
    if sources == {SOURCE_ANALYTIC}:
        return SOURCE_ANALYTIC
    return SOURCE_MIXED


def lare(
    curve: TradeoffCurve,
    aie: AieLatency,
    device: DeviceSpec,
    efficiency_threshold: float = 0.1,
) -> LareResult:
    """Resource-equivalence point of one layer.

    Both sides are compared in seconds at their own clocks.  An exact
    interval match returns that point's resource vector unchanged;
    otherwise the result interpolates linearly (in time) between the two
    bracketing points, componentwise for the vector and equally for the
    equivalent reuse factor.  Matches outside the curve clamp to the
    nearest endpoint, carry a range marker, and force the verdict.
    """
    points = curve.points
    pl_seconds = [p.interval_cycles / device.pl_clock_hz for p in points]
    aie_seconds = aie.cycles / device.aie_clock_hz
    weights = device.resource_weights

    def result(rf_eq, vec, marker="", forced=""):
        scalar = vec.scalar(weights)
        reference = points[0].resources.scalar(weights)
        return LareResult(
            k=curve.k, n=curve.n, strategy=curve.strategy,
            aie_cycles=aie.cycles, aie_seconds=aie_seconds,
            rf_eq=rf_eq, lare=vec, lare_scalar=scalar,
            range_marker=marker, forced_verdict=forced,
            under_utilized=scalar < efficiency_threshold * reference,
            pl_source=_curve_source(curve), aie_source=aie.source,
        )

    if aie_seconds < pl_seconds[0]:
        return result(float(points[0].reuse_factor), points[0].resources,
                      marker=ABOVE_CURVE, forced=VERDICT_AIE)
    if aie_seconds > pl_seconds[-1]:
        return result(float(points[-1].reuse_factor), points[-1].resources,
                      marker=BELOW_CURVE, forced=VERDICT_PL)
    for p, s in zip(points, pl_seconds):
        if s == aie_seconds:
            return result(float(p.reuse_factor), p.resources)
    for (a, sa), (b, sb) in zip(zip(points, pl_seconds), zip(points[1:], pl_seconds[1:])):
        if sa < aie_seconds < sb:
            t = (aie_seconds - sa) / (sb - sa)
            rf_eq = a.reuse_factor + t * (b.reuse_factor - a.reuse_factor)
            vec = ResourceVector(**{
                c: getattr(a.resources, c) + t * (getattr(b.resources, c) - getattr(a.resources, c))
                for c in RESOURCE_CLASSES
            })
            return result(rf_eq, vec)
    # flat curve segments (equal intervals) leave no strict bracket; refuse
    # to guess between identical times
    raise ValidationError(
        f"curve (k={curve.k}, n={curve.n}) has no bracketing segment for "
        f"{aie_seconds} s; intervals may be degenerate"
    )


def classify(result: LareResult, available: ResourceVector, device: DeviceSpec) -> str:
    """Placement verdict for one layer given the fabric actually available.

    PL wins outright when the available vector covers the LARE vector in
    every class.  When it falls short everywhere (the weighted scalar
    agrees), the array wins.  When the componentwise and scalar views
    disagree (enough total fabric, wrong mix), the layer sits on the
    boundary and deserves a closer look.
    """
    if result.forced_verdict:
        return result.forced_verdict
    componentwise_pl = result.lare.within(available)
    scalar_pl = available.scalar(device.resource_weights) >= result.lare_scalar
    if componentwise_pl:
        return VERDICT_PL
    if scalar_pl:
        return VERDICT_BOUNDARY
    return VERDICT_AIE


def lare_sweep(
    shapes: Sequence,
    budgets: Sequence,
    device: DeviceSpec,
    calib: Optional[CalibrationTable] = None,
    strategy: str = STRATEGY_RESOURCE,
    batch: Optional[int] = None,
    efficiency_threshold: float = 0.1,
) -> list:
    """LARE rows for every shape, crossed with every budget.

    Shapes are (k, n) pairs; the array side uses the naive single-tile
    mapping at the device's minimum batch (or the given one).  With an
    empty budget list each shape still yields one row, just without a
    verdict.  Returns dict rows ready for CSV or JSON serialization.
    """
    m = batch if batch is not None else device.min_batch
    rows = []
    for k, n in shapes:
        layer = LayerSpec(name=f"k{k}n{n}", m=m, k=k, n=n)
        curve = tradeoff_curve(layer, strategy, device, calib)
        aie = spatial_latency(layer, 1, 1, device, calib=calib)
        res = lare(curve, aie, device, efficiency_threshold)
        base = {
            "k": k,
            "n": n,
            "strategy": res.strategy,
            "aie_cycles": res.aie_cycles,
            "aie_seconds": res.aie_seconds,
            "rf_eq": res.rf_eq,
            "lare_lut": res.lare.lut,
            "lare_ff": res.lare.ff,
            "lare_dsp": res.lare.dsp,
            "lare_bram": res.lare.bram,
            "lare_scalar": res.lare_scalar,
            "range_marker": res.range_marker,
            "under_utilized": res.under_utilized,
            "pl_source": res.pl_source,
            "aie_source": res.aie_source,
        }
        if not budgets:
            rows.append({**base, "budget_index": "", "budget_scalar": "", "verdict": ""})
            continue
        for bi, budget in enumerate(budgets):
            rows.append({
                **base,
                "budget_index": bi,
                "budget_scalar": budget.scalar(device.resource_weights),
                "verdict": classify(res, budget, device),
            })
    return rows


LARE_SWEEP_COLUMNS = [
    "k", "n", "strategy", "aie_cycles", "aie_seconds", "rf_eq",
    "lare_lut", "lare_ff", "lare_dsp", "lare_bram", "lare_scalar",
    "range_marker", "under_utilized", "pl_source", "aie_source",
    "budget_index", "budget_scalar", "verdict",
]
