"""PL cost model: reuse-factor tradeoff curves for dense layers.

A dense layer on the fabric time-multiplexes its k*n multipliers by a
reuse factor rf: one physical multiplier serves rf weights, so the
initiation interval grows with rf while the resource footprint shrinks.
Legal reuse factors are the divisors of k*n, so the multiplier count
divides evenly.  Calibrated (measured) points always take precedence
over the analytic model at identical keys.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

from .model import (
    CalibrationTable,
    DeviceSpec,
    InfeasibleError,
    LayerSpec,
    NetworkSpec,
    PlModelParams,
    ResourceVector,
    STRATEGIES,
    STRATEGY_RESOURCE,
    ValidationError,
    _require,
)

SOURCE_ANALYTIC = "analytic"
SOURCE_CALIBRATED = "calibrated"


@dataclass(frozen=True)
class TradeoffPoint:
    """One (reuse factor, interval, resources) point on a layer's curve."""

    reuse_factor: int
    interval_cycles: int
    resources: ResourceVector
    strategy: str
    source: str

    def __post_init__(self):
        _require(self.reuse_factor >= 1, ValidationError, "reuse factor must be >= 1")
        _require(self.interval_cycles >= self.reuse_factor, ValidationError,
                 f"interval {self.interval_cycles} cannot beat the reuse factor "
                 f"{self.reuse_factor} (one weight per multiplier per cycle)")
        _require(self.strategy in STRATEGIES, ValidationError, f"unknown strategy {self.strategy!r}")


@dataclass(frozen=True)
class TradeoffCurve:
    """All legal tradeoff points of one layer, ascending in reuse factor."""

    k: int
    n: int
    strategy: str
    points: tuple

    def __post_init__(self):
        _require(len(self.points) >= 1, ValidationError, "curve must have at least one point")
        for a, b in zip(self.points, self.points[1:]):
            _require(a.reuse_factor < b.reuse_factor, ValidationError,
                     f"curve (k={self.k}, n={self.n}): reuse factors not strictly increasing "
                     f"at rf={b.reuse_factor}")
            _require(a.interval_cycles <= b.interval_cycles, ValidationError,
                     f"curve (k={self.k}, n={self.n}, {self.strategy}): interval decreases "
                     f"from rf={a.reuse_factor} to rf={b.reuse_factor}")
            for cls in ("lut", "ff", "dsp", "bram"):
                _require(getattr(a.resources, cls) >= getattr(b.resources, cls), ValidationError,
                         f"curve (k={self.k}, n={self.n}, {self.strategy}): {cls} increases "
                         f"from rf={a.reuse_factor} to rf={b.reuse_factor}")

    @property
    def reuse_factors(self) -> tuple:
        return tuple(p.reuse_factor for p in self.points)


def legal_reuse_factors(layer: LayerSpec) -> list:
    """Ascending divisors of k*n, from fully parallel (1) to fully serial (k*n)."""
    total = layer.k * layer.n
    small, large = [], []
    for d in range(1, int(math.isqrt(total)) + 1):
        if total % d == 0:
            small.append(d)
            if d != total // d:
                large.append(total // d)
    return small + large[::-1]


def pl_point(
    layer: LayerSpec,
    rf: int,
    strategy: str = STRATEGY_RESOURCE,
    device: Optional[DeviceSpec] = None,
    calib: Optional[CalibrationTable] = None,
) -> TradeoffPoint:
    """Cost of one layer at one reuse factor: calibrated if measured, else analytic.

    Analytic model (resource strategy): interval = pipeline_depth + rf;
    dsp = ceil(k*n/rf); bram sized for the weight matrix; lut proportional
    to the multiplier count with ff at a fixed LUT ratio.  The latency
    strategy keeps the interval but maps arithmetic into logic: LUT cost
    scales up and the DSP/BRAM classes stay free.
    """
    strategy = strategy.lower()
    _require(strategy in STRATEGIES, ValidationError, f"unknown strategy {strategy!r}")
    _require(rf >= 1 and (layer.k * layer.n) % rf == 0, ValidationError,
             f"rf={rf} is not a divisor of k*n={layer.k * layer.n}")
    if calib is not None:
        rec = calib.pl_lookup(layer.k, layer.n, rf, strategy)
        if rec is not None:
            return TradeoffPoint(rf, rec.interval_cycles, rec.resources, strategy, SOURCE_CALIBRATED)

    params = device.pl_model if device is not None else PlModelParams()

    kn = layer.k * layer.n
    interval = params.pipeline_depth + rf
    mults = kn // rf
    if strategy == STRATEGY_RESOURCE:
        lut = params.lut_per_mac * mults
        dsp = float(mults)
        bram = float(math.ceil(kn * layer.dtype_bytes / params.bram_bytes))
    else:
        # Latency strategy: multipliers land in logic, weights in registers.
        lut = params.lut_per_mac * mults * params.latency_lut_factor
        dsp = 0.0
        bram = 0.0
    ff = params.ff_per_lut * lut
    return TradeoffPoint(rf, interval, ResourceVector(lut=lut, ff=ff, dsp=dsp, bram=bram),
                         strategy, SOURCE_ANALYTIC)


def tradeoff_curve(
    layer: LayerSpec,
    strategy: str = STRATEGY_RESOURCE,
    device: Optional[DeviceSpec] = None,
    calib: Optional[CalibrationTable] = None,
) -> TradeoffCurve:
    """Full tradeoff curve over every legal reuse factor.

    Monotonicity is enforced on the assembled curve; the analytic model
    satisfies it by construction, so a violation can only come from mixing
    in calibrated points, and is reported rather than silently repaired.
    """
    points = tuple(pl_point(layer, rf, strategy, device, calib) for rf in legal_reuse_factors(layer))
    return TradeoffCurve(k=layer.k, n=layer.n, strategy=strategy.lower(), points=points)


def min_feasible_rf(
    layer: LayerSpec,
    budget: ResourceVector,
    strategy: str = STRATEGY_RESOURCE,
    device: Optional[DeviceSpec] = None,
    calib: Optional[CalibrationTable] = None,
) -> TradeoffPoint:
    """Fastest legal point whose resources fit the budget in every class.

    Walks the legal reuse factors in ascending order and returns the first
    fit; raises when even full serialization does not fit (the layer has
    hit the fabric's resource wall).
    """
    last = None
    for rf in legal_reuse_factors(layer):
        point = pl_point(layer, rf, strategy, device, calib)
        last = point
        if point.resources.within(budget):
            return point
    assert last is not None
    raise InfeasibleError(
        f"layer {layer.name} ({layer.k}x{layer.n}) does not fit the PL budget at any reuse "
        f"factor: even fully serialized (rf={last.reuse_factor}) needs "
        f"{last.resources.as_dict()} against {budget.as_dict()}"
    )


def pl_network_interval(
    network: NetworkSpec,
    reuse_factors: Sequence[int],
    strategy: str = STRATEGY_RESOURCE,
    device: Optional[DeviceSpec] = None,
    calib: Optional[CalibrationTable] = None,
) -> int:
    """Steady-state initiation interval (cycles) of the pipelined chain.

    Every layer runs concurrently in a dataflow pipeline, so the slowest
    initiation interval governs the whole network.
    """
    _require(len(reuse_factors) == len(network.layers), ValidationError,
             f"expected {len(network.layers)} reuse factors, got {len(reuse_factors)}")
    worst = 0
    for layer, rf in zip(network.layers, reuse_factors):
        point = pl_point(layer, rf, strategy, device, calib)
        worst = max(worst, point.interval_cycles)
    return worst
