"""Core domain model: device, network, calibration and plan types.

A network here is a chain of dense (GEMM) layers running at a fixed batch.
Each layer multiplies an (m x k) activation block by a (k x n) weight matrix.
The device couples a programmable-logic (PL) fabric with a vector-engine
array; the array is a grid of tiles with per-tile local memory, 32-bit
stream ports and a wide dedicated cascade channel between horizontal
neighbours.  Everything downstream (cost models, the planner, the
executor) works on the frozen types defined in this module.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

DTYPE_BYTES = {"int8": 1, "int16": 2}

RESOURCE_CLASSES = ("lut", "ff", "dsp", "bram")

# Canonical strategy names for the PL layer implementation style.
STRATEGY_RESOURCE = "resource"
STRATEGY_LATENCY = "latency"
STRATEGIES = (STRATEGY_RESOURCE, STRATEGY_LATENCY)

DOMAIN_PL = "pl"
DOMAIN_AIE = "aie"


class MapperError(Exception):
    """Base class for all toolkit errors."""


class LoadError(MapperError):
    """Malformed or inconsistent input file."""


class ValidationError(MapperError):
    """A type invariant or cross-field constraint was violated."""


class InfeasibleError(MapperError):
    """No legal configuration exists under the given constraints."""


def _require(cond: bool, exc_type, msg: str) -> None:
    if not cond:
        raise exc_type(msg)


# ---------------------------------------------------------------------------
# Resource accounting


@dataclass(frozen=True)
class ResourceVector:
    """PL resource usage (or budget) by class: LUT, FF, DSP, BRAM."""

    lut: float = 0.0
    ff: float = 0.0
    dsp: float = 0.0
    bram: float = 0.0

    def __post_init__(self):
        for cls in RESOURCE_CLASSES:
            v = getattr(self, cls)
            _require(v >= 0, ValidationError, f"resource {cls} must be nonnegative, got {v}")

    def as_dict(self) -> dict:
        return {cls: getattr(self, cls) for cls in RESOURCE_CLASSES}

    def within(self, budget: "ResourceVector") -> bool:
        """True when self <= budget in every resource class."""
        return all(getattr(self, c) <= getattr(budget, c) for c in RESOURCE_CLASSES)

    def scaled(self, f: float) -> "ResourceVector":
        return ResourceVector(**{c: getattr(self, c) * f for c in RESOURCE_CLASSES})

    def scalar(self, weights: Mapping[str, float]) -> float:
        """Collapse to one number with per-class weights (area-equivalent units)."""
        return sum(getattr(self, c) * float(weights.get(c, 0.0)) for c in RESOURCE_CLASSES)

    @staticmethod
    def from_dict(d: Mapping[str, float]) -> "ResourceVector":
        unknown = set(d) - set(RESOURCE_CLASSES)
        _require(not unknown, LoadError, f"unknown resource classes: {sorted(unknown)}")
        return ResourceVector(**{c: float(d.get(c, 0.0)) for c in RESOURCE_CLASSES})


# ---------------------------------------------------------------------------
# Device


@dataclass(frozen=True)
class PlModelParams:
    """Constants for the analytic PL (hls4ml-style) cost model."""

    pipeline_depth: int = 8        # cycles of fixed pipeline latency added to the interval
    lut_per_mac: float = 25.0      # LUTs per multiplier instance at full parallelism
    ff_per_lut: float = 0.5
    latency_lut_factor: float = 4.0  # latency strategy burns LUTs/FFs instead of DSP/BRAM
    bram_bytes: int = 2304         # usable bytes per BRAM unit for weight storage


@dataclass(frozen=True)
class AieModelParams:
    """Constants for the analytic vector-array cost model."""

    overhead_cycles: int = 50        # kernel entry, lock handshakes, pointer setup
    k_heavy_penalty: float = 0.25    # extra compute fraction when r_k > r_n
    cascade_hop_cycles: int = 1      # drain cost per west-to-east partial-sum hop
    fanout_hop_cycles: int = 2       # stream fan-out/fan-in cost per extra row
    band_contention_factor: float = 1.15  # interval inflation per extra co-resident band
    crossing_penalty_rate: float = 0.039  # latency fraction per boundary crossing beyond 2
    weight_mem_fraction: float = 0.75     # share of local memory available to weights+buffers


@dataclass(frozen=True)
class DeviceSpec:
    """Static description of one heterogeneous device."""

    name: str
    columns: int
    rows: int
    usable_column_lo: int
    usable_column_hi: int
    macs_per_cycle: int
    aie_clock_hz: float
    pl_clock_hz: float
    local_mem_bytes: int
    stream_port_bits: int
    cascade_bits: int
    plio_bits: int
    legal_api_shapes: tuple  # ((s_m, s_k, s_n), ...)
    unroll: tuple = (2, 2, 2)
    resource_weights: Mapping[str, float] = field(
        default_factory=lambda: {"lut": 1.0, "ff": 0.5, "dsp": 100.0, "bram": 200.0}
    )
    pl_model: PlModelParams = field(default_factory=PlModelParams)
    aie_model: AieModelParams = field(default_factory=AieModelParams)
    pl_budget: Optional[ResourceVector] = None

    def __post_init__(self):
        _require(self.columns >= 1 and self.rows >= 1, ValidationError, "array must be nonempty")
        _require(
            0 <= self.usable_column_lo <= self.usable_column_hi < self.columns,
            ValidationError,
            f"usable column range [{self.usable_column_lo}, {self.usable_column_hi}] "
            f"must lie inside 0..{self.columns - 1}",
        )
        _require(len(self.legal_api_shapes) > 0, ValidationError, "device needs at least one API shape")
        for shape in self.legal_api_shapes:
            _require(
                len(shape) == 3 and all(int(s) >= 1 for s in shape),
                ValidationError,
                f"bad API shape {shape}",
            )
        _require(len(self.unroll) == 3 and all(u >= 1 for u in self.unroll), ValidationError, "bad unroll")
        for v, label in ((self.macs_per_cycle, "macs_per_cycle"),
                         (self.aie_clock_hz, "aie_clock_hz"),
                         (self.pl_clock_hz, "pl_clock_hz"),
                         (self.local_mem_bytes, "local_mem_bytes"),
                         (self.stream_port_bits, "stream_port_bits")):
            _require(v > 0, ValidationError, f"{label} must be positive")

    @property
    def usable_width(self) -> int:
        """Columns actually available for compute tiles."""
        return self.usable_column_hi - self.usable_column_lo + 1

    @property
    def min_batch(self) -> int:
        """Smallest batch that fills one unrolled API block row-wise."""
        return min(s[0] * self.unroll[0] for s in self.legal_api_shapes)

    def effective_tile(self, shape: Sequence[int]) -> tuple:
        """API shape times the unroll factors: the unit of work one tile iterates."""
        return tuple(int(s) * int(u) for s, u in zip(shape, self.unroll))


# ---------------------------------------------------------------------------
# Network


@dataclass(frozen=True)
class LayerSpec:
    """One dense layer: (m x k) activations times (k x n) weights."""

    name: str
    m: int
    k: int
    n: int
    dtype: str = "int8"

    def __post_init__(self):
        _require(self.m >= 1 and self.k >= 1 and self.n >= 1, ValidationError,
                 f"layer {self.name}: dimensions must be >= 1")
        _require(self.dtype in DTYPE_BYTES, ValidationError,
                 f"layer {self.name}: unknown dtype {self.dtype!r}")

    @property
    def dtype_bytes(self) -> int:
        return DTYPE_BYTES[self.dtype]

    @property
    def mac_count(self) -> int:
        return self.m * self.k * self.n


def mac_count(layer: LayerSpec) -> int:
    """Multiply-accumulate operations for one batched layer evaluation."""
    return layer.mac_count


@dataclass(frozen=True)
class NetworkSpec:
    """A feed-forward chain of dense layers sharing one batch size."""

    name: str
    layers: tuple
    target_throughput_hz: Optional[float] = None

    def __post_init__(self):
        _require(len(self.layers) >= 1, ValidationError, "network needs at least one layer")
        batch = self.layers[0].m
        for lyr in self.layers:
            _require(lyr.m == batch, ValidationError,
                     f"layer {lyr.name}: batch {lyr.m} differs from network batch {batch}")
        for a, b in zip(self.layers, self.layers[1:]):
            _require(a.n == b.k, ValidationError,
                     f"chain break: layer {a.name} outputs {a.n} but {b.name} expects {b.k}")
        if self.target_throughput_hz is not None:
            _require(self.target_throughput_hz > 0, ValidationError, "target throughput must be positive")

    @property
    def batch(self) -> int:
        return self.layers[0].m

    @property
    def total_macs(self) -> int:
        return sum(l.mac_count for l in self.layers)


# ---------------------------------------------------------------------------
# Calibration


@dataclass(frozen=True)
class PlCalRecord:
    interval_cycles: int
    resources: ResourceVector


@dataclass(frozen=True)
class CalibrationTable:
    """Measured PL tradeoff points and vector-array single-tile latencies.

    PL records are keyed by (k, n, reuse_factor, strategy); array records by
    the per-tile workload and API shape (m, q_k, q_n, (s_m, s_k, s_n)).
    Within each (k, n, strategy) group the interval must be nondecreasing
    and every resource class nonincreasing as the reuse factor grows;
    a table violating that is rejected at load time rather than silently
    reordered, since interpolation downstream depends on it.
    """

    pl: Mapping[tuple, PlCalRecord] = field(default_factory=dict)
    aie: Mapping[tuple, int] = field(default_factory=dict)

    def __post_init__(self):
        for key, rec in self.pl.items():
            _require(rec.interval_cycles > 0, ValidationError,
                     f"pl record {key}: interval must be positive")
        for key, cycles in self.aie.items():
            _require(cycles > 0, ValidationError,
                     f"aie record {key}: latency must be positive")
        self._check_monotone()

    def _check_monotone(self):
        groups = {}
        for (k, n, rf, strategy), rec in self.pl.items():
            groups.setdefault((k, n, strategy), []).append((rf, rec))
        for (k, n, strategy), points in groups.items():
            points.sort()
            for (rf_a, rec_a), (rf_b, rec_b) in zip(points, points[1:]):
                _require(
                    rec_a.interval_cycles <= rec_b.interval_cycles,
                    ValidationError,
                    f"calibration group (k={k}, n={n}, {strategy}): interval decreases "
                    f"from rf={rf_a} to rf={rf_b}",
                )
                for cls in RESOURCE_CLASSES:
                    _require(
                        getattr(rec_a.resources, cls) >= getattr(rec_b.resources, cls),
                        ValidationError,
                        f"calibration group (k={k}, n={n}, {strategy}): {cls} increases "
                        f"from rf={rf_a} to rf={rf_b}",
                    )

    def pl_lookup(self, k: int, n: int, rf: int, strategy: str) -> Optional[PlCalRecord]:
        return self.pl.get((k, n, rf, strategy))

    def aie_lookup(self, m: int, q_k: int, q_n: int, shape: Sequence[int]) -> Optional[int]:
        return self.aie.get((m, q_k, q_n, tuple(shape)))


EMPTY_CALIBRATION = CalibrationTable()


# ---------------------------------------------------------------------------
# Plans


@dataclass(frozen=True)
class LayerPlan:
    """Placement and tiling decision for one layer.

    Spatial level: the layer spans p_k columns (partial sums cascade west to
    east) by p_n rows.  Per-tile level: each tile's (m, q_k, q_n) workload is
    covered by r_m * r_k * r_n repetitions of the unrolled API tile.
    Logical dimensions are the network's; padded dimensions are what the
    kernels actually iterate (zero-filled, cropped on output).
    """

    name: str
    domain: str
    m: int
    k: int
    n: int
    padded_m: int
    padded_k: int
    padded_n: int
    p_k: int
    p_n: int
    q_k: int
    q_n: int
    api_shape: tuple
    r_m: int
    r_k: int
    r_n: int
    unroll: tuple
    band: int
    first_col: int
    last_col: int
    reuse_factor: Optional[int] = None
    latency_cycles: float = 0.0
    latency_seconds: float = 0.0
    bound: str = ""
    source: str = ""
    flags: tuple = ()

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "domain": self.domain,
            "m": self.m, "k": self.k, "n": self.n,
            "padded_m": self.padded_m, "padded_k": self.padded_k, "padded_n": self.padded_n,
            "p_k": self.p_k, "p_n": self.p_n,
            "q_k": self.q_k, "q_n": self.q_n,
            "api_shape": list(self.api_shape),
            "r": [self.r_m, self.r_k, self.r_n],
            "unroll": list(self.unroll),
            "band": self.band,
            "column_span": [self.first_col, self.last_col],
            "rf": self.reuse_factor,
            "latency_cycles": self.latency_cycles,
            "latency_seconds": self.latency_seconds,
            "bound": self.bound,
            "source": self.source,
            "flags": list(self.flags),
        }

    @staticmethod
    def from_json_dict(d: Mapping) -> "LayerPlan":
        try:
            return LayerPlan(
                name=d["name"], domain=d["domain"],
                m=int(d["m"]), k=int(d["k"]), n=int(d["n"]),
                padded_m=int(d["padded_m"]), padded_k=int(d["padded_k"]), padded_n=int(d["padded_n"]),
                p_k=int(d["p_k"]), p_n=int(d["p_n"]),
                q_k=int(d["q_k"]), q_n=int(d["q_n"]),
                api_shape=tuple(int(x) for x in d["api_shape"]),
                r_m=int(d["r"][0]), r_k=int(d["r"][1]), r_n=int(d["r"][2]),
                unroll=tuple(int(x) for x in d["unroll"]),
                band=int(d["band"]),
                first_col=int(d["column_span"][0]), last_col=int(d["column_span"][1]),
                reuse_factor=None if d.get("rf") is None else int(d["rf"]),
                latency_cycles=float(d.get("latency_cycles", 0.0)),
                latency_seconds=float(d.get("latency_seconds", 0.0)),
                bound=d.get("bound", ""), source=d.get("source", ""),
                flags=tuple(d.get("flags", ())),
            )
        except (KeyError, IndexError, TypeError) as e:
            raise LoadError(f"malformed layer plan entry: {e}") from e


@dataclass(frozen=True)
class TilingPlan:
    """A full placement decision for a network plus its derived metrics."""

    network: str
    device: str
    batch: int
    layers: tuple
    bands: int
    interval_seconds: float
    throughput_hz: float
    crossings: int
    penalty_factor: float
    target_throughput_hz: Optional[float] = None
    target_met: Optional[bool] = None

    def to_json_dict(self) -> dict:
        return {
            "network": self.network,
            "device": self.device,
            "batch": self.batch,
            "layers": [l.to_json_dict() for l in self.layers],
            "bands": self.bands,
            "interval_seconds": self.interval_seconds,
            "throughput_hz": self.throughput_hz,
            "crossings": self.crossings,
            "penalty_factor": self.penalty_factor,
            "target_throughput_hz": self.target_throughput_hz,
            "target_met": self.target_met,
        }

    @staticmethod
    def from_json_dict(d: Mapping) -> "TilingPlan":
        try:
            return TilingPlan(
                network=d["network"], device=d["device"], batch=int(d["batch"]),
                layers=tuple(LayerPlan.from_json_dict(x) for x in d["layers"]),
                bands=int(d["bands"]),
                interval_seconds=float(d["interval_seconds"]),
                throughput_hz=float(d["throughput_hz"]),
                crossings=int(d["crossings"]),
                penalty_factor=float(d["penalty_factor"]),
                target_throughput_hz=d.get("target_throughput_hz"),
                target_met=d.get("target_met"),
            )
        except (KeyError, TypeError) as e:
            raise LoadError(f"malformed plan file: {e}") from e

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n")

    @staticmethod
    def load(path) -> "TilingPlan":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise LoadError(f"cannot read plan file {path}: {e}") from e
        return TilingPlan.from_json_dict(data)


# ---------------------------------------------------------------------------
# File loaders


def _read_json(path) -> dict:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as e:
        raise LoadError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise LoadError(f"{path} is not valid JSON: {e}") from e
    _require(isinstance(data, dict), LoadError, f"{path}: top level must be an object")
    return data


def load_network(path) -> NetworkSpec:
    """Load a network description.

    Schema: {"name": str, "batch": int, "target_throughput_hz": float?,
    "layers": [{"name": str, "k": int, "n": int, "dtype": str?}, ...]}.
    Consecutive layers must chain (previous n equals next k).
    """
    data = _read_json(path)
    for key in ("name", "batch", "layers"):
        _require(key in data, LoadError, f"{path}: missing field {key!r}")
    try:
        batch = int(data["batch"])
        layers = []
        for i, entry in enumerate(data["layers"]):
            layers.append(LayerSpec(
                name=str(entry.get("name", f"layer{i}")),
                m=batch,
                k=int(entry["k"]),
                n=int(entry["n"]),
                dtype=str(entry.get("dtype", "int8")),
            ))
    except (KeyError, TypeError, ValueError) as e:
        raise LoadError(f"{path}: malformed layer list: {e}") from e
    target = data.get("target_throughput_hz")
    try:
        return NetworkSpec(
            name=str(data["name"]),
            layers=tuple(layers),
            target_throughput_hz=None if target is None else float(target),
        )
    except ValidationError as e:
        raise LoadError(f"{path}: {e}") from e


def network_to_json_dict(net: NetworkSpec) -> dict:
    d = {
        "name": net.name,
        "batch": net.batch,
        "layers": [{"name": l.name, "k": l.k, "n": l.n, "dtype": l.dtype} for l in net.layers],
    }
    if net.target_throughput_hz is not None:
        d["target_throughput_hz"] = net.target_throughput_hz
    return d


def load_device(path) -> DeviceSpec:
    """Load a device description from JSON (see profiles/ for the schema)."""
    data = _read_json(path)
    required = (
        "name", "columns", "rows", "usable_column_lo", "usable_column_hi",
        "macs_per_cycle", "aie_clock_hz", "pl_clock_hz", "local_mem_bytes",
        "stream_port_bits", "cascade_bits", "plio_bits", "legal_api_shapes",
    )
    for key in required:
        _require(key in data, LoadError, f"{path}: missing field {key!r}")
    try:
        shapes = tuple(tuple(int(x) for x in s) for s in data["legal_api_shapes"])
        kwargs = dict(
            name=str(data["name"]),
            columns=int(data["columns"]),
            rows=int(data["rows"]),
            usable_column_lo=int(data["usable_column_lo"]),
            usable_column_hi=int(data["usable_column_hi"]),
            macs_per_cycle=int(data["macs_per_cycle"]),
            aie_clock_hz=float(data["aie_clock_hz"]),
            pl_clock_hz=float(data["pl_clock_hz"]),
            local_mem_bytes=int(data["local_mem_bytes"]),
            stream_port_bits=int(data["stream_port_bits"]),
            cascade_bits=int(data["cascade_bits"]),
            plio_bits=int(data["plio_bits"]),
            legal_api_shapes=shapes,
            unroll=tuple(int(x) for x in data.get("unroll", (2, 2, 2))),
        )
        if "resource_weights" in data:
            kwargs["resource_weights"] = {k: float(v) for k, v in data["resource_weights"].items()}
        if "pl_model" in data:
            kwargs["pl_model"] = PlModelParams(**data["pl_model"])
        if "aie_model" in data:
            kwargs["aie_model"] = AieModelParams(**data["aie_model"])
        if "pl_budget" in data:
            kwargs["pl_budget"] = ResourceVector.from_dict(data["pl_budget"])
    except (TypeError, ValueError) as e:
        raise LoadError(f"{path}: malformed device file: {e}") from e
    try:
        return DeviceSpec(**kwargs)
    except ValidationError as e:
        raise LoadError(f"{path}: {e}") from e


def device_to_json_dict(dev: DeviceSpec) -> dict:
    return {
        "name": dev.name,
        "columns": dev.columns,
        "rows": dev.rows,
        "usable_column_lo": dev.usable_column_lo,
        "usable_column_hi": dev.usable_column_hi,
        "macs_per_cycle": dev.macs_per_cycle,
        "aie_clock_hz": dev.aie_clock_hz,
        "pl_clock_hz": dev.pl_clock_hz,
        "local_mem_bytes": dev.local_mem_bytes,
        "stream_port_bits": dev.stream_port_bits,
        "cascade_bits": dev.cascade_bits,
        "plio_bits": dev.plio_bits,
        "legal_api_shapes": [list(s) for s in dev.legal_api_shapes],
        "unroll": list(dev.unroll),
        "resource_weights": dict(dev.resource_weights),
        "pl_model": vars(dev.pl_model).copy(),
        "aie_model": vars(dev.aie_model).copy(),
        "pl_budget": None if dev.pl_budget is None else dev.pl_budget.as_dict(),
    }


CALIBRATION_HEADER = [
    "section", "k", "n", "reuse_factor", "strategy", "interval_cycles",
    "lut", "ff", "dsp", "bram",
    "m", "q_k", "q_n", "s_m", "s_k", "s_n", "latency_cycles",
]


def load_calibration(path) -> CalibrationTable:
    """Load measured cost records from CSV.

    One header row; each data row is tagged 'pl' or 'aie' in the first
    column and fills only the columns for its section.  Lines starting
    with '#' are comments.  Duplicate keys and non-monotone PL groups
    are rejected.
    """
    pl: dict = {}
    aie: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise LoadError(f"cannot read {path}: {e}") from e
    rows = [r for r in text.splitlines() if r.strip() and not r.lstrip().startswith("#")]
    _require(len(rows) >= 1, LoadError, f"{path}: empty calibration file")
    reader = csv.DictReader(rows)
    _require(reader.fieldnames is not None and reader.fieldnames[0] == "section",
             LoadError, f"{path}: first header column must be 'section'")
    for lineno, row in enumerate(reader, start=2):
        section = (row.get("section") or "").strip().lower()
        try:
            if section == "pl":
                key = (int(row["k"]), int(row["n"]), int(row["reuse_factor"]),
                       row["strategy"].strip().lower())
                _require(key[3] in STRATEGIES, LoadError,
                         f"{path}:{lineno}: unknown strategy {row['strategy']!r}")
                _require(key not in pl, LoadError, f"{path}:{lineno}: duplicate pl key {key}")
                pl[key] = PlCalRecord(
                    interval_cycles=int(row["interval_cycles"]),
                    resources=ResourceVector(
                        lut=float(row["lut"] or 0), ff=float(row["ff"] or 0),
                        dsp=float(row["dsp"] or 0), bram=float(row["bram"] or 0),
                    ),
                )
            elif section == "aie":
                key = (int(row["m"]), int(row["q_k"]), int(row["q_n"]),
                       (int(row["s_m"]), int(row["s_k"]), int(row["s_n"])))
                _require(key not in aie, LoadError, f"{path}:{lineno}: duplicate aie key {key}")
                aie[key] = int(row["latency_cycles"])
            else:
                raise LoadError(f"{path}:{lineno}: unknown section tag {row.get('section')!r}")
        except (KeyError, TypeError, ValueError) as e:
            raise LoadError(f"{path}:{lineno}: malformed record: {e}") from e
    try:
        return CalibrationTable(pl=pl, aie=aie)
    except ValidationError as e:
        raise LoadError(f"{path}: {e}") from e


def calibration_to_rows(table: CalibrationTable) -> list:
    """Flatten a table back to CSV rows (inverse of load_calibration)."""
    out = [list(CALIBRATION_HEADER)]
    for (k, n, rf, strategy), rec in sorted(table.pl.items()):
        out.append(["pl", k, n, rf, strategy, rec.interval_cycles,
                    rec.resources.lut, rec.resources.ff, rec.resources.dsp, rec.resources.bram,
                    "", "", "", "", "", "", ""])
    for (m, q_k, q_n, shape), cycles in sorted(table.aie.items()):
        out.append(["aie", "", "", "", "", "", "", "", "", "",
                    m, q_k, q_n, shape[0], shape[1], shape[2], cycles])
    return out


def save_calibration(table: CalibrationTable, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerows(calibration_to_rows(table))


# ---------------------------------------------------------------------------
# Bundled data


def profile_path(name: str) -> Path:
    """Path of a bundled device profile by name (e.g. 'vek280')."""
    base = resources.files("edge_mapper") / "profiles" / f"{name}.json"
    _require(base.is_file(), LoadError, f"no bundled device profile named {name!r}")
    return Path(str(base))


def bundled_device(name: str = "vek280") -> DeviceSpec:
    return load_device(profile_path(name))


def fixture_path(name: str) -> Path:
    """Path of a bundled example input (network JSON or calibration CSV)."""
    base = resources.files("edge_mapper") / "fixtures" / name
    _require(base.is_file(), LoadError, f"no bundled fixture named {name!r}")
    return Path(str(base))


def default_device_from_env() -> DeviceSpec:
    """Device selected by EDGE_MAPPER_PROFILE, falling back to vek280."""
    return bundled_device(os.environ.get("EDGE_MAPPER_PROFILE", "vek280"))
