"""Design-space exploration for dense NN chains on FPGA + vector-array devices."""

from .model import (
    CalibrationTable,
    DeviceSpec,
    InfeasibleError,
    LayerPlan,
    LayerSpec,
    LoadError,
    MapperError,
    NetworkSpec,
    ResourceVector,
    TilingPlan,
    ValidationError,
    bundled_device,
    load_calibration,
    load_device,
    load_network,
    mac_count,
)
from .plcost import (
    TradeoffCurve,
    TradeoffPoint,
    legal_reuse_factors,
    min_feasible_rf,
    pl_network_interval,
    pl_point,
    tradeoff_curve,
)
from .aiecost import (
    AieLatency,
    ApiTiling,
    enumerate_api_tilings,
    memory_feasible,
    plan_throughput,
    single_tile_latency,
    spatial_latency,
)
from .lare import LareResult, classify, lare, lare_sweep
from .planner import (
    BandLayout,
    Candidate,
    PartitionResult,
    PlanConstraints,
    band_layout,
    candidate_tilings,
    exhaustive_layer_search,
    hybrid_partition,
    plan_layer,
    plan_network,
)
from .executor import ExecTrace, VerifyReport, execute_plan, naive_gemm, verify_plan

__version__ = "0.1.0"
