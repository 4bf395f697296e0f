"""Energy-aware nanoservice orchestration across a local/edge/cloud continuum.

The package is a deterministic discrete-event simulator plus the decision
functions it drives: node placement by deadline-feasible minimum energy,
price-aware deferral of delay-tolerant tasks, and network-slice admission.
"""

from orchsim.errors import (
    CapacityExceeded,
    DuplicateId,
    DuplicateTask,
    HorizonExceeded,
    Infeasible,
    InstanceTooLarge,
    InvalidAlpha,
    InvalidScenario,
    InvariantError,
    NoFeasibleNode,
    OrchSimError,
    OutOfHorizon,
    SchemaError,
    SliceSaturated,
    Underflow,
    UnknownTask,
    ZeroBandwidth,
)
from orchsim.model import (
    CommRequirement,
    NanoService,
    Node,
    NodeState,
    ResourceVector,
    Tier,
    TimingEstimate,
    admit,
    check_fit,
    estimate_timing,
    release,
)
from orchsim.energy import (
    EnergyPriceForecast,
    PowerProfile,
    execution_cost,
    price_at,
    task_energy,
    task_power,
    update_profile,
)
from orchsim.slicing import (
    NetworkSlice,
    SliceClass,
    SliceThresholds,
    admit_bandwidth,
    classify_slice,
    release_bandwidth,
)
from orchsim.placement import (
    FeasibilityReport,
    PlacementDecision,
    feasible_nodes,
    select_node,
)
from orchsim.scheduling import (
    DeploymentPlan,
    Objective,
    latest_start,
    orchestrate,
    select_start,
)
from orchsim.oracle import OracleDecision, compare, exhaustive_best
from orchsim.scenario import Scenario, load_scenario, parse_scenario, serialize_scenario
from orchsim.simengine import SimulationReport, TaskRecord, run

__version__ = "0.1.0"
