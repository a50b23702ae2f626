"""Simulator and analysis toolkit for 1-efficient silent self-stabilizing
protocols (vertex coloring, maximal independent set, maximal matching)."""

from .analysis import (
    MetricsReport,
    NeighborCompletenessWitness,
    StabilityProfile,
    build_report,
    efficiency_k,
    enumerate_silent_configs,
    is_silent,
    neighbor_completeness_witness,
    stability_profile,
)
from .engine import (
    Configuration,
    ProcessState,
    SchedulerSpec,
    StepRecord,
    Trace,
    execute_step,
    init_configuration,
    rounds,
    run,
)
from .predicates import (
    check_maximal_matching,
    check_mis,
    check_vertex_coloring,
    extract_output,
)
from .protocols import coloring_protocol, get_protocol, matching_protocol, mis_protocol
from .topology import (
    Graph,
    build_graph,
    dag_orientation,
    generate,
    greedy_local_coloring,
    longest_elementary_path,
)

__version__ = "0.1.0"
