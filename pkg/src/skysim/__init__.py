"""skysim: deterministic skyway-network simulator for drone delivery services.

A skyway network is a graph of rooftop nodes with charging pads joined by
waypoint segments.  Drones or swarms fly delivery requests over it under an
ascent/descent-aware power model, a pluggable controller decides the route at
every node, and each run exports per-frame and per-milestone telemetry as CSV.
"""

from .composer import (
    BUILTIN_POLICIES,
    ComposedPath,
    CompositionQuery,
    GreedyReactivePolicy,
    PathStep,
    StaticComposeOncePolicy,
    brute_force_min_energy,
    compose_min_energy,
)
from .energy import (
    BatteryDepletedError,
    BatteryState,
    DroneSpec,
    EnergyModelError,
    EnvironmentParams,
    FlightPoint,
    charge,
    discharge,
    electric_power,
    hover_power,
    leg_energy,
    segment_energy,
    solve_induced_velocity,
)
from .engine import (
    DeliveryRequest,
    FaultEvent,
    RunResult,
    Scenario,
    ScenarioError,
    SimClock,
    SplitMix64,
    World,
    parse_scenario,
    run,
    validate_scenario,
)
from .model import (
    FORMAT_VERSION,
    DuplicateIdError,
    LegProfile,
    NetworkError,
    NetworkParseError,
    NetworkSchemaError,
    NetworkValidationError,
    Node,
    Segment,
    SimSettings,
    SkywayNetwork,
    UnknownIdError,
    add_node,
    add_segment,
    leg_profiles,
    load_network,
    move_node,
    network_from_document,
    network_to_document,
    polyline,
    remove_node,
    remove_segment,
    save_network,
    segment_length,
    set_segment_availability,
    update_settings,
    validate_network,
)
from .protocol import (
    PROTOCOL_VERSION,
    Arrival,
    ControllerSessionError,
    Decision,
    End,
    Error,
    Fault,
    Hello,
    InProcessController,
    ProtocolError,
    Ready,
    Rejection,
    TcpControllerServer,
    decode,
    encode,
)
from .telemetry import (
    EVENTS_HEADER,
    FRAMES_HEADER,
    TelemetryFrame,
    TelemetryLog,
    TripEvent,
    export_events_csv,
    export_frames_csv,
)

__version__ = "0.1.0"
