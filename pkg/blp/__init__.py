from blp.kernel import (
    BlpKernel,
    BlpTrace,
    Extracted,
    Simulated,
    Variant,
    simulate,
    step_backward,
    step_forward,
)
from blp.extract import (
    extract_backward,
    extract_forward,
    forward_from_urns,
    total_time,
    transition_pairs,
)
from blp.rayknight import (
    LowResolution,
    RayKnightResult,
    limit_law,
    rayknight_experiment,
    rayknight_replica,
)
