from walk.state import (
    MemoryBudgetError,
    MissingReturnTime,
    RecordOptions,
    StepRecord,
    WalkState,
    WalkTrace,
    run,
    run_until_return,
    step,
)
from walk.observables import (
    DirectedProfile,
    DriftProfile,
    DriftSplit,
    IncrementsNotRecorded,
    PositionsNotRecorded,
    ReturnTimeIndex,
    all_departures,
    departures,
    directed_local_time,
    directed_profile,
    drift_at,
    drift_split,
    drift_vs_range,
    local_drift,
    local_drift_profile,
    local_time_sup,
    qv_monitor,
    rarely_visited,
    return_time,
    return_times,
    sup_drift_vs_range,
)
from walk.export import SUMMARY_FIELDS, dump_steps, load_steps, summary_row
