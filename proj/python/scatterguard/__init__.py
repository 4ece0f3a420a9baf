"""On-body backscatter tag authentication from received signal strength."""

from ._core import (
    AttackerConfig,
    AttackerKind,
    Band,
    ConfigError,
    DynamicsProfile,
    Error,
    FinalVerdict,
    GroupVerdict,
    LabeledSeries,
    MetricsReport,
    NoBackscatterDetected,
    ParseError,
    PipelineParams,
    PreconditionError,
    ScenarioSpec,
    SegmentGroup,
    TagPosition,
    Verdict,
    authenticate,
    format_report_csv,
    latency_study,
    parse_report_csv,
    read_series,
    run_trials,
    segment_variance,
    slopes,
    sweep,
    synthesize,
    write_series,
)

__all__ = [name for name in dir() if not name.startswith("_")]
