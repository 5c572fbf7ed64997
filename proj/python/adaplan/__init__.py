"""Python bindings for the adaplan planning core."""

from ._adaplan import (
    ConfigError,
    PlannerMode,
    SpeedCommand,
    map_mode,
    map_speed,
    min_distance,
    max_margin_duals,
    load_track,
    generate_reference,
    run_config,
    overtake_table,
    __version__,
)

__all__ = [
    "ConfigError",
    "PlannerMode",
    "SpeedCommand",
    "map_mode",
    "map_speed",
    "min_distance",
    "max_margin_duals",
    "load_track",
    "generate_reference",
    "run_config",
    "overtake_table",
    "__version__",
]
