"""EPON upstream packet-coalescing simulator."""

from ._core import (
    CSV_HEADER,
    ConfigError,
    TraceFormatError,
    calibrate_scale,
    config_keys,
    grant_bytes,
    ideal_power_pct,
    power_fraction,
    should_sleep,
    simulate,
    sweep_csv,
    transmission_time_ns,
    validate_trace,
    wait_poweron_time,
)

__all__ = [
    "CSV_HEADER",
    "ConfigError",
    "TraceFormatError",
    "calibrate_scale",
    "config_keys",
    "grant_bytes",
    "ideal_power_pct",
    "power_fraction",
    "should_sleep",
    "simulate",
    "sweep_csv",
    "transmission_time_ns",
    "validate_trace",
    "wait_poweron_time",
]
