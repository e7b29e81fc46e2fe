"""Python bindings for the normflow C++ core.

Series and frequencies use the same JSON shapes as the CLI config:
a frequency is {"mode": "rational"|"float", "values": [...]} and a series
is a list of {"k": [...], "kbar": [...], "re": x, "im": y} monomials.
"""

from ._normflow import (
    BoundViolation,
    FlowSolution,
    InputError,
    NormflowError,
    a_sequence,
    analyticity_bounds,
    b_sequence,
    birkhoff,
    bruno_check,
    burgers_radius,
    burgers_series,
    derivative_majorant_violation,
    execute,
    flow_exact,
    preset,
    presets,
    run,
)

__all__ = [
    "BoundViolation",
    "FlowSolution",
    "InputError",
    "NormflowError",
    "a_sequence",
    "analyticity_bounds",
    "b_sequence",
    "birkhoff",
    "bruno_check",
    "burgers_radius",
    "burgers_series",
    "derivative_majorant_violation",
    "execute",
    "flow_exact",
    "flow_preset",
    "preset",
    "presets",
    "run",
]


def flow_preset(name, truncation=None, threads=0):
    """Exact flow for a bundled preset; truncation defaults to the preset's order + 2."""
    p = preset(name)
    K = truncation if truncation is not None else max(3, p.get("expected_order") or 4) + 2
    return flow_exact(p["hamiltonian"], p["frequency"], K, threads)
