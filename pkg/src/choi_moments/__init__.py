"""Moment-based detection and quantification of non-Markovian quantum dynamics.

The library builds Choi states of intermediate dynamical maps of a
(time-dependent) Lindblad evolution and decides CP-divisibility from the
first three trace moments of those states, with integrated measures for
quantification. A scenario-driven CLI reproduces the witness curves and the
measure comparison for the bundled models.
"""

__version__ = "0.1.0"

from .spectral import (
    hermitian_spectrum,
    schatten_norm,
    trace_moment,
)
from .rates import (
    ConstantRate,
    ExpCosRate,
    LorentzianRate,
    OhmicDephasingRate,
    TabulatedRate,
    rate_eval,
)
from .lindblad import (
    LindbladGenerator,
    apply_generator,
    dephasing_generator,
    generator_superoperator,
    is_unital,
    isotropic_pauli_generator,
    lindblad_ops_normal,
    named_operator,
)
from .choi import (
    ChoiMatrix,
    SuperoperatorMatrix,
    choi_of_superoperator,
    choi_small_time,
    cptp_diagnostics,
    intermediate_map,
    max_entangled_projector,
    propagate_map,
)
from .detect import (
    DivisibilityReport,
    MeasureReport,
    WitnessSeries,
    cp_divisibility_scan,
    lambda_moments,
    measure_report,
    moment_measure,
    moment_rate_f,
    moment_witness,
    renyi_entropy,
    rhp_measure,
    rhp_rate_g,
    witness_series,
)
from .config import (
    ConfigError,
    ScenarioConfig,
    build_generator,
    bundled_scenario_path,
    load_scenario,
    parse_scenario,
    render_scenario,
)
from .cli import RunReport, run_scenario

__all__ = [
    "__version__",
    "hermitian_spectrum", "schatten_norm", "trace_moment",
    "ConstantRate", "ExpCosRate", "LorentzianRate", "OhmicDephasingRate",
    "TabulatedRate", "rate_eval",
    "LindbladGenerator", "apply_generator", "dephasing_generator",
    "generator_superoperator", "is_unital", "isotropic_pauli_generator",
    "lindblad_ops_normal", "named_operator",
    "ChoiMatrix", "SuperoperatorMatrix", "choi_of_superoperator",
    "choi_small_time", "cptp_diagnostics", "intermediate_map",
    "max_entangled_projector", "propagate_map",
    "DivisibilityReport", "MeasureReport", "WitnessSeries",
    "cp_divisibility_scan", "lambda_moments", "measure_report",
    "moment_measure", "moment_rate_f", "moment_witness", "renyi_entropy",
    "rhp_measure", "rhp_rate_g", "witness_series",
    "ConfigError", "ScenarioConfig", "build_generator",
    "bundled_scenario_path", "load_scenario", "parse_scenario",
    "render_scenario",
    "RunReport", "run_scenario",
]
