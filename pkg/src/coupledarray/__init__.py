"""Array gains of mutually coupled dipole arrays from multiport circuit theory."""

__version__ = "0.1.0"

from .errors import ConfigError, DomainError, NumericalError
from .specfun import sici, sine_integral, cosine_integral
from .geometry import (
    ArrayGeometry,
    ArrayKind,
    Direction,
    custom_positions,
    radius_for_spacing,
    steering_vector,
    uca_positions,
    ula_positions,
)
from .impedance import (
    ImpedanceBlocks,
    build_link_blocks,
    dipole_self_impedance,
    impedance_matrix,
    mutual_impedance,
    radiation_resistance,
)
from .multiport import (
    ANTENNA_NOISE_ONLY,
    ILLUSTRATIVE_LNA_NOISE,
    NoiseModel,
    TerminationModel,
    channel_matrix,
    physical_channel_matrix,
    solve_multiport,
)
from .scenario import LinkDirection, LinkScenario
from .arraygain import (
    GainResult,
    Reference,
    gain_energy_product,
    min_energy_per_bit,
    receive_array_gain,
    single_antenna_reference,
    transmit_array_gain,
    transmit_array_gain_far_field,
)
from .fastsolve import StructuredMatrix, StructureKind
from .sweep import SweepSpec, emit_csv, parse_config, run_peaks, run_sweep

import types as _types

__all__ = [n for n, v in globals().items() if not n.startswith("_") and not isinstance(v, _types.ModuleType)]
