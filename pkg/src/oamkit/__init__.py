"""Orbital-angular-momentum spectra of paraxial beams and inverse design of vortex pancakes."""

from .decompose import (
    AzimuthalProfileTable,
    DislocationSet,
    azimuthal_decompose,
    energy_and_oam,
    locate_dislocations,
    net_topological_charge,
    spectrum_from_field,
)
from .design import (
    DesignResult,
    DesignTarget,
    design_equal_populations_n2,
    design_general,
    design_suppress_p0,
    design_suppress_p1,
    design_suppress_p2,
    scan_parameter,
    suppressing_position,
)
from .doppler import recover_weights, sidebands_from_weights, synthesize_beat_signal
from .fields import (
    LgModeP0,
    NecklaceSpec,
    SampledField,
    VortexPancake,
    elementary_symmetric,
    eval_lg_p0,
    eval_necklace,
    eval_pancake,
    rasterize,
)
from .propagate import PropagationSpec, fresnel_propagate, propagate_pancake_analytic
from .spectrum import (
    OamSpectrum,
    WeightVector,
    n2_closed_form,
    pancake_cn,
    pancake_lg_coefficients,
    pancake_weights,
    weights_from_cn,
)

__version__ = "0.1.0"
