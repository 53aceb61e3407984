"""Discrete Weyl operators, Weyl-covariant channels and their output 2-norms."""

__version__ = "0.1.0"

from .zgroup import GroupElement, Subgroup, cyclic_subgroup, generated_subgroup, maximal_degenerate_subgroups
from .weyl import fourier_transform, inverse_fourier, weyl_operator
from .covariant import WeylChannel, depolarizing, dephasing_channel, from_p, from_phi
from .norms import equality_conditions, kmnr_bound, max_output_norm
from .complement import complementary_from_kraus, structured_complement

__all__ = [
    "GroupElement",
    "Subgroup",
    "cyclic_subgroup",
    "generated_subgroup",
    "maximal_degenerate_subgroups",
    "fourier_transform",
    "inverse_fourier",
    "weyl_operator",
    "WeylChannel",
    "depolarizing",
    "dephasing_channel",
    "from_p",
    "from_phi",
    "equality_conditions",
    "kmnr_bound",
    "max_output_norm",
    "complementary_from_kraus",
    "structured_complement",
]
