"""Maximum-SNR closed-form blind source separation."""

from .channel import PAPER_MIXING_MATRIX, ChannelSpec, add_awgn, mix
from .evaluation import AlignmentReport, align, corrcoef
from .msnr import (
    DegenerateStatisticsError,
    DemixingSolution,
    apply_demixing,
    correlation_matrices,
    moving_average,
    objective,
    objective_gradient,
    solve_demixing,
)
from .siggen import ModulationSpec, modulate_ook, modulate_qpsk, random_bits

__all__ = [
    "PAPER_MIXING_MATRIX",
    "AlignmentReport",
    "ChannelSpec",
    "DegenerateStatisticsError",
    "DemixingSolution",
    "ModulationSpec",
    "add_awgn",
    "align",
    "apply_demixing",
    "corrcoef",
    "correlation_matrices",
    "mix",
    "modulate_ook",
    "modulate_qpsk",
    "moving_average",
    "objective",
    "objective_gradient",
    "random_bits",
    "solve_demixing",
]
