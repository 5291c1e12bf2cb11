"""Coincidence-count simulation, two-qubit tomography, and discord estimation.

Submodules follow the pipeline: :mod:`~discordlab.qmat` (small-matrix
algebra), :mod:`~discordlab.states` (state families), :mod:`~discordlab.measure`
(projectors and count simulation), :mod:`~discordlab.tomo` (maximum-likelihood
reconstruction), :mod:`~discordlab.discord` (the three estimators),
:mod:`~discordlab.analysis` (fidelity/purity and Monte Carlo uncertainty),
and :mod:`~discordlab.cli` (the command-line front end).

Hot kernels are numba-compiled by default; set ``DISCORDLAB_NUMBA=0`` for the
pure-numpy fallback.
"""

__version__ = "0.1.0"

from . import analysis, discord, measure, qmat, states, tomo  # noqa: E402,F401

__all__ = ["analysis", "discord", "measure", "qmat", "states", "tomo", "__version__"]
