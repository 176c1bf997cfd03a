import logging
import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy import fft

from core.config import PAD_FACTOR, TAIL_TOL
from core.errors import TailError
from core.grid import FloatArray, Grid1D

_logger: logging.Logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SpectralDensity:
    """
    Sampled ``|g^(xi)|^2`` of a real function on the non-negative frequencies.

    The transform kernel is ``exp(-2 pi i x xi)``. Because the input is
    real the density is even, so integrals over the whole line are
    weighted sums over ``freqs`` with ``weights`` 2 except at DC (and at
    Nyquist for even lengths).

    Attributes
    ----------
    freqs : ndarray
        Frequencies ``k * dxi`` for ``k = 0 .. n_fft // 2``.
    density : ndarray
        Squared modulus of the transform, summed over vector components.
    weights : ndarray
        Multiplicity of each bin when integrating over the whole line.
    dxi : float
        Frequency resolution, the reciprocal of the padded length.
    """

    freqs: FloatArray
    density: FloatArray
    weights: FloatArray
    dxi: float

    def integrate(
        self,
        weight: Callable[[FloatArray], FloatArray] | None = None,
        mask: FloatArray | None = None,
        include_dc: bool = True,
    ) -> float:
        """
        Riemann sum of ``weight(|xi|) * density`` over the whole line.

        Parameters
        ----------
        weight : callable, optional
            Multiplier evaluated on the frequencies (DC excluded when it
            would be singular; pass ``include_dc=False``).
        mask : ndarray of bool, optional
            Restrict the sum to these bins.
        include_dc : bool
            Whether the zero-frequency bin takes part.
        """
        select = np.ones(self.freqs.shape, dtype=bool) if mask is None else mask.copy()
        if not include_dc:
            select[0] = False
        terms = self.weights[select] * self.density[select]
        if weight is not None:
            terms = terms * weight(self.freqs[select])
        return float(np.sum(terms) * self.dxi)

    def annulus(self, j: int) -> FloatArray:
        """Mask of the bins with ``2**j <= xi < 2**(j + 1)``."""
        return (self.freqs >= 2.0**j) & (self.freqs < 2.0 ** (j + 1))


def dft_halfline_density(
    values: ArrayLike,
    grid: Grid1D,
    pad_factor: int = PAD_FACTOR,
    min_length: float = 0.0,
    tail_tol: float = TAIL_TOL,
) -> SpectralDensity:
    """
    Spectral density of sampled data that settles to a constant.

    The constant (the value at the first node) is subtracted, the result
    is zero-padded and transformed with a real FFT scaled by the grid
    spacing, which makes the discrete Parseval identity
    ``sum(weights * density) * dxi == spacing * sum(|g|^2)`` exact.

    Parameters
    ----------
    values : array_like
        Samples of shape ``(n,)`` or ``(n, k)`` on ``grid``.
    grid : Grid1D
        The sampling grid.
    pad_factor : int
        Minimum ratio of padded to original length.
    min_length : float
        Minimum padded length in units of ``x``; pass ``10 * T`` to get
        ``dxi <= 1 / (10 T)``.
    tail_tol : float
        Allowed mismatch between the two ends, relative to the largest
        sample magnitude (absolute below 1).

    Returns
    -------
    SpectralDensity
        The density on the non-negative frequencies.

    Raises
    ------
    TailError
        If the two ends of the data differ by more than ``tail_tol``.
    """
    data = np.asarray(values, dtype=float)
    if data.ndim == 1:
        data = data[:, np.newaxis]
    if data.shape[0] != grid.n:
        raise ValueError(
            f"{data.shape[0]} samples do not match a grid of {grid.n} nodes"
        )

    constant = data[0]
    scale = max(1.0, float(np.max(np.abs(data))))
    tail = float(np.max(np.abs(data[-1] - constant)))
    if tail > tail_tol * scale:
        raise TailError(tail)

    shifted = data - constant
    target = max(
        pad_factor * grid.n, math.ceil(min_length / grid.spacing), grid.n
    )
    n_fft = fft.next_fast_len(target, real=True)
    transform = fft.rfft(shifted, n=n_fft, axis=0) * grid.spacing
    density = np.sum(np.abs(transform) ** 2, axis=1)

    weights = np.full(density.shape, 2.0)
    weights[0] = 1.0
    if n_fft % 2 == 0:
        weights[-1] = 1.0

    freqs = fft.rfftfreq(n_fft, d=grid.spacing)
    _logger.debug(
        f"transformed {grid.n} samples with {n_fft}-point FFT "
        f"(dxi = {1.0 / (n_fft * grid.spacing):.3e})"
    )
    return SpectralDensity(
        freqs=freqs,
        density=density,
        weights=weights,
        dxi=1.0 / (n_fft * grid.spacing),
    )
