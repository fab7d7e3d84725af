"""Cosine and sine fields on the normalized arclength interval [0, 1].

A :class:`CosineField` stores ``a_0 .. a_{N-1}`` and represents
``f(sigma) = sum_n a_n cos(n pi sigma)``; every odd derivative of such a
field vanishes at both ends, which is how the Neumann-type boundary
conditions are built into the representation.  A :class:`SineField` stores
``b_1 .. b_{N-1}`` and represents ``g(sigma) = sum_n b_n sin(n pi sigma)``,
which vanishes at both ends.

Physical samples live on the endpoint-inclusive grid ``sigma_j = j / N``,
``j = 0 .. N``.  Products are evaluated pseudospectrally on the periodic
extension of [0, 1] to [0, 2) (cosine fields extend evenly, sine fields
oddly) with zero padding, then truncated back to ``N`` modes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft

from .exceptions import InvalidArgument, InvalidField

COSINE = "cos"
SINE = "sin"


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=float, copy=True)
    if arr.ndim != 1:
        raise InvalidField("coefficients must be a 1-d array")
    if not np.all(np.isfinite(arr)):
        raise InvalidField("coefficients must be finite")
    arr.flags.writeable = False
    return arr


def _check_resolution(N: int) -> None:
    if N < 8 or N & (N - 1):
        raise InvalidArgument(f"N must be a power of two >= 8, got {N}")


@dataclass(frozen=True, eq=False)
class CosineField:
    """Even-symmetric field ``sum_{n<N} a_n cos(n pi sigma)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))
        if self.coeffs.size < 2:
            raise InvalidField("a cosine field needs at least two modes")

    parity = COSINE

    @property
    def N(self) -> int:
        return self.coeffs.size

    def full(self) -> np.ndarray:
        """Coefficients indexed by wavenumber, length N."""
        return np.array(self.coeffs)

    def __eq__(self, other):
        return isinstance(other, CosineField) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"CosineField(N={self.N})"

    @classmethod
    def zeros(cls, N: int) -> "CosineField":
        return cls(np.zeros(N))

    @classmethod
    def mode(cls, N: int, n: int, amplitude: float = 1.0) -> "CosineField":
        a = np.zeros(N)
        a[n] = amplitude
        return cls(a)


@dataclass(frozen=True, eq=False)
class SineField:
    """Odd-symmetric field ``sum_{1<=n<N} b_n sin(n pi sigma)``."""

    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _frozen(self.coeffs))
        if self.coeffs.size < 1:
            raise InvalidField("a sine field needs at least one mode")

    parity = SINE

    @property
    def N(self) -> int:
        return self.coeffs.size + 1

    def full(self) -> np.ndarray:
        """Coefficients indexed by wavenumber (entry 0 is zero), length N."""
        return np.concatenate(([0.0], self.coeffs))

    def __eq__(self, other):
        return isinstance(other, SineField) and np.array_equal(self.coeffs, other.coeffs)

    def __repr__(self):
        return f"SineField(N={self.N})"

    @classmethod
    def zeros(cls, N: int) -> "SineField":
        return cls(np.zeros(N - 1))


def make_field(full_coeffs: np.ndarray, parity: str):
    """Build a field from wavenumber-indexed coefficients of length N."""
    if parity == COSINE:
        return CosineField(full_coeffs)
    return SineField(np.asarray(full_coeffs)[1:])


def grid(N: int) -> np.ndarray:
    """Endpoint-inclusive uniform grid of N + 1 points on [0, 1]."""
    return np.linspace(0.0, 1.0, N + 1)


def _check_samples(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1:
        raise InvalidArgument("samples must be a 1-d array")
    if not np.all(np.isfinite(x)):
        raise InvalidField("samples must be finite")
    _check_resolution(x.size - 1)
    return x


def transform(samples) -> CosineField:
    """Cosine coefficients of the samples on the (N+1)-point grid.

    Uses the type-I cosine transform. The Nyquist coefficient ``a_N`` is
    dropped, so the result carries ``N`` modes.
    """
    x = _check_samples(samples)
    N = x.size - 1
    y = scipy.fft.dct(x, type=1) / N
    y[0] *= 0.5
    return CosineField(y[:N])


def sine_transform(samples) -> SineField:
    """Sine coefficients of samples on the (N+1)-point grid (end values ignored)."""
    x = _check_samples(samples)
    N = x.size - 1
    return SineField(scipy.fft.dst(x[1:-1], type=1) / N)


def values(field, M: int | None = None) -> np.ndarray:
    """Samples of ``field`` on the endpoint-inclusive grid with M intervals."""
    N = field.N
    M = N if M is None else M
    if M < N:
        raise InvalidArgument("cannot sample below the field resolution")
    if field.parity == COSINE:
        c = np.zeros(M + 1)
        c[:N] = field.coeffs
        c[1:M] *= 0.5
        return scipy.fft.dct(c, type=1)
    out = np.zeros(M + 1)
    if M > 1:
        b = np.zeros(M - 1)
        b[: N - 1] = field.coeffs
        out[1:-1] = 0.5 * scipy.fft.dst(b, type=1)
    return out


def inverse(field) -> np.ndarray:
    """Samples on the field's own (N+1)-point grid."""
    return values(field)


def evaluate(field, sigma) -> np.ndarray:
    """Evaluate the series at arbitrary points (direct summation)."""
    sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
    n = np.arange(field.N)
    phase = np.pi * np.outer(sigma, n)
    basis = np.cos(phase) if field.parity == COSINE else np.sin(phase)
    return basis @ field.full()


def deriv(f, order: int, L: float):
    """Arclength derivative of the given order, ``d/ds = (1/L) d/dsigma``.

    A cosine field differentiated an odd number of times becomes a sine
    field and vice versa.
    """
    if int(order) != order or order < 1:
        raise InvalidArgument(f"derivative order must be an integer >= 1, got {order}")
    if not L > 0:
        raise InvalidArgument("L must be positive")
    order = int(order)
    q = np.arange(f.N) * np.pi / L
    c = f.full() * q**order
    if f.parity == COSINE:
        if order % 2 == 0:
            return CosineField((-1) ** (order // 2) * c)
        return SineField((-1) ** ((order + 1) // 2) * c[1:])
    if order % 2 == 0:
        return SineField((-1) ** (order // 2) * c[1:])
    c[0] = 0.0
    return CosineField((-1) ** ((order - 1) // 2) * c)


# -- pseudospectral products -------------------------------------------------

def padded_size(N: int, n_factors: int) -> int:
    """Half-period of the padded periodic grid for an alias-free product.

    Modes below N are free of aliasing when ``2M - n_factors*(N-1) >= N``,
    i.e. the 3/2 rule for quadratic and 2x padding for cubic products.
    """
    return max(N, ((n_factors + 1) * N + 1) // 2)


def spectrum(full_coeffs: np.ndarray, parity: str, M: int) -> np.ndarray:
    """Real-FFT spectrum of the field extended to the 2M-point periodic grid."""
    coeffs = np.asarray(full_coeffs)
    N = coeffs.shape[-1]
    X = np.zeros(coeffs.shape[:-1] + (M + 1,), dtype=complex)
    if parity == COSINE:
        X[..., :N] = M * coeffs
        X[..., 0] *= 2.0
    else:
        X[..., 1:N] = -1j * M * coeffs[..., 1:]
    return X


def periodic_values(full_coeffs: np.ndarray, parity: str, M: int) -> np.ndarray:
    return scipy.fft.irfft(spectrum(full_coeffs, parity, M), n=2 * M, axis=-1)


def project(samples: np.ndarray, M: int, N: int, parity: str):
    """Project periodic samples onto N modes of the requested parity.

    Returns the wavenumber-indexed coefficients and the relative energy of
    the discarded opposite-parity component (the parity residual).
    """
    X = scipy.fft.rfft(samples, axis=-1)
    cos = X.real / M
    cos[..., 0] *= 0.5
    sin = -X.imag / M
    sin[..., 0] = 0.0
    keep, other = (cos, sin) if parity == COSINE else (sin, cos)
    total = np.sqrt(np.sum(keep**2) + np.sum(other**2))
    residual = float(np.sqrt(np.sum(other**2)) / total) if total > 0 else 0.0
    out = np.array(keep[..., :N])
    if parity == SINE:
        out[..., 0] = 0.0
    return out, residual


def _as_field(f):
    if isinstance(f, (CosineField, SineField)):
        return f
    return transform(f)


def product_parity(parities) -> str:
    n_sine = sum(p == SINE for p in parities)
    return COSINE if n_sine % 2 == 0 else SINE


def product(factors, n_modes: int | None = None, with_residual: bool = False):
    """Dealiased pointwise product of fields, truncated to ``n_modes``.

    Factors may be fields or sample arrays (read as cosine samples).  The
    parity of the result follows from the factors; ``with_residual`` also
    returns the relative energy found in the opposite parity.
    """
    fields = [_as_field(f) for f in factors]
    if not fields:
        raise InvalidArgument("product of an empty list")
    N = fields[0].N
    if any(f.N != N for f in fields):
        raise InvalidArgument("factors live on different grids")
    n_modes = N if n_modes is None else n_modes
    parity = product_parity(f.parity for f in fields)
    if any(not np.any(f.coeffs) for f in fields):
        out = make_field(np.zeros(n_modes), parity)
        return (out, 0.0) if with_residual else out
    M = max(padded_size(N, len(fields)), n_modes)
    acc = None
    for f in fields:
        v = periodic_values(f.full(), f.parity, M)
        acc = v if acc is None else acc * v
    coeffs, residual = project(acc, M, n_modes, parity)
    out = make_field(coeffs, parity)
    return (out, residual) if with_residual else out


def multiply(factors) -> np.ndarray:
    """Dealiased product of sampled fields, returned as samples on the same grid."""
    sizes = {np.size(f) if not isinstance(f, (CosineField, SineField)) else f.N + 1
             for f in factors}
    if len(sizes) != 1:
        raise InvalidArgument("factors must share one grid")
    return inverse(product(factors))


# -- integrals ---------------------------------------------------------------

def integrate(f, L: float) -> float:
    """``int_0^L f ds``."""
    if not L > 0:
        raise InvalidArgument("L must be positive")
    f = _as_field(f)
    if f.parity == COSINE:
        return float(L * f.coeffs[0])
    n = np.arange(1, f.N)
    return float(L * np.sum(f.coeffs * (1 - (-1.0) ** n) / (n * np.pi)))


def _cos_sin_overlap(N: int) -> np.ndarray:
    """Matrix of ``int_0^1 cos(n pi s) sin(m pi s) ds`` for n, m < N."""
    n = np.arange(N)[:, None].astype(float)
    m = np.arange(N)[None, :].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        G = m * (1 - (-1.0) ** (m + n)) / (np.pi * (m**2 - n**2))
    return np.where(m == n, 0.0, G)


def l2_inner(f, g, L: float) -> float:
    """``int_0^L f g ds`` for two fields (or sample arrays) on the same grid."""
    if not L > 0:
        raise InvalidArgument("L must be positive")
    f, g = _as_field(f), _as_field(g)
    if f.N != g.N:
        raise InvalidArgument("fields live on different grids")
    a, b = f.full(), g.full()
    if f.parity == g.parity:
        w = np.full(f.N, 0.5)
        if f.parity == COSINE:
            w[0] = 1.0
        return float(L * np.sum(w * a * b))
    if f.parity == SINE:
        a, b = b, a
    return float(L * a @ _cos_sin_overlap(f.N) @ b)


def antiderivative_sine(f: CosineField, L: float) -> SineField:
    """``int_0^s f ds'`` for a mean-zero cosine field (the mean is ignored)."""
    n = np.arange(1, f.N)
    return SineField(L * f.coeffs[1:] / (n * np.pi))
