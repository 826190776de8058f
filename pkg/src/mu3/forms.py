"""Discrete differential forms on periodic grids.

The 2-form pulled back from the sphere is stored through its vector proxy W
(W_i = half the epsilon-contraction of the form components); the spectral
Hodge solve produces a divergence-free, mean-zero 1-form potential A with
curl A = W minus its harmonic (mean) part.  All derivatives used to build W
are 4th-order central differences; everything downstream of the fast
transform is exact in the band-limited sense.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft

from .errors import GridMismatch, NotExact, UndersampledField
from .maps import MAGIC_FORM, read_field3, write_field3

TWO_PI = 2.0 * np.pi
FOUR_PI = 4.0 * np.pi
TOL_EXACT = 5e-2  # exactness gate on degree-normalized mean components


def _fd4(F, axis, h):
    """4th-order periodic central difference along one axis."""
    return (
        8.0 * (np.roll(F, -1, axis=axis) - np.roll(F, 1, axis=axis))
        - (np.roll(F, -2, axis=axis) - np.roll(F, 2, axis=axis))
    ) / (12.0 * h)


def _kgrids(shape):
    """Integer wavenumbers (s, t axes full; u axis half-complex)."""
    ns, nt, nu = shape
    ks = np.fft.fftfreq(ns, d=1.0 / ns)
    kt = np.fft.fftfreq(nt, d=1.0 / nt)
    ku = np.fft.rfftfreq(nu, d=1.0 / nu)
    return ks, kt, ku


def _rfft_weights(shape):
    """Multiplicities of the half-complex u bins in full-spectrum sums."""
    nu = shape[2]
    w = np.full(nu // 2 + 1, 2.0)
    w[0] = 1.0
    if nu % 2 == 0:
        w[-1] = 1.0
    return w


def _nyquist_mask(shape):
    """True on bins to drop: the self-conjugate planes of even axes."""
    ns, nt, nu = shape
    ks, kt, ku = _kgrids(shape)
    m = np.zeros((ns, nt, nu // 2 + 1), dtype=bool)
    if ns % 2 == 0:
        m[ns // 2, :, :] = True
    if nt % 2 == 0:
        m[:, nt // 2, :] = True
    if nu % 2 == 0:
        m[:, :, -1] = True
    return m


@dataclass
class Form2OnT3:
    """Closed 2-form on the 3-torus via its vector proxy W.

    W is stored after a spectral divergence projection plus removal of the
    self-conjugate bins; both changes are invisible to the potential
    contraction and keep the discrete closedness residual at rounding level.
    The pre-projection residual is kept as a diagnostic.
    """

    W: np.ndarray  # (3, ns, nt, nu)
    shape: tuple
    div_residual_raw: float
    div_residual: float

    @property
    def spacings(self):
        return tuple(TWO_PI / n for n in self.shape)

    def means(self):
        return np.array([self.W[i].mean() for i in range(3)])


@dataclass
class Form1OnT3:
    A: np.ndarray  # (3, ns, nt, nu)
    shape: tuple
    gauge: str = "coulomb"

    @property
    def spacings(self):
        return tuple(TWO_PI / n for n in self.shape)


@dataclass
class Form2OnT2:
    w: np.ndarray  # (n, n)
    n: int
    grad_bound: np.ndarray = field(default=None, repr=False)

    @property
    def spacing(self):
        return TWO_PI / self.n


def divergence_spectral(W, shape):
    """Relative L2 norm of the spectral divergence of W."""
    ks, kt, ku = _kgrids(shape)
    S = [sfft.rfftn(W[i]) for i in range(3)]
    div = (
        1j * ks[:, None, None] * S[0]
        + 1j * kt[None, :, None] * S[1]
        + 1j * ku[None, None, :] * S[2]
    )
    wgt = _rfft_weights(shape)[None, None, :]
    num = float(np.sum(wgt * np.abs(div) ** 2))
    den = sum(float(np.sum(wgt * np.abs(S[i]) ** 2)) for i in range(3))
    return np.sqrt(num / den) if den > 0 else 0.0


def _spectral_clean(W, shape):
    """Remove the longitudinal (divergence) part and self-conjugate bins."""
    ks, kt, ku = _kgrids(shape)
    S = [sfft.rfftn(W[i]) for i in range(3)]
    kk = (
        ks[:, None, None] ** 2 + kt[None, :, None] ** 2 + ku[None, None, :] ** 2
    )
    kk[0, 0, 0] = 1.0
    kdot = (
        ks[:, None, None] * S[0] + kt[None, :, None] * S[1] + ku[None, None, :] * S[2]
    ) / kk
    ny = _nyquist_mask(shape)
    out = np.empty_like(W)
    for i, k in enumerate((ks[:, None, None], kt[None, :, None], ku[None, None, :])):
        Si = S[i] - k * kdot
        Si[ny] = 0.0
        out[i] = sfft.irfftn(Si, s=shape)
    return out


def pullback_area_form(field3):
    """Pull the (unit-total-area) sphere area form back along grid samples.

    Derivatives are 4th-order central differences; the result is the vector
    proxy W of the 2-form, spectrally cleaned as documented on Form2OnT3.
    """
    if field3.undersampled:
        raise UndersampledField(
            "cell variation %.3f rad exceeds pi/2" % field3.max_cell_angle
        )
    F = field3.values
    ns, nt, nu = F.shape[:3]
    hs, ht, hu = TWO_PI / ns, TWO_PI / nt, TWO_PI / nu
    ds = _fd4(F, 0, hs)
    dt = _fd4(F, 1, ht)
    du = _fd4(F, 2, hu)
    W = np.empty((3, ns, nt, nu))
    W[0] = np.sum(F * np.cross(dt, du), axis=-1) / FOUR_PI
    W[1] = np.sum(F * np.cross(du, ds), axis=-1) / FOUR_PI
    W[2] = np.sum(F * np.cross(ds, dt), axis=-1) / FOUR_PI
    raw = divergence_spectral(W, (ns, nt, nu))
    W = _spectral_clean(W, (ns, nt, nu))
    res = divergence_spectral(W, (ns, nt, nu))
    return Form2OnT3(W, (ns, nt, nu), raw, res)


def pullback_area_form_t2(field2):
    if field2.undersampled:
        raise UndersampledField(
            "cell variation %.3f rad exceeds pi/2" % field2.max_cell_angle
        )
    F = field2.values
    n = F.shape[0]
    h = TWO_PI / n
    d1 = _fd4(F, 0, h)
    d2 = _fd4(F, 1, h)
    w = np.sum(F * np.cross(d1, d2), axis=-1) / FOUR_PI
    bound = np.linalg.norm(d1, axis=-1) * np.linalg.norm(d2, axis=-1) / FOUR_PI
    return Form2OnT2(w, n, bound)


def harmonic_part(omega):
    """Mean components of W; each times (2*pi)^2 is the degree of the
    restriction to the transverse 2-subtorus."""
    return omega.means()


def degree_scale_means(omega):
    return harmonic_part(omega) * TWO_PI**2


def solve_potential(omega, tol_exact=TOL_EXACT):
    """Coulomb-gauge spectral solve for A with curl A = W - harmonic part.

    Precondition: every degree-normalized mean component is below tol_exact,
    otherwise the 2-form is not exact and the potential does not exist.
    """
    degs = degree_scale_means(omega)
    if np.any(np.abs(degs) >= tol_exact):
        raise NotExact(
            "nonzero pairwise degrees %s (tolerance %g): no global potential"
            % (np.array2string(degs, precision=4), tol_exact)
        )
    shape = omega.shape
    ks, kt, ku = _kgrids(shape)
    S = [sfft.rfftn(omega.W[i]) for i in range(3)]
    kk = ks[:, None, None] ** 2 + kt[None, :, None] ** 2 + ku[None, None, :] ** 2
    kk[0, 0, 0] = 1.0
    kx, ky, kz = ks[:, None, None], kt[None, :, None], ku[None, None, :]
    C0 = ky * S[2] - kz * S[1]
    C1 = kz * S[0] - kx * S[2]
    C2 = kx * S[1] - ky * S[0]
    ny = _nyquist_mask(shape)
    A = np.empty((3,) + shape)
    for i, C in enumerate((C0, C1, C2)):
        Ai = 1j * C / kk
        Ai[0, 0, 0] = 0.0
        Ai[ny] = 0.0
        A[i] = sfft.irfftn(Ai, s=shape)
    return Form1OnT3(A, shape)


def curl_spectral(alpha):
    shape = alpha.shape
    ks, kt, ku = _kgrids(shape)
    S = [sfft.rfftn(alpha.A[i]) for i in range(3)]
    kx, ky, kz = ks[:, None, None], kt[None, :, None], ku[None, None, :]
    out = np.empty((3,) + shape)
    out[0] = sfft.irfftn(1j * (ky * S[2] - kz * S[1]), s=shape)
    out[1] = sfft.irfftn(1j * (kz * S[0] - kx * S[2]), s=shape)
    out[2] = sfft.irfftn(1j * (kx * S[1] - ky * S[0]), s=shape)
    return out


def integrate_alpha_wedge_omega(alpha, omega):
    """The pairing integral: grid sum of A.W times the cell volume."""
    if alpha.shape != omega.shape:
        raise GridMismatch("grids %s vs %s" % (alpha.shape, omega.shape))
    hs, ht, hu = alpha.spacings
    return float(hs * ht * hu * np.sum(alpha.A * omega.W))


def integrate_form2_on_t2(omega2):
    return float(omega2.spacing**2 * np.sum(omega2.w))


def hopf_integral_spectral(W0, W1, W2, slab=32):
    """The pairing integral computed directly in the spectral domain,
    without materializing the potential.

    Evaluates sum over k of Im(conj(k x What) . What) / |k|^2 with the same
    zero-mode and self-conjugate-bin conventions as solve_potential, so on a
    common grid it matches the two-step route to rounding error.  The grids
    may be anisotropic; W arrays must be C-contiguous (ns, nt, nu), real.
    """
    shape = W0.shape
    ns, nt, nu = shape
    ks, kt, ku = _kgrids(shape)
    wgt_u = _rfft_weights(shape)
    S = []
    for w in (W0, W1, W2):
        S.append(sfft.rfftn(w))
    acc = 0.0
    for lo in range(0, ns, slab):
        hi = min(lo + slab, ns)
        kx = ks[lo:hi, None, None]
        ky = kt[None, :, None]
        kz = ku[None, None, :]
        s0 = S[0][lo:hi]
        s1 = S[1][lo:hi]
        s2 = S[2][lo:hi]
        kk = kx**2 + ky**2 + kz**2
        kk = np.where(kk == 0.0, 1.0, kk)
        w = np.broadcast_to(wgt_u[None, None, :], s0.shape).copy()
        if lo == 0:
            w[0, 0, 0] = 0.0
        if ns % 2 == 0 and lo <= ns // 2 < hi:
            w[ns // 2 - lo, :, :] = 0.0
        if nt % 2 == 0:
            w[:, nt // 2, :] = 0.0
        if nu % 2 == 0:
            w[:, :, -1] = 0.0
        C0 = ky * s2 - kz * s1
        C1 = kz * s0 - kx * s2
        C2 = kx * s1 - ky * s0
        term = (
            np.conj(C0) * s0 + np.conj(C1) * s1 + np.conj(C2) * s2
        ).imag
        acc += float(np.sum(w * term / kk))
    npts = ns * nt * nu
    hs, ht, hu = TWO_PI / ns, TWO_PI / nt, TWO_PI / nu
    return hs * ht * hu * acc / npts


def write_form3(path, omega):
    write_field3(path, np.moveaxis(omega.W, 0, -1), magic=MAGIC_FORM)


def read_form3(path):
    g = read_field3(path, magic=MAGIC_FORM, unit=False)
    W = np.moveaxis(g.values, -1, 0)
    shape = W.shape[1:]
    res = divergence_spectral(W, shape)
    return Form2OnT3(W, shape, res, res)
