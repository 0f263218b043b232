"""von Mises-Fisher negative log-likelihood on the unit sphere.

The density for a unit mean-direction target e and an unnormalized
prediction ehat with concentration kappa = ||ehat|| is

    vMF(e; ehat) = C_d(kappa) * exp(ehat . e)
    C_d(kappa)   = kappa^v / ((2 pi)^(d/2) * I_v(kappa)),   v = d/2 - 1

so the per-step loss is

    nll(ehat; e) = -log C_d(||ehat||) - ehat . e + reg_weight * ||ehat||

with analytic gradient

    d nll / d ehat = (R_v(kappa) + reg_weight) * ehat / kappa - e

where R_v = I_{v+1}/I_v is the Bessel ratio.  kappa = 0 is a removable
singularity handled by its limits (loss -log C_d(0), gradient -e).

log I_v is evaluated in log space: an ascending power series for
kappa <= max(12, v), and the uniform large-order asymptotic expansion
(DLMF 10.41.3, reparameterized so the v -> 0 limit is regular) beyond.
Everything is float64 and vectorized over kappa.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "VmfConfig",
    "VmfEvaluation",
    "log_bessel_i",
    "log_norm_const",
    "bessel_ratio",
    "nll_vmf",
    "nll_vmf_batch",
]

_LOG_2PI = math.log(2.0 * math.pi)

# Order of the last retained term of the asymptotic expansion.  Terms shrink
# at least like (1/12)^k past the series/asymptotic switch, so k <= 10 leaves
# a truncation gap ~1e-10, well under the 1e-6 continuity contract.
_ASYMPTOTIC_TERMS = 10


@dataclass(frozen=True)
class VmfConfig:
    """Loss configuration: embedding dimension and norm regularizer weight."""

    dim: int
    reg_weight: float = 0.02
    series_threshold: float = 12.0

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError(f"vMF needs dim >= 2, got {self.dim}")
        if self.reg_weight < 0:
            raise ValueError("reg_weight must be >= 0")

    @property
    def order(self) -> float:
        return self.dim / 2.0 - 1.0


@dataclass(frozen=True)
class VmfEvaluation:
    """Loss value, gradient w.r.t. the predicted vector, and its norm."""

    loss: float
    grad: np.ndarray
    kappa: float


def _poly_u_coeffs(max_k: int) -> list[dict[int, Fraction]]:
    """Coefficients of the Debye polynomials u_k(t) (DLMF 10.41.3).

    Generated exactly from the recurrence
        u_{k+1}(t) = t^2 (1 - t^2) u_k'(t) / 2
                     + (1/8) * integral_0^t (1 - 5 s^2) u_k(s) ds
    to avoid hand-transcription errors in the higher-order coefficients.
    """
    polys = [{0: Fraction(1)}]
    for _ in range(max_k):
        u = polys[-1]
        nxt: dict[int, Fraction] = {}
        for m, c in u.items():
            if m > 0:
                d = c * m
                nxt[m + 1] = nxt.get(m + 1, Fraction(0)) + d / 2
                nxt[m + 3] = nxt.get(m + 3, Fraction(0)) - d / 2
            nxt[m + 1] = nxt.get(m + 1, Fraction(0)) + c / (8 * (m + 1))
            nxt[m + 3] = nxt.get(m + 3, Fraction(0)) - 5 * c / (8 * (m + 3))
        polys.append({m: c for m, c in nxt.items() if c != 0})
    return polys


def _reduced_u_polys(max_k: int) -> list[np.ndarray]:
    """Float coefficients of q_k(y) where u_k(t) = t^k q_k(t^2).

    u_k only has powers t^k, t^{k+2}, ..., t^{3k}, so the reduction is exact.
    Returned arrays are q_k's coefficients in increasing powers of y.
    """
    out = []
    for k, poly in enumerate(_poly_u_coeffs(max_k)):
        coeffs = np.zeros(k + 1)
        for m, c in poly.items():
            coeffs[(m - k) // 2] = float(c)
        out.append(coeffs)
    return out


_U_REDUCED = _reduced_u_polys(_ASYMPTOTIC_TERMS)


def _check_order_arg(v: float, kappa: np.ndarray) -> None:
    if v < 0:
        raise ValueError(f"Bessel order must be >= 0, got {v}")
    if np.any(~np.isfinite(kappa)) or np.any(kappa < 0):
        raise ValueError("Bessel argument must be finite and >= 0")


def _log_bessel_series(v: float, kappa: np.ndarray) -> np.ndarray:
    """log I_v via the ascending series, summed entirely in log space.

    Term j is (kappa/2)^{v+2j} / (j! Gamma(v+j+1)).  The largest term sits
    near j* = (sqrt(v^2+kappa^2) - v)/2; truncation runs well past it.
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    out = np.full(kappa.shape, -np.inf)
    pos = kappa > 0
    if v == 0:
        out[~pos] = 0.0
    if not np.any(pos):
        return out
    kp = kappa[pos]
    kmax = float(kp.max())
    peak = (math.hypot(v, kmax) - v) / 2.0
    n_terms = int(math.ceil(peak)) + 80
    j = np.arange(n_terms, dtype=np.float64)
    log_gammas = np.array(
        [math.lgamma(i + 1.0) + math.lgamma(v + i + 1.0) for i in range(n_terms)]
    )
    # terms[j, i] = (v + 2j) log(kappa_i / 2) - log j! - log Gamma(v+j+1)
    log_half = np.log(kp / 2.0)
    terms = (v + 2.0 * j)[:, None] * log_half[None, :] - log_gammas[:, None]
    m = terms.max(axis=0)
    out[pos] = m + np.log(np.exp(terms - m[None, :]).sum(axis=0))
    return out


def _log_bessel_uniform(v: float, kappa: np.ndarray) -> np.ndarray:
    """log I_v via the uniform asymptotic expansion, valid for large kappa.

    DLMF 10.41.3 rewritten with s = 1/sqrt(v^2+kappa^2) and t = v*s so the
    u_k(t)/v^k terms become s^k q_k(t^2), regular down to v = 0 (where the
    expansion degenerates to Hankel's large-argument form).
    """
    kappa = np.asarray(kappa, dtype=np.float64)
    r = np.hypot(v, kappa)
    s = 1.0 / r
    t2 = (v * s) ** 2
    total = np.zeros_like(kappa)
    for k in range(_ASYMPTOTIC_TERMS, -1, -1):
        qk = _U_REDUCED[k]
        acc = np.zeros_like(t2)
        for c in qk[::-1]:
            acc = acc * t2 + c
        total = total * s + acc
    lead = r - 0.5 * _LOG_2PI - 0.5 * np.log(r)
    if v > 0:
        lead = lead + v * np.log(kappa / (v + r))
    return lead + np.log(total)


def log_bessel_i(v: float, kappa) -> np.ndarray | float:
    """log of the modified Bessel function of the first kind, I_v(kappa).

    Series regime kappa <= max(series cutoff, v); uniform asymptotic beyond.
    Accepts scalars or arrays of kappa; order v is scalar.
    """
    scalar = np.isscalar(kappa)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    _check_order_arg(v, kappa)
    cut = max(12.0, v)
    out = np.empty_like(kappa)
    lo = kappa <= cut
    if np.any(lo):
        out[lo] = _log_bessel_series(v, kappa[lo])
    if np.any(~lo):
        out[~lo] = _log_bessel_uniform(v, kappa[~lo])
    return float(out[0]) if scalar else out


def log_norm_const(d: int, kappa) -> np.ndarray | float:
    """log C_d(kappa) with C_d = kappa^v / ((2 pi)^{d/2} I_v(kappa)).

    The kappa -> 0 limit C_d(0) = 2^v Gamma(v+1) / (2 pi)^{d/2} is exact at
    kappa = 0; for kappa > 0 the v*log(kappa) term cancels against the
    series' leading log term, so no precision is lost near zero.
    """
    if d < 2:
        raise ValueError(f"vMF dimension must be >= 2, got {d}")
    scalar = np.isscalar(kappa)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    v = d / 2.0 - 1.0
    _check_order_arg(v, kappa)
    out = np.empty_like(kappa)
    zero = kappa == 0
    out[zero] = v * math.log(2.0) + math.lgamma(v + 1.0) - (d / 2.0) * _LOG_2PI
    if np.any(~zero):
        kp = kappa[~zero]
        out[~zero] = v * np.log(kp) - (d / 2.0) * _LOG_2PI - log_bessel_i(v, kp)
    return float(out[0]) if scalar else out


def bessel_ratio(v: float, kappa) -> np.ndarray | float:
    """R_v(kappa) = I_{v+1}(kappa) / I_v(kappa) in [0, 1).

    Evaluated with the Gautschi continued fraction
        R_v = 1 / (2(v+1)/kappa + 1 / (2(v+2)/kappa + ...))
    via the modified Lentz algorithm; monotone in kappa, -> 0 at 0, -> 1 at
    infinity.
    """
    scalar = np.isscalar(kappa)
    kappa = np.atleast_1d(np.asarray(kappa, dtype=np.float64))
    _check_order_arg(v, kappa)
    out = np.zeros_like(kappa)
    pos = kappa > 0
    if np.any(pos):
        kp = kappa[pos]
        tiny = 1e-300
        f = np.full_like(kp, tiny)
        c = f.copy()
        dd = np.zeros_like(kp)
        n = 1
        while True:
            b = 2.0 * (v + n) / kp
            dd = b + dd
            dd[dd == 0] = tiny
            c = b + 1.0 / c
            c[c == 0] = tiny
            dd = 1.0 / dd
            delta = c * dd
            f = f * delta
            if np.all(np.abs(delta - 1.0) < 1e-15) or n > 20000:
                break
            n += 1
        out[pos] = f
    return float(out[0]) if scalar else out


def nll_vmf_batch(e_hat: np.ndarray, e: np.ndarray, cfg: VmfConfig):
    """Loss, gradient and kappa for a batch of predictions.

    e_hat, e: arrays of shape [n, d]; rows of e must be unit vectors.
    Returns (loss[n], grad[n, d], kappa[n]).
    """
    e_hat = np.asarray(e_hat, dtype=np.float64)
    e = np.asarray(e, dtype=np.float64)
    if e_hat.shape != e.shape or e_hat.shape[-1] != cfg.dim:
        raise ValueError(f"shape mismatch: {e_hat.shape} vs {e.shape} (d={cfg.dim})")
    if np.any(~np.isfinite(e_hat)):
        raise ValueError("non-finite prediction passed to vMF loss")
    kappa = np.linalg.norm(e_hat, axis=-1)
    dot = np.einsum("...d,...d->...", e_hat, e)
    loss = -log_norm_const(cfg.dim, kappa) - dot + cfg.reg_weight * kappa

    grad = -e.copy()
    pos = kappa > 0
    if np.any(pos):
        ratio = bessel_ratio(cfg.order, kappa[pos])
        scale = (ratio + cfg.reg_weight) / kappa[pos]
        grad[pos] += scale[:, None] * e_hat[pos]
    return loss, grad, kappa


def nll_vmf(e_hat: np.ndarray, e: np.ndarray, cfg: VmfConfig) -> VmfEvaluation:
    """Single-vector convenience wrapper around nll_vmf_batch."""
    loss, grad, kappa = nll_vmf_batch(e_hat[None, :], e[None, :], cfg)
    return VmfEvaluation(loss=float(loss[0]), grad=grad[0], kappa=float(kappa[0]))
