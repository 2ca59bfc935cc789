"""Independent reference values.

Everything here works from phase-space integrals and exact coherent-state
overlaps, never from the truncated Fock representation used by the engine.
"""

from dataclasses import dataclass, replace
import math

import numpy as np
from scipy import integrate, optimize

from .protocol import ProtocolConfig


class QuadratureError(RuntimeError):
    pass


QUAD_TOL = 1e-11


def _radial_cutoff(center_abs, delta_r):
    # e^{-(r - |b|)^2} < 1e-14 beyond |b| + 6
    return max(delta_r, center_abs) + 6.5


def wedge_probability(x, z, cfg):
    """P(z|x) = (1/pi) int over wedge z of exp(-|g - sqrt(eta) alpha_x|^2) d^2 g.

    Loss-only channel: Bob holds the coherent state sqrt(eta) alpha_x.
    """
    b = math.sqrt(cfg.eta) * cfg.amplitudes()[x]
    theta = cfg.half_width
    phi0 = z * cfg.phase_step
    r_max = _radial_cutoff(abs(b), cfg.delta_r)

    def integrand(r, phi):
        g = r * complex(math.cos(phi), math.sin(phi))
        return r * math.exp(-abs(g - b) ** 2) / math.pi

    val, err = integrate.dblquad(
        integrand, phi0 - theta, phi0 + theta, cfg.delta_r, r_max, epsabs=QUAD_TOL, epsrel=1e-12
    )
    if err > 1e-9:
        raise QuadratureError(f"wedge quadrature error estimate {err:.2e} exceeds 1e-9")
    return val


def wedge_matrix(cfg):
    """P[x, z] for all symbols, using rotation symmetry P(z|x) = P(z-x|0)."""
    row = np.array([wedge_probability(0, k, cfg) for k in range(cfg.num_states)])
    k = cfg.num_states
    return np.array([[row[(zz - xx) % k] for zz in range(k)] for xx in range(k)])


def numeric_region_operator(z, cfg, n_cutoff_small):
    """<n|R_z|m> by direct quadrature of (1/pi) int <n|g><g|m> d^2 g over the wedge.

    The integrand factorises in polar coordinates, so each entry is a product
    of an adaptive radial and an adaptive angular quadrature.
    """
    if n_cutoff_small > 8:
        raise ValueError("n_cutoff_small must be <= 8")
    N = n_cutoff_small
    theta = cfg.half_width
    phi0 = z * cfg.phase_step
    r_max = cfg.delta_r + 12.0
    R = np.zeros((N + 1, N + 1), dtype=complex)
    for n in range(N + 1):
        for m in range(n, N + 1):
            rad, e1 = integrate.quad(
                lambda r: r ** (n + m + 1) * math.exp(-r * r), cfg.delta_r, r_max,
                epsabs=1e-14, epsrel=1e-13, limit=200,
            )
            re, e2 = integrate.quad(
                lambda p: math.cos((n - m) * p), phi0 - theta, phi0 + theta, epsabs=1e-14, epsrel=1e-13
            )
            im, e3 = integrate.quad(
                lambda p: math.sin((n - m) * p), phi0 - theta, phi0 + theta, epsabs=1e-14, epsrel=1e-13
            )
            if max(e1, e2, e3) > 1e-9:
                raise QuadratureError("region-operator quadrature did not converge")
            norm = math.sqrt(math.factorial(n) * math.factorial(m))
            R[n, m] = rad * complex(re, im) / (math.pi * norm)
            R[m, n] = np.conj(R[n, m])
    return R


def postselected_operator(cfg, n_cutoff_small):
    """Operator of the discarded disc |g| < delta_r (diagonal in Fock basis)."""
    N = n_cutoff_small
    diag = []
    for n in range(N + 1):
        v, _ = integrate.quad(lambda r: 2 * r ** (2 * n + 1) * math.exp(-r * r), 0, cfg.delta_r,
                              epsabs=1e-14, epsrel=1e-13)
        diag.append(v / math.factorial(n))
    return np.diag(diag).astype(complex)


# -- loss-only key rate ------------------------------------------------------


def _entropy_bits(w):
    w = w[w > 1e-300]
    return float(-np.sum(w * np.log2(w)))


def _ensemble_entropy(weights, amps):
    """Entropy of sum_x w_x |a_x><a_x| from the Gram-weighted matrix."""
    a = np.asarray(amps)
    ov = np.exp(-0.5 * np.abs(a)[:, None] ** 2 - 0.5 * np.abs(a)[None, :] ** 2 + a[:, None] * a[None, :].conj())
    s = np.sqrt(np.clip(weights, 0, None))
    M = s[:, None] * ov * s[None, :]
    w = np.linalg.eigvalsh(0.5 * (M + M.conj().T))
    return _entropy_bits(np.clip(w, 0, None))


@dataclass
class LossOnlyResult:
    mutual_info: float
    holevo: float
    p_pass: float
    rate: float
    cond_probs: np.ndarray


def lossonly_key_rate(cfg, P=None):
    """Reverse-reconciliation rate against the generalised beam-splitter attack.

    rate = p_pass (beta I(X:Z) - chi(Z:E)) on the postselected distribution,
    where Eve holds sqrt(1 - eta) alpha_x. Excess noise in ``cfg`` is ignored.
    """
    if P is None:
        P = wedge_matrix(cfg)
    probs = np.asarray(cfg.probs)
    joint = probs[:, None] * P
    pp = float(joint.sum())
    joint = joint / pp
    pz = joint.sum(axis=0)
    px = joint.sum(axis=1)
    h = lambda p: _entropy_bits(np.asarray(p).ravel())
    mi = h(px) + h(pz) - h(joint)
    eve = math.sqrt(1 - cfg.eta) * cfg.amplitudes()
    chi = _ensemble_entropy(px, eve)
    for zz in range(cfg.num_states):
        if pz[zz] > 0:
            chi -= pz[zz] * _ensemble_entropy(joint[:, zz] / pz[zz], eve)
    return LossOnlyResult(
        mutual_info=mi, holevo=max(chi, 0.0), p_pass=pp, rate=pp * (cfg.beta * mi - chi), cond_probs=P
    )


def optimal_alpha(cfg, bounds=(0.7, 1.7), xtol=1e-4):
    """Amplitude maximising the loss-only rate (bounded scalar search)."""
    res = optimize.minimize_scalar(
        lambda a: -lossonly_key_rate(replace(cfg, alpha=a)).rate,
        bounds=bounds,
        method="bounded",
        options={"xatol": xtol},
    )
    return float(res.x), float(-res.fun)
