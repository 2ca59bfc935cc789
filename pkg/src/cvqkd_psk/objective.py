"""Perturbed relative-entropy objective and classical post-processing terms.

f(rho) = D(G_e(rho) || Z(G_e(rho))) in bits, with
G_e(rho) = (1 - e) G(rho) + e 1/dim_G. Writing K = V Q^{1/2} (polar form,
Q = K^dag K), the spectrum of G(rho) is that of Q^{1/2} rho Q^{1/2} padded
with zeros, and K^dag log(G_e(rho)) K = Q^{1/2} log(...) Q^{1/2}. Nothing of
size dim_G is ever formed except in the dense reference methods.
"""

from dataclasses import dataclass
from functools import cached_property
import math

import numpy as np

from . import fock
from .protocol import ProtocolConfig, PostProcessing, kraus_and_pinching


class UndefinedRateError(ValueError):
    pass


@dataclass(frozen=True)
class ObjectiveContext:
    cfg: ProtocolConfig
    post: PostProcessing
    perturbation: float

    def __post_init__(self):
        if not 0 < self.perturbation < 1:
            raise ValueError("perturbation must lie in (0, 1)")

    @classmethod
    def from_config(cls, cfg, post=None):
        return cls(cfg=cfg, post=post or kraus_and_pinching(cfg), perturbation=cfg.perturbation)

    @property
    def dim_G(self):
        return self.post.dim_G

    # -- objective ---------------------------------------------------------

    @cached_property
    def _sqrt_q(self):
        """Q^{1/2} with Q = K^dag K = 1_A (x) sum_z R_z."""
        q = fock.sqrtm_psd(sum(self.post.regions))
        return np.kron(np.eye(self.post.dim_A), q)

    @cached_property
    def _kraus_blocks(self):
        return self.post.kraus_blocks()

    def _spectra(self, rho, eps, vectors):
        eps = self.perturbation if eps is None else eps
        floor = eps / self.dim_G
        sq = self._sqrt_q
        # K rho K^dag and Q^{1/2} rho Q^{1/2} share their nonzero spectrum
        H = (1 - eps) * (sq @ rho @ sq) + floor * np.eye(len(sq))
        main = np.linalg.eigh(fock.hermitian(H)) if vectors else (np.linalg.eigvalsh(fock.hermitian(H)), None)
        blocks = []
        for Kz in self._kraus_blocks:
            B = fock.hermitian((1 - eps) * (Kz @ rho @ Kz.conj().T) + floor * np.eye(len(Kz)))
            blocks.append(np.linalg.eigh(B) if vectors else (np.linalg.eigvalsh(B), None))
        return eps, floor, main, blocks

    def _value(self, floor, main, blocks):
        lam = np.clip(main[0], floor * 1e-3, None)
        neg_s = np.sum(lam * np.log2(lam)) + (self.dim_G - len(lam)) * floor * math.log2(floor)
        neg_sz = 0.0
        for mu, _ in blocks:
            mu = np.clip(mu, floor * 1e-3, None)
            neg_sz += np.sum(mu * np.log2(mu))
        return float(neg_s - neg_sz)

    def value(self, rho, eps=None):
        _, floor, main, blocks = self._spectra(rho, eps, vectors=False)
        return self._value(floor, main, blocks)

    def gradient(self, rho, eps=None):
        """Hermitian gradient, normalised so that df = Re Tr[delta grad]."""
        return self.value_and_gradient(rho, eps)[1]

    def value_and_gradient(self, rho, eps=None):
        eps, floor, main, blocks = self._spectra(rho, eps, vectors=True)
        lam, U = main
        lam = np.clip(lam, floor * 1e-3, None)
        SU = self._sqrt_q @ U
        g = (SU * np.log2(lam)) @ SU.conj().T
        for Kz, (mu, V) in zip(self._kraus_blocks, blocks):
            KV = Kz.conj().T @ V
            g -= (KV * np.log2(np.clip(mu, floor * 1e-3, None))) @ KV.conj().T
        return self._value(floor, main, blocks), fock.hermitian((1 - eps) * g)

    def directional_derivative(self, rho, delta, eps=None):
        return float(np.real(np.vdot(self.gradient(rho, eps), delta)))

    def value_dense(self, rho, eps=None):
        """Reference evaluation through dense matrix logarithms."""
        eps = self.perturbation if eps is None else eps
        d = self.dim_G
        sigma = (1 - eps) * self.post.G(rho) + eps / d * np.eye(d)
        zs = self.post.Z(sigma)
        floor = min(fock.DEFAULT_LOG_FLOOR, eps / d)
        return float(
            np.real(np.trace(sigma @ (fock.matrix_log_clipped(sigma, floor) - fock.matrix_log_clipped(zs, floor))))
        )

    def gradient_dense(self, rho, eps=None):
        eps = self.perturbation if eps is None else eps
        d = self.dim_G
        sigma = (1 - eps) * self.post.G(rho) + eps / d * np.eye(d)
        floor = min(fock.DEFAULT_LOG_FLOOR, eps / d)
        diff = fock.matrix_log_clipped(sigma, floor) - fock.matrix_log_clipped(self.post.Z(sigma), floor)
        return fock.hermitian((1 - eps) * self.post.G_adjoint(diff))


# -- classical terms ---------------------------------------------------------


def conditional_probabilities(rho, post, probs):
    """P[l, k] = P(z = k | x = l) = Tr[rho_B^l R_k]."""
    probs = np.asarray(probs, dtype=float)
    if np.any(probs <= 0):
        raise ValueError("all symbol probabilities must be positive")
    dB = post.dim_B
    P = np.empty((post.dim_A, post.num_states))
    for l in range(post.dim_A):
        sl = slice(l * dB, (l + 1) * dB)
        rho_l = rho[sl, sl] / probs[l]
        for k, R in enumerate(post.regions):
            P[l, k] = np.real(np.vdot(R, rho_l))
    return np.clip(P, 0.0, 1.0)


def p_pass_from_probabilities(P, probs):
    return float(np.asarray(probs) @ P.sum(axis=1))


def p_pass(rho, post, probs):
    return p_pass_from_probabilities(conditional_probabilities(rho, post, probs), probs)


def shannon_bits(p):
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def delta_ec_from_probabilities(P, probs, beta):
    """Error-correction leakage per passed signal, (1-beta) H(Z) + beta H(Z|X).

    Entropies are taken over the postselected joint distribution
    P(x, z | pass) = p_x P(z|x) / p_pass.
    """
    joint = np.asarray(probs)[:, None] * P
    pp = joint.sum()
    if pp <= 0:
        raise UndefinedRateError("p_pass is zero; leakage per passed signal is undefined")
    joint = joint / pp
    h_z = shannon_bits(joint.sum(axis=0))
    h_xz = shannon_bits(joint)
    h_x = shannon_bits(joint.sum(axis=1))
    return (1 - beta) * h_z + beta * (h_xz - h_x)


def delta_ec(rho, post, cfg):
    return delta_ec_from_probabilities(conditional_probabilities(rho, post, cfg.probs), cfg.probs, cfg.beta)
