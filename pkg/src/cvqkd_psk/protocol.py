"""Phase-shift-keying protocol model.

Covers the configuration, the key-map region operators, the source-replacement
Gram matrix, the expected channel statistics and the constraint set of the
key-rate SDP, plus the post-processing maps G (Kraus) and Z (pinching).
"""

from dataclasses import dataclass, field, fields
import math

import numpy as np
from scipy.special import erfc

from . import fock
from .sdp import KronRows


class ConfigError(ValueError):
    """Invalid protocol configuration; ``field`` names the offending entry."""

    def __init__(self, field_name, message):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class ProtocolConfig:
    num_states: int = 8
    alpha: float = 0.9
    probs: tuple = None
    distance_km: float = 0.0
    eta: float = None
    xi: float = 0.0
    beta: float = 0.95
    delta_r: float = 0.0
    delta_a: float = 0.0
    n_cutoff: int = 14
    fw_threshold: float = 1e-7
    fw_max_iters: int = 200
    perturbation: float = 1e-11
    theorem_epsilon: float = None

    def __post_init__(self):
        if self.num_states not in (4, 8):
            raise ConfigError("num_states", "must be 4 or 8")
        if not self.alpha > 0:
            raise ConfigError("alpha", "must be positive")
        if self.probs is None:
            probs = (1.0 / self.num_states,) * self.num_states
        else:
            probs = tuple(float(p) for p in self.probs)
            if len(probs) != self.num_states:
                raise ConfigError("probs", f"expected {self.num_states} entries")
            if min(probs) <= 0 or abs(sum(probs) - 1) > 1e-12:
                raise ConfigError("probs", "must be positive and sum to 1")
        object.__setattr__(self, "probs", probs)
        if self.distance_km < 0:
            raise ConfigError("distance_km", "must be nonnegative")
        if self.eta is None:
            object.__setattr__(self, "eta", 10 ** (-0.02 * self.distance_km))
        if not 0 < self.eta <= 1:
            raise ConfigError("eta", "must lie in (0, 1]")
        if self.xi < 0:
            raise ConfigError("xi", "must be nonnegative")
        if not 0 < self.beta <= 1:
            raise ConfigError("beta", "must lie in (0, 1]")
        if self.delta_r < 0:
            raise ConfigError("delta_r", "must be nonnegative")
        if not 0 <= self.delta_a < math.pi / self.num_states:
            raise ConfigError("delta_a", f"must lie in [0, pi/{self.num_states})")
        if int(self.n_cutoff) != self.n_cutoff or self.n_cutoff < 4:
            raise ConfigError("n_cutoff", "must be an integer >= 4")
        if not self.fw_threshold > 0:
            raise ConfigError("fw_threshold", "must be positive")
        if int(self.fw_max_iters) != self.fw_max_iters or self.fw_max_iters < 1:
            raise ConfigError("fw_max_iters", "must be a positive integer")
        if not 0 < self.perturbation < 1:
            raise ConfigError("perturbation", "must lie in (0, 1)")
        if self.theorem_epsilon is None:
            object.__setattr__(
                self, "theorem_epsilon", max(self.perturbation * self.dim_G, 1e-10)
            )
        if not 0 < self.theorem_epsilon <= 1 / (math.e * (self.dim_G - 1)):
            raise ConfigError(
                "theorem_epsilon", "must lie in (0, 1/(e (dim_G - 1))]"
            )

    @classmethod
    def from_dict(cls, data):
        """Build from a flat mapping; unknown keys are rejected."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(unknown[0], "unknown configuration key")
        data = dict(data)
        if data.get("probs") is not None:
            data["probs"] = tuple(data["probs"])
        return cls(**data)

    def to_dict(self):
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["probs"] = list(d["probs"])
        return d

    @property
    def dim_A(self):
        return self.num_states

    @property
    def dim_B(self):
        return self.n_cutoff + 1

    @property
    def dim_AB(self):
        return self.dim_A * self.dim_B

    @property
    def dim_G(self):
        """Dimension of the output of G (key register R, A and B)."""
        return self.num_states * self.num_states * (self.n_cutoff + 1)

    @property
    def half_width(self):
        """Angular half-width of one key wedge, reduced by delta_a."""
        return math.pi / self.num_states - self.delta_a

    @property
    def phase_step(self):
        return 2 * math.pi / self.num_states

    def amplitudes(self):
        """Complex amplitudes alpha_x of Alice's signal states."""
        k = np.arange(self.num_states)
        return self.alpha * np.exp(1j * k * self.phase_step)


# -- special functions -------------------------------------------------------


def upper_gamma_table(x, s_max):
    """Upper incomplete gamma Gamma(s, x) on the half-integer grid.

    Returns an array ``g`` with ``g[j] = Gamma(j/2 + 1/2, x)`` for
    ``s = 1/2, 1, 3/2, ...`` up to ``s_max``, built by the upward recurrence
    Gamma(s+1, x) = s Gamma(s, x) + x^s e^{-x} from the seeds
    Gamma(1/2, x) = sqrt(pi) erfc(sqrt(x)) and Gamma(1, x) = e^{-x}.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    n_half = int(round(2 * s_max))
    g = np.empty(n_half)
    ex = math.exp(-x)
    g[0] = math.sqrt(math.pi) * erfc(math.sqrt(x))
    if n_half > 1:
        g[1] = ex
    for j in range(2, n_half):
        s = (j - 2) / 2 + 0.5  # g[j] = Gamma(s + 1), g[j-2] = Gamma(s)
        g[j] = s * g[j - 2] + (x ** s) * ex
    return g


def upper_gamma(s, x):
    """Gamma(s, x) for integer or half-integer ``s >= 1/2``."""
    j = int(round(2 * s)) - 1
    if abs((j + 1) / 2 - s) > 1e-12 or j < 0:
        raise ValueError("s must be a positive integer or half-integer")
    return float(upper_gamma_table(x, s)[j])


# -- region operators --------------------------------------------------------


def _region_matrix_z0(cfg):
    """<n|R_0|m> for all n, m <= n_cutoff."""
    N = cfg.n_cutoff
    g = upper_gamma_table(cfg.delta_r ** 2, N + 1)
    n = np.arange(N + 1)
    nn, mm = np.meshgrid(n, n, indexing="ij")
    # Gamma((m+n)/2 + 1) sits at index m + n + 1 of the half-integer table
    gam = g[nn + mm + 1]
    logfact = np.array([math.lgamma(k + 1) for k in n])
    norm = np.exp(-0.5 * (logfact[nn] + logfact[mm]))
    diff = mm - nn
    theta = cfg.half_width
    with np.errstate(invalid="ignore", divide="ignore"):
        ang = np.where(diff == 0, theta, np.sin(theta * diff) / np.where(diff == 0, 1, diff))
    return gam * norm * ang / math.pi


def region_operator_element(z, n, m, cfg):
    """Closed-form matrix element <n|R_z|m>."""
    if not (0 <= n <= cfg.n_cutoff and 0 <= m <= cfg.n_cutoff):
        raise ValueError("Fock indices out of range")
    if not 0 <= z < cfg.num_states:
        raise ValueError("symbol out of range")
    theta = cfg.half_width
    phase = np.exp(-1j * (m - n) * z * cfg.phase_step)
    if n == m:
        val = upper_gamma(n + 1, cfg.delta_r ** 2) / math.factorial(n) * theta
    else:
        val = (
            upper_gamma((m + n) / 2 + 1, cfg.delta_r ** 2)
            / ((m - n) * math.sqrt(math.factorial(n)) * math.sqrt(math.factorial(m)))
            * math.sin(theta * (m - n))
        )
    return complex(phase * val / math.pi)


def phase_rotation(cfg, z):
    """U_z = diag(exp(i n z 2pi/num_states)) on Bob's truncated space."""
    n = np.arange(cfg.dim_B)
    return np.diag(np.exp(1j * n * z * cfg.phase_step))


def build_region_operators(cfg):
    """List of the ``num_states`` region operators R_z on Bob's space."""
    R0 = _region_matrix_z0(cfg)
    n = np.arange(cfg.dim_B)
    ops = []
    for z in range(cfg.num_states):
        ph = np.exp(1j * z * cfg.phase_step * (n[:, None] - n[None, :]))
        ops.append(fock.hermitian(R0 * ph))
    return ops


# -- source replacement and constraints --------------------------------------


def gram_matrix(cfg):
    """Alice's reduced state Tr_B rho_AB = sum sqrt(p_x p_y) <psi_y|psi_x> |x><y|."""
    a = cfg.amplitudes()
    p = np.asarray(cfg.probs)
    # <beta|alpha> = exp(-|a|^2/2 - |b|^2/2 + conj(b) a)
    ov = np.exp(
        -0.5 * np.abs(a)[:, None] ** 2 - 0.5 * np.abs(a)[None, :] ** 2 + a[:, None] * a[None, :].conj()
    )
    return fock.hermitian(np.sqrt(np.outer(p, p)) * ov)


def source_replacement_state(cfg, amplitude_scale=1.0):
    """Pure state sum_x sqrt(p_x) |x>|c * alpha_x>, truncated at n_cutoff.

    With ``amplitude_scale = 1`` this is the exact noiseless state; it is not
    renormalised, so the truncation deficit shows up in the constraints.
    """
    vecs = [
        np.sqrt(px) * np.kron(np.eye(cfg.dim_A)[x], fock.coherent_state(amplitude_scale * a, cfg.n_cutoff))
        for x, (px, a) in enumerate(zip(cfg.probs, cfg.amplitudes()))
    ]
    psi = np.sum(vecs, axis=0)
    return np.outer(psi, psi.conj())


@dataclass(frozen=True)
class ConstraintSet:
    """Linear constraints Tr[ops[i] rho] = values[i] on A (x) B."""

    ops: np.ndarray
    values: np.ndarray
    labels: tuple = field(default=())
    kron: object = None

    def __len__(self):
        return len(self.values)

    def evaluate(self, rho):
        """Tr[Gamma_i rho] for every row."""
        return np.real(np.einsum("kij,ji->k", self.ops, rho))

    def residuals(self, rho):
        return self.evaluate(rho) - self.values

    def max_violation(self, rho):
        return float(np.max(np.abs(self.residuals(rho))))


def channel_expectations(x, cfg):
    """Expected (<q>, <p>, <n>, <d>) for signal x after a phase-invariant
    Gaussian channel with transmittance eta and excess noise xi."""
    ax = cfg.amplitudes()[x]
    eta = cfg.eta
    return (
        math.sqrt(2 * eta) * ax.real,
        math.sqrt(2 * eta) * ax.imag,
        eta * abs(ax) ** 2 + eta * cfg.xi / 2,
        eta * 2 * (ax * ax).real,
    )


# Bob-side factors of the constraint rows; every row is E (x) BOB_OPS[k].
BOB_OPS = ("q", "p", "n", "d", "1")


def bob_operators(n_cutoff):
    q, p, n, d = fock.quadratures(n_cutoff)
    return np.array([q, p, n, d, np.eye(n_cutoff + 1)], dtype=complex)


def measurement_constraints(cfg):
    """Rows |x><x| (x) O for O in q, p, n, d, as (E, k, value, label) tuples."""
    rows = []
    eye_A = np.eye(cfg.dim_A)
    for x in range(cfg.num_states):
        proj = np.outer(eye_A[x], eye_A[x]).astype(complex)
        expect = channel_expectations(x, cfg)
        for k, e in enumerate(expect):
            rows.append((proj, k, cfg.probs[x] * e, f"{BOB_OPS[k]}[{x}]"))
    return rows


def tomography_constraints(cfg):
    """Scalar form of the matrix constraint Tr_B rho = gram_matrix(cfg).

    Rows: the diagonal projectors, then for each pair x < y the symmetric
    and antisymmetric combinations. Right-hand sides are Tr[Gamma_A G], which
    fixes the sign convention of the imaginary rows.
    """
    G = gram_matrix(cfg)
    dA = cfg.dim_A
    eye_A = np.eye(dA)
    rows = []

    def add(op_A, label):
        rows.append((op_A, 4, float(np.real(np.trace(op_A @ G))), label))

    for x in range(dA):
        add(np.outer(eye_A[x], eye_A[x]).astype(complex), f"diag[{x}]")
    for x in range(dA):
        for y in range(x + 1, dA):
            exy = np.outer(eye_A[x], eye_A[y])
            add(exy + exy.T + 0j, f"re[{x},{y}]")
            add(1j * exy - 1j * exy.T, f"im[{x},{y}]")
    return rows


def build_constraints(cfg):
    """Measurement rows (x-major, q/p/n/d) followed by tomography rows."""
    rows = measurement_constraints(cfg) + tomography_constraints(cfg)
    O = bob_operators(cfg.n_cutoff)
    E = np.array([r[0] for r in rows])
    index = np.array([r[1] for r in rows])
    ops = np.array([fock.hermitian(np.kron(e, O[k])) for e, k in zip(E, index)])
    return ConstraintSet(
        ops=ops,
        values=np.array([r[2] for r in rows], dtype=float),
        labels=tuple(r[3] for r in rows),
        kron=KronRows(E=E, O=O, index=index),
    )


# -- post-processing maps ----------------------------------------------------


class RegionOperatorError(ValueError):
    pass


@dataclass(frozen=True)
class PostProcessing:
    """Kraus map G(s) = K s K^dag and the pinching Z over the key register.

    ``sqrt_regions[z]`` is sqrt(R_z) on Bob's space; the Kraus operator is
    K = sum_z |z>_R (x) 1_A (x) sqrt(R_z), ordered R (x) A (x) B.
    """

    num_states: int
    dim_A: int
    dim_B: int
    regions: tuple
    sqrt_regions: tuple

    @property
    def dim_in(self):
        return self.dim_A * self.dim_B

    @property
    def dim_G(self):
        return self.num_states * self.dim_in

    def kraus_blocks(self):
        """Blocks K_z = 1_A (x) sqrt(R_z), each dim_in x dim_in."""
        eye_A = np.eye(self.dim_A)
        return [np.kron(eye_A, s) for s in self.sqrt_regions]

    def kraus(self):
        return np.vstack(self.kraus_blocks())

    def G(self, rho):
        K = self.kraus()
        return K @ rho @ K.conj().T

    def G_adjoint(self, Y):
        K = self.kraus()
        return K.conj().T @ Y @ K

    def Z(self, sigma):
        """Pinching onto the diagonal blocks of the key register."""
        d = self.dim_in
        out = np.zeros_like(sigma)
        for j in range(self.num_states):
            sl = slice(j * d, (j + 1) * d)
            out[sl, sl] = sigma[sl, sl]
        return out


def kraus_and_pinching(cfg, regions=None):
    if regions is None:
        regions = build_region_operators(cfg)
    roots = []
    for z, R in enumerate(regions):
        w = np.linalg.eigvalsh(R)
        if w[0] < -1e-8:
            raise RegionOperatorError(
                f"region operator R_{z} has eigenvalue {w[0]:.3e} < -1e-8"
            )
        roots.append(fock.sqrtm_psd(R, tol=1e-8))
    return PostProcessing(
        num_states=cfg.num_states,
        dim_A=cfg.dim_A,
        dim_B=cfg.dim_B,
        regions=tuple(regions),
        sqrt_regions=tuple(roots),
    )
