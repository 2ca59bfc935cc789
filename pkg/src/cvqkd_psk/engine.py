"""Two-step key-rate computation.

Step 1 runs a Frank-Wolfe minimisation of the perturbed relative entropy over
the constraint set; step 2 turns the final iterate into a certified lower
bound through a dual SDP, corrected for constraint violation and for the
perturbation. The rate is the step-2 bound minus p_pass * delta_EC.
"""

from dataclasses import dataclass, field, asdict
import logging
import math
import os

import numpy as np
import scipy.linalg as sla

from . import fock, sdp
from .objective import (
    ObjectiveContext,
    conditional_probabilities,
    delta_ec_from_probabilities,
    p_pass_from_probabilities,
)
from .protocol import build_constraints, kraus_and_pinching

logger = logging.getLogger(__name__)

EPS_PRIME_SAFETY = 10.0


class PipelineError(RuntimeError):
    """A stage of the key-rate pipeline failed; ``stage`` names it."""

    def __init__(self, stage, message):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


class InfeasibleConfigError(PipelineError):
    def __init__(self, message):
        super().__init__("initial-state", message)


# -- initial state -----------------------------------------------------------


def displacement(beta, n_cutoff):
    a = fock.annihilation(n_cutoff)
    return sla.expm(beta * a.conj().T - np.conj(beta) * a)


def thermal_state(mean_photons, n_cutoff):
    n = np.arange(n_cutoff + 1)
    if mean_photons <= 0:
        return np.diag((n == 0).astype(float)).astype(complex)
    r = mean_photons / (1 + mean_photons)
    return np.diag((1 - r) * r ** n).astype(complex)


def warm_start(cfg):
    """Gaussian-channel model state used to seed the feasibility projection.

    Diagonal blocks are displaced thermal states (displacement sqrt(eta)
    alpha_x, eta xi / 2 thermal photons); off-diagonal blocks carry the
    pure-loss cross terms sqrt(p_x p_y) <e_y|e_x> |b_x><b_y| with Bob's
    amplitude b_x = sqrt(eta) alpha_x and Eve's e_x = sqrt(1 - eta) alpha_x.
    """
    N, dB, dA = cfg.n_cutoff, cfg.dim_B, cfg.dim_A
    amps = cfg.amplitudes()
    eta = cfg.eta
    bob = [fock.coherent_state(math.sqrt(eta) * a, N) for a in amps]
    eve = math.sqrt(1 - eta) * amps
    th = thermal_state(eta * cfg.xi / 2, N)
    rho = np.zeros((dA * dB, dA * dB), dtype=complex)
    for x in range(dA):
        for y in range(dA):
            sx, sy = slice(x * dB, (x + 1) * dB), slice(y * dB, (y + 1) * dB)
            w = math.sqrt(cfg.probs[x] * cfg.probs[y])
            if x == y and cfg.xi > 0:
                D = displacement(math.sqrt(eta) * amps[x], N)
                rho[sx, sx] = w * D @ th @ D.conj().T
            elif x == y:
                # exact coherent projector; the truncated expm is only good to ~1e-9
                rho[sx, sx] = w * np.outer(bob[x], bob[x].conj())
            else:
                ov = np.exp(-0.5 * abs(eve[x]) ** 2 - 0.5 * abs(eve[y]) ** 2 + eve[x] * np.conj(eve[y]))
                rho[sx, sy] = w * ov * np.outer(bob[x], bob[y].conj())
    return fock.hermitian(rho)


def initial_state(cfg, constraints, tol=None, dump_dir=None):
    """A state in the feasible set: the warm start if it already satisfies
    every constraint to 1e-9, otherwise the solution of the feasibility SDP
    min t s.t. |Tr[Gamma_i rho] - gamma_i| <= t."""
    rho = warm_start(cfg)
    if constraints.max_violation(rho) < 1e-9 and fock.is_psd(rho, 1e-12):
        return rho
    prob = sdp.feasibility_problem(constraints.ops, constraints.values, constraints.kron)
    # the optimum is t ~ 0, so a relative gap is really an absolute one here
    tol = sdp.with_tolerance(tol, gap=min((tol or sdp.Tolerances()).gap, 1e-11))
    sol = sdp.solve(prob, tol, _dump_path(dump_dir, "feasibility"))
    t = sol.x[0]
    if sol.status in (sdp.INFEASIBLE, sdp.UNBOUNDED) or not np.isfinite(t) or t > 1e-6:
        raise InfeasibleConfigError(
            f"feasibility optimum t = {t:.3e} (status {sol.status}); "
            "cutoff too small for the chosen alpha and xi?"
        )
    return fock.hermitian(sol.X)


def feasible_direction(rho, constraints, rng, radius=0.5):
    """Random Hermitian D with Tr[Gamma_i D] = 0, a feasible direction at rho.

    A random Hermitian matrix is projected onto the null space of the
    constraint map and scaled into the Dikin ellipsoid of ``rho``, i.e.
    ||rho^{-1/2} D rho^{-1/2}|| = ``radius``, so rho + t D stays PSD for
    |t| < 1/radius. Needs a full-rank ``rho``.
    """
    n = rho.shape[0]
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H = fock.hermitian(H)
    ops = constraints.ops
    flat = ops.reshape(len(ops), -1)
    gram = np.real(flat.conj() @ flat.T)
    y = np.linalg.lstsq(gram, np.real(flat.conj() @ H.ravel()), rcond=None)[0]
    D = fock.hermitian(H - np.tensordot(y, ops, axes=1))
    w, V = np.linalg.eigh(fock.hermitian(rho))
    if w[0] <= 0:
        raise ValueError("rho must be positive definite")
    inv_sqrt = (V / np.sqrt(w)) @ V.conj().T
    scale = np.linalg.norm(inv_sqrt @ D @ inv_sqrt, 2)
    return D * (radius / scale)


def _dump_path(dump_dir, name):
    if dump_dir is None:
        return None
    _dump_path.counter = getattr(_dump_path, "counter", 0) + 1
    return os.path.join(dump_dir, f"{_dump_path.counter:05d}_{name}.dat-s")


# -- step 1 ------------------------------------------------------------------


class LineSearchError(ValueError):
    pass


def line_search_bisection(deriv, width=1e-6):
    """Minimise a convex 1-D restriction on (0, 1) by bisection on its slope.

    ``deriv(lam)`` is the directional derivative at rho + lam * delta.
    """
    if deriv(0.0) >= 0:
        raise LineSearchError("not a descent direction")
    if deriv(1.0) < 0:
        return 1.0 - 1e-9
    lo, hi = 0.0, 1.0
    while hi - lo > width:
        mid = 0.5 * (lo + hi)
        if deriv(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class FWResult:
    rho: np.ndarray
    value: float
    trace: list
    status: str
    iterations: int


def frank_wolfe(ctx, constraints, rho0, threshold=1e-7, max_iters=200, tol=None, dump_dir=None):
    """Modified Frank-Wolfe minimisation of ``ctx.value`` over the constraint set.

    Stops when the linearised improvement Tr[delta grad] exceeds -threshold,
    after ``max_iters`` steps, or when the objective changes by less than
    1e-9 (relative) over 5 consecutive iterations.
    """
    rho = rho0
    f, g = ctx.value_and_gradient(rho)
    trace = []
    status = "max-iters"
    recent = [f]
    for k in range(max_iters):
        try:
            delta, lin, sol = sdp.solve_fw_subproblem(
                g, constraints.ops, constraints.values, rho, tol, _dump_path(dump_dir, "fw"), constraints.kron
            )
        except np.linalg.LinAlgError as exc:
            logger.warning("FW subproblem failed at iteration %d: %s", k, exc)
            status = "partial"
            break
        if not sol.ok and sol.primal_residual > 1e-6:
            logger.warning("FW subproblem %s at iteration %d", sol.status, k)
            status = "partial"
            break
        if lin > -threshold:
            trace.append((k, f, lin, 0.0))
            status = "converged"
            break

        def deriv(lam):
            return ctx.directional_derivative(rho + lam * delta, delta)

        try:
            lam = line_search_bisection(deriv)
        except LineSearchError:
            trace.append((k, f, lin, 0.0))
            status = "converged"
            break
        cand = rho + lam * delta
        f_new, g_new = ctx.value_and_gradient(cand)
        if f_new > f + 1e-12 * max(1.0, abs(f)):
            lam *= 0.5
            cand = rho + lam * delta
            f_new, g_new = ctx.value_and_gradient(cand)
            if f_new > f:
                trace.append((k, f, lin, 0.0))
                status = "stalled"
                break
        trace.append((k, f, lin, lam))
        rho, f, g = cand, f_new, g_new
        recent.append(f)
        if len(recent) > 5 and abs(recent[-6] - f) <= 1e-9 * max(abs(f), 1e-12):
            status = "early-exit"
            break
    return FWResult(rho=rho, value=f, trace=trace, status=status, iterations=len([t for t in trace if t[3] > 0]))


# -- step 2 ------------------------------------------------------------------


def zeta(eps, dim_G):
    """Continuity correction 2 e (d - 1) log2(d / (e (d - 1)))."""
    return 2 * eps * (dim_G - 1) * math.log2(dim_G / (eps * (dim_G - 1)))


@dataclass
class Step2Result:
    lower: float
    zeta_eps: float
    eps_prime: float
    beta: float
    dual_value: float
    min_eig: float
    status: str


def step2_lower_bound(ctx, constraints, rho, eps, eps_prime=None, tol=None, dump_dir=None):
    """Certified lower bound on min f over the constraint set from ``rho``.

    eps' defaults to the measured maximal constraint violation of ``rho``
    times a safety factor of 10.
    """
    d = ctx.dim_G
    if not 0 < eps <= 1 / (math.e * (d - 1)):
        raise ValueError("eps outside the admissible range (0, 1/(e (dim_G - 1))]")
    if eps_prime is None:
        eps_prime = EPS_PRIME_SAFETY * constraints.max_violation(rho)
    eps_prime = max(eps_prime, 1e-12)
    f_eps, g_eps = ctx.value_and_gradient(rho, eps)
    trace_bound = 1.0 + ctx.post.dim_A * eps_prime
    cert = sdp.solve_step2_dual(
        g_eps,
        constraints.ops,
        constraints.values,
        eps_prime,
        trace_bound=trace_bound,
        tol=tol,
        dump_path=_dump_path(dump_dir, "step2"),
        kron=constraints.kron,
    )
    z = zeta(eps, d)
    beta = f_eps - float(np.real(np.vdot(g_eps, rho))) + cert.value
    status = "ok" if np.isfinite(cert.value) else "no-certificate"
    return Step2Result(
        lower=beta - z,
        zeta_eps=z,
        eps_prime=eps_prime,
        beta=beta,
        dual_value=cert.value,
        min_eig=cert.min_eig,
        status=status,
    )


# -- full pipeline -----------------------------------------------------------


@dataclass
class KeyRateResult:
    step1_value: float
    step2_lower: float
    zeta_eps: float
    epsilon_prime: float
    p_pass: float
    delta_EC: float
    rate: float
    iterations: int
    status: str
    fw_status: str = ""
    nonpositive: bool = False
    fw_trace: list = field(default_factory=list, repr=False)
    cond_probs: np.ndarray = field(default=None, repr=False)

    def as_dict(self, with_trace=False):
        d = asdict(self)
        d["cond_probs"] = None if self.cond_probs is None else self.cond_probs.tolist()
        if not with_trace:
            d.pop("fw_trace")
        return d


def compute_key_rate(cfg, tol=None, dump_dir=None, rho0=None):
    """Full pipeline for one configuration."""
    try:
        cons = build_constraints(cfg)
        post = kraus_and_pinching(cfg)
    except Exception as exc:
        raise PipelineError("operators", str(exc)) from exc
    ctx = ObjectiveContext.from_config(cfg, post)
    if rho0 is None:
        try:
            rho0 = initial_state(cfg, cons, tol, dump_dir)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError("initial-state", str(exc)) from exc
    try:
        fw = frank_wolfe(ctx, cons, rho0, cfg.fw_threshold, cfg.fw_max_iters, tol, dump_dir)
    except Exception as exc:
        raise PipelineError("frank-wolfe", str(exc)) from exc
    try:
        s2 = step2_lower_bound(ctx, cons, fw.rho, cfg.theorem_epsilon, tol=tol, dump_dir=dump_dir)
    except Exception as exc:
        raise PipelineError("step2", str(exc)) from exc
    P = conditional_probabilities(fw.rho, post, cfg.probs)
    pp = p_pass_from_probabilities(P, cfg.probs)
    dec = delta_ec_from_probabilities(P, cfg.probs, cfg.beta)
    if s2.status != "ok":
        rate = float("nan")
        status = "no-certificate"
    else:
        rate = s2.lower - pp * dec
        status = "ok" if rate > 0 else "nonpositive"
    return KeyRateResult(
        step1_value=fw.value,
        step2_lower=s2.lower,
        zeta_eps=s2.zeta_eps,
        epsilon_prime=s2.eps_prime,
        p_pass=pp,
        delta_EC=dec,
        rate=rate,
        iterations=fw.iterations,
        status=status,
        fw_status=fw.status,
        nonpositive=bool(rate <= 0) if np.isfinite(rate) else False,
        fw_trace=fw.trace,
        cond_probs=P,
    )
