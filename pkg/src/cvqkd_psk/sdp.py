"""Dense primal-dual interior-point solver for small linear SDPs.

Standard form, with X Hermitian PSD (real symmetric or complex Hermitian)
and x a nonnegative vector::

    minimise    Re Tr[C X] + c.x
    subject to  Re Tr[A_i X] + (A_lp x)_i = b_i,   X >= 0,  x >= 0

and its dual ``max b.y  s.t.  C - sum y_i A_i = Z >= 0,  c - A_lp^T y = z >= 0``.
The iteration is an infeasible-start path-following method using the HKM
search direction with a Mehrotra predictor-corrector.
"""

from dataclasses import dataclass, field, replace
import logging
import os

import numpy as np
import scipy.linalg as sla

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INACCURATE = "inaccurate"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-8
    gap: float = 1e-7
    max_iter: int = 200
    step_fraction: float = 0.99


@dataclass(frozen=True)
class KronRows:
    """Factored constraint matrices A_i = kron(E[i], O[index[i]]).

    An optional description of the rows passed alongside the dense ``A``;
    the solver then forms its Schur complement from the small factors.
    """

    E: np.ndarray
    O: np.ndarray
    index: np.ndarray

    def dense(self):
        return np.array([np.kron(e, self.O[k]) for e, k in zip(self.E, self.index)])

    def take(self, rows, scale=None):
        E = self.E[rows]
        if scale is not None:
            E = E / scale[:, None, None]
        return KronRows(E=E, O=self.O, index=self.index[rows])

    def padded(self, extra):
        """The same rows followed by ``extra`` all-zero rows."""
        z = np.zeros((extra,) + self.E.shape[1:], dtype=self.E.dtype)
        return KronRows(
            E=np.concatenate([self.E, z]), O=self.O, index=np.concatenate([self.index, np.zeros(extra, int)])
        )

    def doubled(self):
        return KronRows(E=np.concatenate([self.E, self.E]), O=self.O, index=np.concatenate([self.index, self.index]))


@dataclass
class LinearSDP:
    """A linear SDP in standard form.

    ``le_*`` optionally adds inequality rows Re Tr[A X] + a.x <= b, which are
    turned into equalities with nonnegative slacks by :meth:`standard_form`.
    """

    C: np.ndarray
    A: np.ndarray
    b: np.ndarray
    c_lp: np.ndarray = None
    A_lp: np.ndarray = None
    le_A: np.ndarray = None
    le_A_lp: np.ndarray = None
    le_b: np.ndarray = None
    kron: KronRows = None

    def __post_init__(self):
        self.C = np.asarray(self.C)
        n = self.C.shape[0]
        self.A = np.asarray(self.A).reshape(-1, n, n)
        self.b = np.asarray(self.b, dtype=float).ravel()
        m = len(self.b)
        if self.A.shape[0] != m:
            raise ValueError("number of constraint matrices and right-hand sides differ")
        if self.c_lp is None:
            self.c_lp = np.zeros(0)
        self.c_lp = np.asarray(self.c_lp, dtype=float).ravel()
        if self.A_lp is None:
            self.A_lp = np.zeros((m, len(self.c_lp)))
        self.A_lp = np.asarray(self.A_lp, dtype=float).reshape(m, len(self.c_lp))
        for M in (self.C, *self.A):
            if not np.allclose(M, M.conj().T, atol=1e-12, rtol=0):
                raise ValueError("cost and constraint matrices must be Hermitian")
        if self.kron is not None:
            if len(self.kron.E) != m or not np.allclose(self.kron.dense(), self.A, atol=1e-12, rtol=0):
                raise ValueError("Kronecker factors do not reproduce the constraint matrices")

    @property
    def n(self):
        return self.C.shape[0]

    @property
    def is_complex(self):
        return np.iscomplexobj(self.C) or np.iscomplexobj(self.A)

    def standard_form(self):
        """Equivalent problem with inequality rows replaced by slacks.

        The slacks are appended to the end of the LP block.
        """
        if self.le_b is None or len(self.le_b) == 0:
            return self
        if self.kron is not None:
            raise ValueError("inequality rows cannot be combined with Kronecker factors")
        le_b = np.asarray(self.le_b, dtype=float).ravel()
        k = len(le_b)
        n, l, m = self.n, len(self.c_lp), len(self.b)
        le_A = np.asarray(self.le_A).reshape(k, n, n)
        le_A_lp = np.zeros((k, l)) if self.le_A_lp is None else np.asarray(self.le_A_lp).reshape(k, l)
        A_lp = np.block([[self.A_lp, np.zeros((m, k))], [le_A_lp, np.eye(k)]])
        return LinearSDP(
            C=self.C,
            A=np.concatenate([self.A, le_A]),
            b=np.concatenate([self.b, le_b]),
            c_lp=np.concatenate([self.c_lp, np.zeros(k)]),
            A_lp=A_lp,
        )


@dataclass
class SDPSolution:
    X: np.ndarray
    x: np.ndarray
    y: np.ndarray
    Z: np.ndarray
    z: np.ndarray
    primal_value: float
    dual_value: float
    primal_residual: float
    dual_residual: float
    gap: float
    status: str
    iterations: int
    history: list = field(default_factory=list, repr=False)

    @property
    def value(self):
        return self.primal_value

    @property
    def ok(self):
        return self.status == OPTIMAL


# -- helpers -----------------------------------------------------------------


def _herm(M):
    return 0.5 * (M + M.conj().T)


def _max_step(X, dX, chol=None):
    """Largest a with X + a dX PSD (inf if dX keeps X PSD for all a > 0)."""
    if chol is None:
        chol = np.linalg.cholesky(X)
    T = sla.solve_triangular(chol, dX, lower=True)
    T = sla.solve_triangular(chol, T.conj().T, lower=True)
    lam = np.linalg.eigvalsh(_herm(T))[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _max_step_lp(x, dx):
    neg = dx < 0
    if not np.any(neg):
        return np.inf
    return float(np.min(-x[neg] / dx[neg]))


def _row_gram(A, A_lp, kron=None):
    """Gram matrix Re Tr[A_i A_j] + A_lp A_lp^T of the constraint rows."""
    if kron is not None:
        m = len(kron.E)
        Ef = kron.E.reshape(m, -1)
        Of = kron.O.reshape(len(kron.O), -1)
        ee = Ef.conj() @ Ef.T
        oo = (Of.conj() @ Of.T)[np.ix_(kron.index, kron.index)]
        G = np.real(ee * oo)
    else:
        Af = A.reshape(A.shape[0], -1)
        G = np.real(Af.conj() @ Af.T)
    return G + A_lp @ A_lp.T


def _independent_rows(A, A_lp, kron=None, tol=1e-9):
    """Indices of a maximal linearly independent subset of the rows.

    Pivoted QR on a square root of the row Gram matrix, which has the same
    column geometry as the rows themselves but only m columns.
    """
    m = A.shape[0]
    if m == 0:
        return np.arange(0)
    w, V = np.linalg.eigh(_row_gram(A, A_lp, kron))
    root = np.sqrt(np.clip(w, 0, None))[:, None] * V.T
    _, R, piv = sla.qr(root, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    rank = int(np.sum(d > tol * max(d[0], 1e-300)))
    return np.sort(piv[:rank])


def _schur(Af, A, X, Zinv, A_lp, xz):
    m = A.shape[0]
    B = X @ A @ Zinv
    M = np.real(Af.conj() @ B.reshape(m, -1).T)
    if A_lp.shape[1]:
        M += (A_lp * xz) @ A_lp.T
    return 0.5 * (M + M.T)


def _schur_kron(kron, X, Zinv, A_lp, xz):
    """Schur complement for rows A_i = E_i (x) O_k.

    Tr[(E_i (x) O_a) X (E_j (x) O_b) Zinv]
        = sum_{pqrs} E_i[p,q] E_j[r,s] Tr[O_a X_qr O_b Zinv_sp],
    with X_qr the (q, r) block of X; only the distinct O's need touching the
    n x n matrices.
    """
    E, O, idx = kron.E, kron.O, kron.index
    m, dA = E.shape[0], E.shape[1]
    dB = O.shape[1]
    X4 = X.reshape(dA, dB, dA, dB)
    Z4 = Zinv.reshape(dA, dB, dA, dB)
    used = np.unique(idx)
    OX = np.einsum("akj,bjcl->abkcl", O[used], X4)
    OZ = np.einsum("alj,djpk->adlpk", O[used], Z4)
    # W[a, b, p, q, r, s] = sum_{k,l} (O_a X_qr)[k,l] (O_b Zinv_sp)[l,k]
    W = np.einsum("aqkrl,bslpk->abpqrs", OX, OZ, optimize=True)
    Ef = E.reshape(m, dA * dA)
    M = np.zeros((m, m))
    pos = {k: t for t, k in enumerate(used)}
    groups = {k: np.flatnonzero(idx == k) for k in used}
    for ka, ia in groups.items():
        for kb, ib in groups.items():
            Wab = W[pos[ka], pos[kb]].reshape(dA * dA, dA * dA)
            M[np.ix_(ia, ib)] = np.real(Ef[ia] @ Wab @ Ef[ib].T)
    if A_lp.shape[1]:
        M += (A_lp * xz) @ A_lp.T
    return 0.5 * (M + M.T)


class _Factor:
    def __init__(self, M):
        self.M = M
        try:
            self.cf = sla.cho_factor(M, lower=True, check_finite=False)
            self.pinv = None
        except np.linalg.LinAlgError:
            w, V = np.linalg.eigh(M)
            cut = max(w[-1], 1e-300) * 1e-15
            winv = np.where(w > cut, 1.0 / np.where(w > cut, w, 1.0), 0.0)
            self.pinv = (V * winv) @ V.T
            self.cf = None

    def solve(self, r):
        if self.cf is not None:
            return sla.cho_solve(self.cf, r, check_finite=False)
        return self.pinv @ r


# -- main solver -------------------------------------------------------------


def solve(problem, tol=None, dump_path=None):
    """Solve ``problem`` and return an :class:`SDPSolution`.

    Rows are normalised to unit Frobenius norm and linearly dependent rows are
    dropped before the iteration; multipliers of dropped rows are zero.
    """
    tol = tol or Tolerances()
    prob = problem.standard_form()
    if dump_path is not None:
        dump_sdpa(prob, dump_path)
    n, m, l = prob.n, len(prob.b), len(prob.c_lp)
    dtype = complex if prob.is_complex else float

    keep = _independent_rows(prob.A, prob.A_lp, prob.kron)
    if len(keep) < m:
        logger.warning("dropping %d linearly dependent constraint rows", m - len(keep))
    A0, Alp0, b0 = prob.A[keep], prob.A_lp[keep], prob.b[keep]
    scale = np.sqrt(np.sum(np.abs(A0) ** 2, axis=(1, 2)) + np.sum(Alp0 ** 2, axis=1))
    scale[scale == 0] = 1.0
    A = (A0 / scale[:, None, None]).astype(dtype)
    A_lp = Alp0 / scale[:, None]
    b = b0 / scale
    C = prob.C.astype(dtype)
    c = prob.c_lp
    mk = len(keep)
    Af = A.reshape(mk, -1)
    kron = prob.kron.take(keep, scale) if prob.kron is not None else None
    N = n + l

    Afc = Af.conj()

    if kron is None:

        def opA(X, x):
            return np.real(Afc @ X.ravel()) + A_lp @ x

        def opAt(y):
            return (y @ Af).reshape(n, n), A_lp.T @ y

    else:
        dA, dB = kron.E.shape[1], kron.O.shape[1]
        Ef = kron.E.reshape(mk, -1)

        def opA(X, x):
            # Tr[(E (x) O_k) X] = sum_{p,q} E[p,q] Tr[O_k X_qp]
            T = np.einsum("kab,qbpa->kpq", kron.O, X.reshape(dA, dB, dA, dB))
            vals = np.einsum("ij,ij->i", Ef, T[kron.index].reshape(mk, -1))
            return np.real(vals) + A_lp @ x

        def opAt(y):
            S = np.zeros((n, n), dtype=dtype)
            for k in np.unique(kron.index):
                sel = kron.index == k
                S += np.kron(np.tensordot(y[sel], kron.E[sel], axes=1), kron.O[k])
            return S, A_lp.T @ y

    normC = np.sqrt(np.linalg.norm(C) ** 2 + np.linalg.norm(c) ** 2)
    xi0 = max(10.0, np.sqrt(n), float(np.max(n * (1 + np.abs(b)) / 2.0, initial=0.0)))
    zeta0 = max(10.0, np.sqrt(n), normC, 1.0)
    X = xi0 * np.eye(n, dtype=dtype)
    Z = zeta0 * np.eye(n, dtype=dtype)
    x = np.full(l, xi0)
    z = np.full(l, zeta0)
    y = np.zeros(mk)

    status = INACCURATE
    best = None
    history = []
    it = 0
    stalls = 0
    for it in range(tol.max_iter + 1):
        Sy, sy = opAt(y)
        rp = b - opA(X, x)
        Rd = _herm(C - Sy - Z)
        rd = c - sy - z
        gap = float(np.real(np.vdot(X, Z)) + x @ z)
        mu = gap / N
        pobj = float(np.real(np.vdot(C, X)) + c @ x)
        dobj = float(b @ y)
        pres = float(np.max(np.abs(rp * scale), initial=0.0))
        dres = float(np.sqrt(np.linalg.norm(Rd) ** 2 + np.linalg.norm(rd) ** 2) / (1 + normC))
        relgap = max(gap, abs(pobj - dobj)) / (1 + abs(pobj) + abs(dobj))
        history.append((it, pobj, dobj, pres, dres, relgap))
        merit = max(pres / tol.feas, dres / tol.feas, relgap / tol.gap)
        if best is None or merit < best[0]:
            best = (merit, X.copy(), x.copy(), y.copy(), Z.copy(), z.copy(), it)
        if pres <= tol.feas and dres <= tol.feas and relgap <= tol.gap:
            status = OPTIMAL
            break
        if np.linalg.norm(X) > 1e12 or x.sum() > 1e12:
            status = UNBOUNDED if dres <= 1e-6 else INACCURATE
            break
        if np.linalg.norm(y) > 1e12:
            status = INFEASIBLE
            break
        if it == tol.max_iter or stalls >= 5:
            break

        try:
            LZ = np.linalg.cholesky(Z)
            LX = np.linalg.cholesky(X)
        except np.linalg.LinAlgError:
            break
        LZinv = sla.solve_triangular(LZ, np.eye(n, dtype=dtype), lower=True)
        Zinv = LZinv.conj().T @ LZinv
        if kron is not None:
            M = _schur_kron(kron, X, Zinv, A_lp, x / z)
        else:
            M = _schur(Af, A, X, Zinv, A_lp, x / z)
        fac = _Factor(M)
        XRdZi = X @ Rd @ Zinv

        def direction(RcZi, Rc_lp):
            rhs = rp - opA(RcZi - XRdZi, Rc_lp / z - x * rd / z)
            dy = fac.solve(rhs)
            Sdy, sdy = opAt(dy)
            dZ = _herm(Rd - Sdy)
            dX = _herm(RcZi - XRdZi + X @ Sdy @ Zinv)
            dz = rd - sdy
            dx = Rc_lp / z - x * rd / z + (x / z) * sdy
            return dX, dx, dy, dZ, dz

        def steps(dX, dx, dZ, dz):
            ap = min(_max_step(X, dX, LX), _max_step_lp(x, dx))
            ad = min(_max_step(Z, dZ, LZ), _max_step_lp(z, dz))
            return min(1.0, tol.step_fraction * ap), min(1.0, tol.step_fraction * ad)

        # predictor
        dX, dx, dy, dZ, dz = direction(-X, -x * z)
        ap, ad = steps(dX, dx, dZ, dz)
        gap_aff = float(
            np.real(np.vdot(X + ap * dX, Z + ad * dZ)) + (x + ap * dx) @ (z + ad * dz)
        )
        sigma = min(1.0, max(0.0, gap_aff / gap)) ** 3 if gap > 0 else 0.0
        # corrector
        Rc = sigma * mu * np.eye(n) - X @ Z - dX @ dZ
        Rc_lp = sigma * mu - x * z - dx * dz
        dX, dx, dy, dZ, dz = direction(Rc @ Zinv, Rc_lp)
        ap, ad = steps(dX, dx, dZ, dz)
        stalls = stalls + 1 if max(ap, ad) < 1e-8 else 0
        X = _herm(X + ap * dX)
        x = x + ap * dx
        y = y + ad * dy
        Z = _herm(Z + ad * dZ)
        z = z + ad * dz

    if status != OPTIMAL and best is not None:
        _, X, x, y, Z, z, _ = best
        Sy, sy = opAt(y)
        rp = b - opA(X, x)
        Rd = _herm(C - Sy - Z)
        rd = c - sy - z
        pres = float(np.max(np.abs(rp * scale), initial=0.0))
        dres = float(np.sqrt(np.linalg.norm(Rd) ** 2 + np.linalg.norm(rd) ** 2) / (1 + normC))

    y_full = np.zeros(m)
    y_full[keep] = y / scale
    pobj = float(np.real(np.vdot(C, X)) + c @ x)
    dobj = float(b @ y)
    gap = float(np.real(np.vdot(X, Z)) + x @ z)
    relgap = max(gap, abs(pobj - dobj)) / (1 + abs(pobj) + abs(dobj))
    # residual against the full (unreduced) row set
    full_res = np.real(prob.A.reshape(m, -1).conj() @ X.ravel()) + prob.A_lp @ x - prob.b
    return SDPSolution(
        X=X,
        x=x,
        y=y_full,
        Z=Z,
        z=z,
        primal_value=pobj,
        dual_value=dobj,
        primal_residual=float(np.max(np.abs(full_res), initial=0.0)),
        dual_residual=dres,
        gap=relgap,
        status=status,
        iterations=it,
        history=history,
    )


# -- real embedding ----------------------------------------------------------


def embed(H):
    """Real symmetric embedding [[Re H, -Im H], [Im H, Re H]]."""
    H = np.asarray(H)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def unembed(S):
    n = S.shape[0] // 2
    return 0.5 * ((S[:n, :n] + S[n:, n:]) + 1j * (S[n:, :n] - S[:n, n:]))


def real_embedding(problem):
    """Equivalent real-symmetric problem of twice the matrix dimension.

    Uses Re Tr[A X] = Tr[embed(A) embed(X)] / 2, so all cost and constraint
    matrices are embedded and halved; the LP block is unchanged.
    """
    p = problem.standard_form()
    return LinearSDP(
        C=0.5 * embed(p.C),
        A=np.array([0.5 * embed(Ai) for Ai in p.A]),
        b=p.b,
        c_lp=p.c_lp,
        A_lp=p.A_lp,
    )


def solve_embedded(problem, tol=None):
    """Solve a complex problem through its real embedding."""
    sol = solve(real_embedding(problem), tol)
    sol.X = unembed(sol.X)
    sol.Z = unembed(sol.Z)
    return sol


def dump_sdpa(problem, path):
    """Write ``problem`` in SDPA sparse format (real embedding if complex).

    Our primal is SDPA's dual: F0 = -C, F_i = A_i, c_i = b_i. The LP block
    appears as a diagonal block of negative size, as SDPA expects.
    """
    p = problem.standard_form()
    if p.is_complex:
        p = real_embedding(p)
    m, n, l = len(p.b), p.n, len(p.c_lp)
    blocks = [n] + ([-l] if l else [])
    lines = [
        f'"cvqkd_psk linear SDP: min <C,X> + c.x s.t. <A_i,X> + A_lp x = b; F0=-C, Fi=A_i"',
        f"{m}",
        f"{len(blocks)}",
        " ".join(str(s) for s in blocks),
        " ".join(f"{v:.17g}" for v in p.b),
    ]

    def emit(k, M, vec):
        iu = np.triu_indices(n)
        for i, j in zip(*iu):
            if M[i, j] != 0:
                lines.append(f"{k} 1 {i + 1} {j + 1} {M[i, j].real:.17g}")
        for i, v in enumerate(vec):
            if v != 0:
                lines.append(f"{k} 2 {i + 1} {i + 1} {v:.17g}")

    emit(0, -np.real(p.C), -p.c_lp)
    for k in range(m):
        emit(k + 1, np.real(p.A[k]), p.A_lp[k])
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# -- problem builders used by the key-rate engine ----------------------------


def feasibility_problem(ops, values, kron=None):
    """min t  s.t.  |Tr[Gamma_i rho] - gamma_i| <= t,  rho >= 0.

    LP block layout: [t, u_1..u_m, v_1..v_m] with
    Tr[Gamma_i rho] - t + u_i = gamma_i and Tr[Gamma_i rho] + t - v_i = gamma_i.
    """
    ops = np.asarray(ops)
    m, n = ops.shape[0], ops.shape[1]
    A_lp = np.zeros((2 * m, 1 + 2 * m))
    A_lp[:m, 0] = -1.0
    A_lp[m:, 0] = 1.0
    A_lp[np.arange(m), 1 + np.arange(m)] = 1.0
    A_lp[m + np.arange(m), 1 + m + np.arange(m)] = -1.0
    c_lp = np.zeros(1 + 2 * m)
    c_lp[0] = 1.0
    return LinearSDP(
        C=np.zeros((n, n), dtype=ops.dtype),
        A=np.concatenate([ops, ops]),
        b=np.concatenate([values, values]),
        c_lp=c_lp,
        A_lp=A_lp,
        kron=None if kron is None else kron.doubled(),
    )


def solve_fw_subproblem(gradient, ops, values, rho, tol=None, dump_path=None, kron=None):
    """Frank-Wolfe direction: argmin_D Tr[D grad] s.t. rho + D feasible.

    Returns ``(delta, value, solution)`` where ``value = Tr[delta grad]``.
    """
    sol = solve(LinearSDP(C=_herm(gradient), A=ops, b=values, kron=kron), tol, dump_path)
    delta = _herm(sol.X - rho)
    value = float(np.real(np.vdot(gradient, delta)))
    return delta, value, sol


@dataclass
class DualCertificate:
    y: np.ndarray
    z: np.ndarray
    value: float
    min_eig: float
    status: str
    solution: SDPSolution = field(repr=False, default=None)


def solve_step2_dual(gradient, ops, values, eps_prime, trace_bound=1.0, tol=None, dump_path=None, kron=None):
    """Maximise gamma.y - eps' sum z  s.t.  -z <= y <= z,  grad - sum y_i Gamma_i >= 0.

    The returned ``value`` is a guaranteed lower bound on
    min Tr[rho grad] over PSD rho with |Tr[Gamma_i rho] - gamma_i| <= eps' and
    Tr rho <= trace_bound: any negative eigenvalue left in
    grad - sum y_i Gamma_i is charged against ``trace_bound``.
    """
    ops = np.asarray(ops)
    values = np.asarray(values, dtype=float)
    m, n = ops.shape[0], ops.shape[1]
    # primal of this dual: min <grad, X>  s.t.  <Gamma_i, X> + u_i - v_i = gamma_i,
    #                                            u_i + v_i = eps'
    A = np.concatenate([ops, np.zeros((m, n, n), dtype=ops.dtype)])
    A_lp = np.zeros((2 * m, 2 * m))
    A_lp[np.arange(m), np.arange(m)] = 1.0
    A_lp[np.arange(m), m + np.arange(m)] = -1.0
    A_lp[m + np.arange(m), np.arange(m)] = 1.0
    A_lp[m + np.arange(m), m + np.arange(m)] = 1.0
    prob = LinearSDP(
        C=_herm(gradient),
        A=A,
        b=np.concatenate([values, np.full(m, eps_prime)]),
        c_lp=np.zeros(2 * m),
        A_lp=A_lp,
        kron=None if kron is None else kron.padded(m),
    )
    sol = solve(prob, tol, dump_path)
    y = sol.y[:m]
    slack = _herm(gradient - np.tensordot(y, ops, axes=1))
    min_eig = float(np.linalg.eigvalsh(slack)[0])
    if not np.all(np.isfinite(y)) or sol.status in (INFEASIBLE, UNBOUNDED):
        return DualCertificate(y, np.abs(y), -np.inf, min_eig, sol.status, sol)
    value = float(values @ y - eps_prime * np.sum(np.abs(y)))
    value += min(0.0, min_eig) * trace_bound
    return DualCertificate(y, np.abs(y), value, min_eig, sol.status, sol)


def with_tolerance(tol, **kw):
    return replace(tol or Tolerances(), **kw)
