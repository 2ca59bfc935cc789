"""The interior-point solver on small problems.

Minimum eigenvalue as an SDP, then a random complex instance with the
primal and dual values side by side.
"""

import numpy as np

from cvqkd_psk import sdp

C = np.array([[2.0, 1.0], [1.0, 0.0]])
sol = sdp.solve(sdp.LinearSDP(C=C, A=[np.eye(2)], b=[1.0]))
print("min eigenvalue via SDP:", sol.value, "numpy:", np.linalg.eigvalsh(C)[0])

rng = np.random.default_rng(1)
n = 6
B = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
X0 = B @ B.conj().T
X0 /= np.trace(X0).real
A = [np.eye(n)]
for _ in range(4):
    H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    A.append(H + H.conj().T)
b = [np.real(np.vdot(a, X0)) for a in A]
H = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
sol = sdp.solve(sdp.LinearSDP(C=H + H.conj().T, A=np.array(A), b=b))
print(f"status {sol.status}, primal {sol.primal_value:.9f}, dual {sol.dual_value:.9f}, {sol.iterations} iterations")
