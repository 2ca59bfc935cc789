"""One certified key rate, end to end.

Frank-Wolfe gives an upper estimate of the minimum, the dual certificate a
lower bound; the key rate subtracts the error-correction leakage.
"""

from cvqkd_psk import ProtocolConfig, compute_key_rate

cfg = ProtocolConfig(distance_km=50, xi=0.01, beta=0.95, delta_r=0.5, n_cutoff=8, fw_max_iters=30)
res = compute_key_rate(cfg)
print(f"step 1 (upper)   {res.step1_value:.6f}")
print(f"step 2 (lower)   {res.step2_lower:.6f}   zeta {res.zeta_eps:.2e}   eps' {res.epsilon_prime:.2e}")
print(f"p_pass {res.p_pass:.4f}   leakage {res.delta_EC:.4f} bits per passed signal")
print(f"key rate {res.rate:.6e} bits per signal ({res.status}, {res.iterations} iterations)")
