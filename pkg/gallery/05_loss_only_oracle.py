"""Loss-only channel: the analytical beam-splitter rate against the engine.

The oracle picks the amplitude, the engine runs at almost no excess noise.
"""

from dataclasses import replace

from cvqkd_psk import ProtocolConfig, compute_key_rate, lossonly_key_rate, optimal_alpha

for L in (20, 60):
    base = ProtocolConfig(distance_km=L, beta=0.95, n_cutoff=10)
    alpha, _ = optimal_alpha(base)
    ref = lossonly_key_rate(replace(base, alpha=alpha))
    res = compute_key_rate(ProtocolConfig(distance_km=L, beta=0.95, n_cutoff=10, alpha=alpha, xi=1e-5))
    print(f"L = {L} km, alpha = {alpha:.3f}: oracle {ref.rate:.5e}, engine {res.rate:.5e}, "
          f"ratio {res.rate / ref.rate:.4f}")
