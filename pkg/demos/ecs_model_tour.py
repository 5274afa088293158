# %% [markdown]
# # A tour of the ECS simulator
#
# The environment control system takes hot bleed air from the engine, cools it
# in two crossflow exchangers against ram air and expands it through a turbine
# that drives the compressor and the ram fan.  This script evaluates the seven
# published trade-off designs, measures how much of the design box is usable and
# looks at where the simulator fails.

# %%
import numpy as np

from bmoo_ecs.doe import estimate_domain_volume_ratio
from bmoo_ecs.ecs import LOWER, UPPER, domain_mask, evaluate, table2_point
from bmoo_ecs.ecs.table2 import REPORTED_ENTROPY, REPORTED_MASS

# %% [markdown]
# ## Reference designs
#
# Mass is reproduced closely.  The entropy rate uses a different exchanger
# closure than the published one, so only its ordering is comparable.

# %%
print(f"{'k':>2} {'mass':>8} {'published':>9} {'S_dot W/K':>10} {'published':>9}  feasible")
for k in range(1, 8):
    out = evaluate(table2_point(k))
    mass, s_dot = out.objectives
    print(f"{k:>2} {mass:8.2f} {REPORTED_MASS[k - 1]:9.2f} {s_dot:10.1f} "
          f"{REPORTED_ENTROPY[k - 1]:9.2f}  {out.feasible}")

# %% [markdown]
# ## The usable part of the box
#
# Nine geometric and kinematic restrictions cut the 18-dimensional box down to
# a few percent of its volume.  Rejection sampling is still cheap at that rate.

# %%
ratio, se = estimate_domain_volume_ratio(100_000, seed=0)
print(f"domain / box volume: {ratio:.4f} +/- {se:.4f}")
for k in range(1, 10):
    r, _ = estimate_domain_volume_ratio(100_000, seed=0, restrictions=list(range(1, k + 1)))
    print(f"  first {k} restrictions: {r:.4f}")

# %% [markdown]
# ## Where the simulator fails
#
# Inside the domain some designs still cannot be simulated: the shaft speed
# equation has no real root, a machine power has the wrong sign, or the flow
# goes supersonic.  Failures concentrate at high bleed flow and small
# compressor radius.

# %%
rng = np.random.default_rng(0)
X = LOWER + (UPPER - LOWER) * rng.random((200_000, LOWER.size))
X = X[domain_mask(X)]
outcomes = [evaluate(x) for x in X[:3000]]
reasons = {}
for out in outcomes:
    if not out.success:
        reasons[out.reason.kind] = reasons.get(out.reason.kind, 0) + 1
print(f"failures among {len(outcomes)} in-domain designs: {reasons}")

hot = X[(X[:, 0] >= 6) & (X[:, 2] <= 0.15)][:800]
cold = X[(X[:, 0] <= 4) & (X[:, 2] >= 0.25)][:800]
for name, S in (("mdot >= 6, r3 <= 0.15", hot), ("mdot <= 4, r3 >= 0.25", cold)):
    rate = np.mean([not evaluate(x).success for x in S])
    print(f"failure rate {name}: {rate:.1%} of {len(S)}")
