# %% [markdown]
# # Optimizing through simulation failures
#
# A two-variable problem small enough to look at: two quadratic objectives, one
# constraint and a hidden region where the "simulator" fails.  The domain has a
# hole in it.  Failed runs return no outputs, so the Gaussian processes never
# see them; a nearest-neighbour observability estimate steers the search away
# instead.

# %%
import numpy as np

from bmoo_ecs.optimizer import RunConfig, build_iteration_model, run
from bmoo_ecs.problems import HiddenConstraintPair

problem = HiddenConstraintPair()
config = RunConfig(problem="synthetic:hidden", budget=50, n_init=12, seed=1)
result = run(config)
print(result.counters())

# %% [markdown]
# ## Where the evaluations went
#
# After the initial design, few new points land in the failure corner
# {x1 > 0.7, x2 < 0.3}.

# %%
for phase in ("doe", "bo"):
    X = np.array([r.x for r in result.log if r.phase == phase])
    corner = problem.fails(X)
    print(f"{phase}: {len(X)} points, {corner.sum()} in the failure corner")

# %% [markdown]
# ## The criterion the loop maximizes
#
# EI under the surrogates times the probability of a successful run.  On a
# coarse grid it vanishes where failures were seen and inside the dominated
# region.

# %%
model = build_iteration_model(problem, result.log, config, result.n_evaluations + 1)
g = (np.arange(8) + 0.5) / 8
for x2 in g[::-1]:
    row = np.column_stack([g, np.full(8, x2)])
    values = np.where(problem.domain.contains(row), model.criterion.weighted(row), np.nan)
    print(" ".join("   ----" if np.isnan(v) else f"{v:7.1e}" for v in values))

# %% [markdown]
# ## The front
#
# The feasible Pareto set lies on the diagonal x1 = x2 above the constraint
# line x1 + x2 = 0.5.

# %%
for r in sorted(result.pareto_records, key=lambda r: r.objectives[0]):
    print(f"eval {r.eval_id:3d}  x = ({r.x[0]:.3f}, {r.x[1]:.3f})  "
          f"f = ({r.objectives[0]:.3f}, {r.objectives[1]:.3f})")
