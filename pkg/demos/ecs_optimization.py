# %% [markdown]
# # Mass versus entropy generation for the ECS
#
# The full loop: a pseudo-maximin design of 90 points inside the truncated
# domain, then one evaluation per iteration chosen by sequential Monte Carlo
# on the extended EI criterion.  A budget of 200 takes a few minutes on one
# core; pass a larger budget as the first argument to get a fuller front.

# %%
import sys
import tempfile
from pathlib import Path

from bmoo_ecs.optimizer import RunConfig, run
from bmoo_ecs.plot import plot_log

budget = int(sys.argv[1]) if len(sys.argv) > 1 else 200
out_dir = Path(tempfile.mkdtemp(prefix="ecs_run_"))
result = run(RunConfig(problem="ecs", budget=budget, n_init=90, seed=0, out_dir=str(out_dir)))
print(result.counters())

# %% [markdown]
# ## Failures and the first feasible design
#
# Many designs inside the domain cannot be simulated.  The initial design only
# rarely contains a feasible point; the constraint-violation part of the
# criterion drives the search towards one.

# %%
print(f"failures: {result.n_failures_doe} in the design, {result.n_failures_bo} afterwards")
print(f"first feasible evaluation: {result.first_feasible_eval_id}")

# %% [markdown]
# ## The Pareto set

# %%
for r in sorted(result.pareto_records, key=lambda r: r.objectives[0]):
    print(f"eval {r.eval_id:3d}  mass {r.objectives[0]:7.1f} kg  "
          f"entropy rate {r.objectives[1]:7.1f} W/K")

counts = plot_log(result.log, out_dir / "front.svg", x_label="Mass (kg)",
                  y_label="Entropy generation rate (W/K)")
print(f"scatter written to {out_dir / 'front.svg'}: {counts}")
