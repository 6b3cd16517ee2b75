"""End-to-end program search with a scripted provider and the stub runner.

A scripted provider stands in for a live LLM: it replays a fixed list of
"model responses" (fenced code blocks). The loop still does everything it
would do live: CanExec smoke checks, repair rounds for broken programs,
sandboxed evaluation, and strict-improvement hill climbing.
"""

from progsearch import ScriptedProvider, SearchConfig, make_task, run_experiment

SIMPLE_GENERATOR = """\
A first attempt: sprinkle walls at random.

```python
import random

def generate(params):
    rng = random.Random(params["seed"])
    w, h = params["width"], params["height"]
    grid = [[1 if rng.random() < 0.25 else 0 for _ in range(w)] for _ in range(h)]
    grid[0][0] = 0
    grid[h - 1][w - 1] = 0
    return grid
```
"""

BROKEN_ATTEMPT = """\
```python
def generate(params:
    return
```
"""

DENSER_GENERATOR = """\
Second idea: denser walls force longer detours.

```python
import random

def generate(params):
    rng = random.Random(params["seed"])
    w, h = params["width"], params["height"]
    grid = [[1 if rng.random() < 0.38 else 0 for _ in range(w)] for _ in range(h)]
    grid[0][0] = 0
    grid[h - 1][w - 1] = 0
    return grid
```
"""


def main() -> None:
    provider = ScriptedProvider(
        [SIMPLE_GENERATOR, BROKEN_ATTEMPT, DENSER_GENERATOR], cycle=True)
    config = SearchConfig(trials=3, iterations=4, max_repairs=3, seed=42)
    task = make_task("maze", maze_width=12, maze_height=12)

    outcome = run_experiment(task, config, provider)

    for trial in outcome.trials:
        print(f"trial {trial.trial}: best fitness {trial.best_fitness:.2f}")
        for rec in trial.records:
            print(f"  iteration {rec.iteration}: {rec.exec:<12} "
                  f"repairs={rec.repairs} fitness={rec.fitness}")
    print(f"\nrecommendation from trial {outcome.recommendation_trial}, "
          f"iteration {outcome.recommendation_iteration}, "
          f"fitness {outcome.best_fitness:.2f}")


if __name__ == "__main__":
    main()
