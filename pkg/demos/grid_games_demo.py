"""Play a few ticks of each grid game and print the rendered states.

The rendered text is exactly what policies receive (and what the initial
prompt shows the model), so this doubles as a peek at the observation space.
"""

import random

from progsearch import grid


def show(game: str, actions: list[str], seed: int = 0) -> None:
    state = grid.reset(game, seed)
    print(f"=== {game} (seed {seed}) ===")
    print(grid.render_text(state))
    total = 0.0
    for action in actions:
        if state.terminal:
            break
        state, reward = grid.step(state, action)
        total += reward
    print(f"\nafter {len(actions)} x {actions[0]}... (score {total:g}):")
    print(grid.render_text(state))
    print()


def main() -> None:
    show("breakout", ["NOOP"] * 4)
    show("freeway", ["UP"] * 5)
    show("asterix", ["NOOP"] * 11)

    # random rollouts: mean episode reward of a uniformly random policy
    rng = random.Random(1)
    for game in ("breakout", "freeway", "asterix"):
        totals = []
        for seed in range(20):
            state = grid.reset(game, seed)
            while not state.terminal and state.tick < 250:
                state, _ = grid.step(state, rng.choice(state.ACTIONS))
            totals.append(state.score)
        print(f"random policy on {game:9s}: mean reward "
              f"{sum(totals) / len(totals):.2f} over 20 episodes")


if __name__ == "__main__":
    main()
