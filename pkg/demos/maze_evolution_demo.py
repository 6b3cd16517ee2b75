"""Evolve a maze directly against the longest-shortest-path objective.

The (1+4) evolution strategy is the non-LLM baseline for the maze task; it
also shows what the fitness landscape rewards: serpentine corridors that
stretch the shortest route between the fixed corners.
"""

from progsearch import maze


def main() -> None:
    print("open 10x10 scores", maze.score_maze(maze.open_grid(10, 10)))
    print("open 20x20 scores", maze.score_maze(maze.open_grid(20, 20)))
    print()

    for evaluations in (1, 1_000, 10_000, 50_000):
        grid, score = maze.ea_baseline(20, 20, evaluations=evaluations, seed=1)
        print(f"EA after {evaluations:>6} evaluations: score {score}")

    grid, score = maze.ea_baseline(20, 20, evaluations=50_000, seed=1)
    print(f"\nbest maze (score {score}), walls as #:")
    for row in grid.cells:
        print("".join("#" if v else "." for v in row))

    with open("evolved_maze.pgm", "w", encoding="utf-8") as fh:
        fh.write(maze.maze_to_pgm(grid))
    print("\nwrote evolved_maze.pgm")


if __name__ == "__main__":
    main()
