"""Ship physics up close: drag-limited speed, overshooting, and the
fixed evaluation episodes."""

from progsearch import vehicle


def main() -> None:
    task = vehicle.VehicleTask()
    print(f"thrust accel {task.thrust_accel}, drag {task.drag} "
          f"-> speed bound {vehicle.speed_bound(task):.1f} units/s")

    # sustained thrust converges to the bound
    s = task.start
    for step in range(1, 101):
        s = vehicle.vehicle_step(s, "THRUST", task)
        if step in (1, 5, 20, 100):
            print(f"  after {step:>3} THRUST steps: speed {s.speed:6.2f}")

    # a full-throttle run at a target 100 units away overshoots badly
    run = vehicle.VehicleTask(target=(100.0, 0.0))
    s = run.start
    closest = vehicle.distance_to_target(s, run)
    for _ in range(run.steps):
        s = vehicle.vehicle_step(s, "THRUST", run)
        closest = min(closest, vehicle.distance_to_target(s, run))
    print(f"\nfull THRUST toward a 100-unit target: closest {closest:.1f}, "
          f"final distance {vehicle.distance_to_target(s, run):.1f} (overshot)")

    print("\nfixed evaluation episodes (omega=50):")
    for i, ep in enumerate(vehicle.default_episode_set(50.0)):
        d = vehicle.distance_to_target(ep.start, ep)
        print(f"  episode {i}: start ({ep.start.x:6.1f}, {ep.start.y:6.1f}) "
              f"heading {ep.start.heading:5.1f} deg, target distance {d:6.1f}")


if __name__ == "__main__":
    main()
