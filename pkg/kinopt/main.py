import click

from kinopt.cli import bench, diag, run, scale

@click.group()
def main():
    """Kinetic models of metaheuristic optimisers: runs, scaling limits and benchmarks."""

main.add_command(run.run)
main.add_command(scale.scale)
main.add_command(bench.bench)
main.add_command(diag.diag)

if __name__ == "__main__":
    main()
