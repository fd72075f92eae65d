"""Run the command line with `python -m quorum_allpairs`."""

from .cli import run_cli

if __name__ == "__main__":
    run_cli()
