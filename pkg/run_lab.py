"""Script to run the lab from a source checkout."""

from mullab.main import cli

if __name__ == "__main__":
    cli()
