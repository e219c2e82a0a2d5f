# improvr.cli.py
import sys

from django.core.management import execute_from_command_line

from improvr import conf


def main(argv=None):
    """Entry point of the ``improvr`` console script: bootstraps settings and
    dispatches to the management commands (learn, plan, trials, render,
    oracle)."""
    conf.configure()
    execute_from_command_line(argv or sys.argv)
