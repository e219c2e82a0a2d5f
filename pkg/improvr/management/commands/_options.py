# improvr.management.commands._options.py
"""Shared plumbing of the improvr management commands: common flags, the
layered option merge, verbosity and error translation."""
import logging, sys

from django.core.management.base import BaseCommand, CommandError

from improvr.conf import DEFAULTS, get_options
from improvr.exceptions import ImprovrError

logger = logging.getLogger(__name__)

USAGE_EXIT = 1

VERBOSITY_LEVELS = {
    0:logging.ERROR,
    1:logging.WARNING,
    2:logging.INFO,
    3:logging.DEBUG,
}

# ============================================================================

class ImprovrCommand(BaseCommand):
    """Base class of the improvr commands.  Usage errors exit with 1 and an
    :class:`improvr.exceptions.ImprovrError` becomes a ``CommandError`` whose
    return code is the error's ``exit_code``."""
    requires_system_checks = []

    def create_parser(self, prog_name, subcommand, **kwargs):
        parser = super().create_parser(prog_name, subcommand, **kwargs)
        if parser.called_from_command_line:
            def usage_error(message):
                parser.print_usage(sys.stderr)
                sys.stderr.write('%s: error: %s\n' % (parser.prog, message))
                sys.exit(USAGE_EXIT)

            parser.error = usage_error

        return parser

    def execute(self, *args, **options):
        level = VERBOSITY_LEVELS.get(options.get('verbosity', 1),
            logging.DEBUG)
        logging.getLogger('improvr').setLevel(level)

        try:
            return super().execute(*args, **options)
        except ImprovrError as e:
            raise CommandError(str(e), returncode=e.exit_code)

    def merged_options(self, options):
        """Layers ``--config`` and the flags over the defaults, see
        :func:`improvr.conf.get_options`."""
        flags = {key:options.get(key) for key in DEFAULTS}
        return get_options(options.get('config'), **flags)

# ============================================================================
# Argument groups
# ============================================================================

def add_config_argument(parser):
    parser.add_argument('--config', metavar='PATH',
        help='JSON file with option values, same names as the long flags')


def add_bandwidth_arguments(parser):
    parser.add_argument('--sigma-t', type=float,
        help='translation bandwidth in meters')
    parser.add_argument('--sigma-r', type=float,
        help='rotation bandwidth in radians')


def add_planner_arguments(parser):
    parser.add_argument('--seed', type=int)
    parser.add_argument('--iterations', type=int, help='search budget K')
    parser.add_argument('--samples', type=int,
        help='goal samples per template at expansion')
    parser.add_argument('--action-cost', type=float)
    parser.add_argument('--tau0', type=float,
        help='initial Boltzmann temperature')
    parser.add_argument('--cluster-cutoff', type=float,
        help='goal cluster cutoff in meters')
    parser.add_argument('--max-depth', type=int,
        help='maximum number of actions in a plan')
    parser.add_argument('--waypoints', type=int,
        help='waypoints per trajectory')
    parser.add_argument('--no-noise', dest='noise', action='store_const',
        const=False, help='sample demonstrated goal poses without noise')
    parser.add_argument('--require-action', action='store_const',
        const=True, help='plans must contain at least one action')
