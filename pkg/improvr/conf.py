# improvr.conf.py
import json, logging

import django
from django.conf import settings

from improvr.exceptions import ImprovrError

logger = logging.getLogger(__name__)

# ============================================================================
# Defaults
# ============================================================================

# Values that depend on the learned model are None here and get resolved by
# PlannerConfig.from_options()
DEFAULTS = {
    'iterations':300,
    'samples':16,
    'action_cost':None,
    'tau0':None,
    'cluster_cutoff':None,
    'max_depth':None,
    'waypoints':32,
    'seed':0,
    'noise':True,
    'require_action':False,
    'sigma_t':0.02,
    'sigma_r':0.1,
    'entropy_samples':1000,
    'eps_move':0.002,
    'min_frames':3,
    'hand_radius':0.15,
    'eps_static_t':0.005,
    'eps_static_r':0.035,
}

BASE_SETTINGS = {
    'DEBUG':False,
    'INSTALLED_APPS':(
        'improvr',
    ),
    'TEMPLATES':[{
        'BACKEND':'django.template.backends.django.DjangoTemplates',
        'APP_DIRS':True,
    }],
    'LOGGING':{
        'version':1,
        'disable_existing_loggers':False,
        'formatters':{
            'plain':{
                'format':'%(levelname)s %(name)s: %(message)s',
            },
        },
        'handlers':{
            'console':{
                'class':'logging.StreamHandler',
                'formatter':'plain',
            },
        },
        'loggers':{
            'improvr':{
                'handlers':['console'],
                'level':'WARNING',
            },
        },
    },
}


def configure(**overrides):
    """Bootstraps Django when improvr runs outside of a Django project (the
    console script and the test runner).  Does nothing if settings have
    already been configured.

    :param overrides:
        settings that replace the entries in ``BASE_SETTINGS``
    """
    if settings.configured:
        return

    values = dict(BASE_SETTINGS)
    values.update(overrides)
    settings.configure(**values)
    django.setup()


def load_config_file(path):
    """Reads a JSON config file whose keys are the long option names with
    dashes replaced by underscores.

    :raises ImprovrError:
        if the file can't be read or contains unknown keys
    """
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, ValueError) as e:
        raise ImprovrError('config file %s: %s' % (path, e))

    if not isinstance(data, dict):
        raise ImprovrError('config file %s: expected a JSON object' % path)

    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ImprovrError('config file %s: unknown keys %s' % (path,
            ', '.join(sorted(unknown))))

    return data


def get_options(config_file=None, **flags):
    """Merges the configuration layers: defaults < ``settings.IMPROVR`` <
    config file < flags.  Flags with a value of ``None`` are treated as not
    given.

    :returns:
        dictionary with every key in ``DEFAULTS``
    """
    options = dict(DEFAULTS)
    options.update(getattr(settings, 'IMPROVR', {}))
    if config_file:
        options.update(load_config_file(config_file))

    for key, value in flags.items():
        if key in DEFAULTS and value is not None:
            options[key] = value

    logger.debug('options: %s', options)
    return options
