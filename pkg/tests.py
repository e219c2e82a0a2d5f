#!/usr/bin/env python

import sys

from django.test.runner import DiscoverRunner

from improvr import conf

conf.configure(DEBUG=True)

runner = DiscoverRunner(verbosity=1)
failures = runner.run_tests(['improvr.tests'])
if failures:
    sys.exit(failures)
