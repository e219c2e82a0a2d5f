# pytest wiring: bootstrap Django the same way tests.py does
from improvr import conf

conf.configure(DEBUG=True)
