# improvr.exceptions.py

class ImprovrError(Exception):
    """Base class for errors raised by improvr.  ``exit_code`` is what the
    command line tools return when the error ends a command."""
    exit_code = 1


class DemoError(ImprovrError):
    """A demonstration file or trace is malformed or inconsistent.

    :param message:
        description of the problem
    :param path:
        file the problem was found in, if known
    :param frame:
        index of the first offending frame, if known
    """
    def __init__(self, message, path=None, frame=None):
        self.path = path
        self.frame = frame
        text = message
        if frame is not None:
            text = '%s (frame %s)' % (text, frame)
        if path is not None:
            text = '%s: %s' % (path, text)

        super(DemoError, self).__init__(text)


class AmbiguousCoMovement(DemoError):
    pass


class ModelError(ImprovrError):
    pass


class NoFeasiblePlan(ImprovrError):
    exit_code = 2


class InfeasibleStart(ImprovrError):
    exit_code = 3


class WorkspaceTooConstrained(ImprovrError):
    pass


class GuardExceeded(ImprovrError):
    pass


class CoverageError(ImprovrError):
    pass


class SceneError(ImprovrError):
    pass
