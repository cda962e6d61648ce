"""Exception hierarchy for pltvsar. All errors derive from PltvsarError."""


class PltvsarError(Exception):
    pass


# panel_core
class InvalidGrid(PltvsarError):
    pass


class IsolatedLocation(PltvsarError):
    def __init__(self, message, row=None):
        super().__init__(message)
        self.row = row


class DimensionError(PltvsarError):
    pass


class PanelParseError(PltvsarError):
    pass


class MissingData(PanelParseError):
    pass


class NonRectangularData(PanelParseError):
    pass


class NonFiniteData(PanelParseError):
    pass


class NonSquareWeights(PanelParseError):
    pass


class DiagonalNotZero(PanelParseError):
    pass


class InvalidSpec(PltvsarError):
    pass


# kernel_smoothing
class DegenerateGrid(PltvsarError):
    pass


class SingularWeights(PltvsarError):
    pass


class SingularLocalSystem(PltvsarError):
    def __init__(self, message, tau0=None, stage=None):
        super().__init__(message)
        self.tau0 = tau0
        self.stage = stage


# estimator
class InsufficientRegressors(PltvsarError):
    pass


class CollinearConstantBlock(PltvsarError):
    pass


# gof_test
class InvalidRss(PltvsarError):
    pass


class ExplosiveBootstrapDgp(PltvsarError):
    def __init__(self, message, max_abs_rho=None):
        super().__init__(message)
        self.max_abs_rho = max_abs_rho


# sim_harness
class DgpSingular(PltvsarError):
    def __init__(self, message, max_abs_rho=None):
        super().__init__(message)
        self.max_abs_rho = max_abs_rho


class PreconditionViolation(PltvsarError):
    pass


class ReplicateFailure(PltvsarError):
    def __init__(self, message, replicate=None):
        super().__init__(message)
        self.replicate = replicate


# cli
class ConfigError(PltvsarError):
    pass


class MissingInput(PltvsarError):
    pass
