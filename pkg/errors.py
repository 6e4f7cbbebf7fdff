"""
Error types for the nanolaser simulator.
Each error knows the exit code the command-line front end returns for it.
"""


class NanolaserError(Exception):
    """Base class for every error raised by the simulator"""
    exit_code = 1


class ConfigError(NanolaserError, ValueError):
    """Raised when parameters, config files or command options fail validation"""
    exit_code = 2


class SolverError(NanolaserError, RuntimeError):
    """Raised when quadrature or root finding does not converge"""
    exit_code = 3


class PhysicsDomainError(NanolaserError, ValueError):
    """Raised when a quantity is requested outside the region where it exists (pole, split line, no photons)"""
    exit_code = 4
