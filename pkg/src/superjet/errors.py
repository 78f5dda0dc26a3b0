"""Error types raised by the engine, each with a stable process exit code."""

from __future__ import annotations


class SuperjetError(Exception):
    exit_code = 3

    def __init__(self, message: str = "", **details):
        super().__init__(message)
        self.details = details

    @property
    def name(self) -> str:
        return type(self).__name__


class ParseSyntaxError(SuperjetError):
    exit_code = 10

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})", line=line, column=column)
        self.line = line
        self.column = column


class UnknownGenerator(SuperjetError):
    exit_code = 11


class ContextMismatch(SuperjetError):
    exit_code = 12


class NotHomogeneous(SuperjetError):
    exit_code = 13


class OddLevelTooHigh(SuperjetError):
    exit_code = 14


class NotHydrodynamic(SuperjetError):
    exit_code = 15


class DegenerateMetric(SuperjetError):
    exit_code = 16


class NonInvertibleLeadingJacobian(SuperjetError):
    exit_code = 17


class MixedOddLevels(SuperjetError):
    exit_code = 18


class LevelOutOfRange(SuperjetError):
    exit_code = 19


class NotBihamiltonianVectorField(SuperjetError):
    exit_code = 20


class NotExact(SuperjetError):
    exit_code = 21


class EtaNotConstant(SuperjetError):
    exit_code = 22


class EtaSingular(SuperjetError):
    exit_code = 23


class ResonantCalibration(SuperjetError):
    exit_code = 24


class ResonantSpectrum(SuperjetError):
    exit_code = 25


class UnsupportedResonance(SuperjetError):
    exit_code = 26


class ExactnessFailed(SuperjetError):
    exit_code = 27


class ResonantLevel(SuperjetError):
    exit_code = 28


class NoSolution(SuperjetError):
    exit_code = 29


class NonLocalObstruction(SuperjetError):
    exit_code = 30


class UnderdeterminedReported(SuperjetError):
    exit_code = 31


class VerificationFailed(SuperjetError):
    exit_code = 32


class NotATauSymmetry(SuperjetError):
    exit_code = 33


class InputError(SuperjetError):
    """Unreadable or malformed input file (not an expression syntax problem)."""

    exit_code = 34


class NotBihamiltonian(SuperjetError):
    exit_code = 35


class NonPolynomialCoefficient(SuperjetError):
    exit_code = 36


ALL_ERRORS = [
    ParseSyntaxError, UnknownGenerator, ContextMismatch, NotHomogeneous, OddLevelTooHigh,
    NotHydrodynamic, DegenerateMetric, NonInvertibleLeadingJacobian, MixedOddLevels,
    LevelOutOfRange, NotBihamiltonianVectorField, NotExact, EtaNotConstant, EtaSingular,
    ResonantCalibration, ResonantSpectrum, UnsupportedResonance, ExactnessFailed,
    ResonantLevel, NoSolution, NonLocalObstruction, UnderdeterminedReported,
    VerificationFailed, NotATauSymmetry, InputError, NotBihamiltonian,
    NonPolynomialCoefficient,
]
