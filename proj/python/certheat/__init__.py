"""Certified solvers for the Laplace and heat equations."""

import json
from fractions import Fraction

from ._certheat import (
    ConfigError,
    InsufficientPrecision,
    PreconditionError,
    blowup,
    brute_force_count,
    run_cli,
    run_pipeline,
    verify,
)
from . import _certheat

__all__ = [
    "ConfigError",
    "InsufficientPrecision",
    "PreconditionError",
    "blowup",
    "brute_force_count",
    "decimal_rendering",
    "dyadic_to_fraction",
    "parse_rational",
    "run_cli",
    "run_pipeline",
    "solve",
    "verify",
]


def _plain(value):
    # exact inputs only: floats would smuggle in binary rounding
    if isinstance(value, float):
        raise TypeError("pass rationals as int, Fraction or str, not float")
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def solve(config, bits=None):
    """Solve a problem given as a config dict (same schema as the CLI); returns the result record."""
    return json.loads(_certheat.solve_json(json.dumps(_plain(config)), bits))


def parse_rational(text):
    num, den = _certheat.parse_rational(text)
    return Fraction(int(num), int(den))


def decimal_rendering(value, bits):
    return _certheat.decimal_rendering(str(Fraction(value)), bits)


def dyadic_to_fraction(literal):
    """Exact value of a signed binary literal such as '+.0011' or '-10.1'."""
    sign = -1 if literal.startswith("-") else 1
    body = literal.lstrip("+-")
    whole, _, frac = body.partition(".")
    return sign * Fraction(int(whole or "0", 2) * 2 ** len(frac) + int(frac or "0", 2), 2 ** len(frac))
