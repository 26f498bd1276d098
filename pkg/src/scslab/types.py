from __future__ import annotations
from typing import Literal, get_args
import cmath

from .errors import NonFiniteInputError

__all__ = (
    'THETA', 'DEFAULT_EPS', 'Parity', 'Parities', 'Sign', 'Signs',
    'QuadScheme', 'QuadSchemes', 'EvalTarget', 'EvalTargets',
    'CompareMode', 'CompareModes', 'as_point', 'sign_value',
)

THETA = 7 / 64
"""Progress exponent toward Ramanujan-Petersson: |λ(n)| ≤ d(n)·n^θ"""

DEFAULT_EPS = 0.1

Parity = Literal['even', 'odd']
Parities: tuple[Parity, ...] = get_args(Parity)

Sign = Literal['+', '-']
Signs: tuple[Sign, ...] = get_args(Sign)

QuadScheme = Literal['tanh-sinh', 'gauss-legendre-panels']
QuadSchemes: tuple[QuadScheme, ...] = get_args(QuadScheme)

EvalTarget = Literal['lh', 'lh_sharp', 'residues', 'f']
EvalTargets: tuple[EvalTarget, ...] = get_args(EvalTarget)

CompareMode = Literal['smoothed', 'sharp']
CompareModes: tuple[CompareMode, ...] = get_args(CompareMode)


def as_point(z: complex|float|int, name: str = 'z') -> complex:
    """Coerce to :class:`complex`, rejecting NaN and infinities
    """
    z = complex(z)
    if not cmath.isfinite(z):
        raise NonFiniteInputError(f'{name} must be finite, got {z!r}')
    return z


def sign_value(sign: Sign) -> int:
    if sign == '+':
        return 1
    if sign == '-':
        return -1
    raise ValueError(f'invalid sign: {sign!r}')
