"""
Parsers for the compact command-line specs of mode sets, gauge fields and
value lists. ``fire`` hands over ints, floats, tuples or raw strings
depending on how the argument looks, so every parser accepts all of them.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from spectriple.core.exceptions import InvalidInputError, ModeSpaceError
from spectriple.core.fermionic import ModeSpace, default_gauge_mode

GAUGE_NONE = ("", "none", "zero")
GAUGE_CONSTANT = "constant"
GAUGE_MODE = "mode"


def _vector(text: str, kind=float, length: int = 4) -> Tuple:
    parts = [p.strip() for p in str(text).split(",") if p.strip()]
    try:
        values = tuple(kind(p) for p in parts)
    except ValueError:
        raise InvalidInputError("cannot parse %r as a %d-vector" % (text, length))
    if len(values) != length:
        raise InvalidInputError("expected %d components in %r" % (length, text))
    return values


def parse_float_list(spec) -> List[float]:
    """'0.05,0.1,0.15', a tuple of numbers or a single number."""
    if isinstance(spec, (int, float)) and not isinstance(spec, bool):
        return [float(spec)]
    if isinstance(spec, (list, tuple)):
        items = list(spec)
    else:
        items = [p for p in str(spec).split(",") if p.strip()]
    try:
        values = [float(x) for x in items]
    except (TypeError, ValueError):
        raise InvalidInputError("cannot parse %r as a list of numbers" % (spec,))
    if not values:
        raise InvalidInputError("empty list of numbers")
    return values


def parse_modes(spec, side_length: float = 2 * np.pi) -> ModeSpace:
    """
    A mode count (symmetric set) or explicit modes 'n0,n1,n2,n3;m0,m1,m2,m3;...'.

    Raises
    ------
    ModeSpaceError
        If the modes are not admissible.
    """
    if isinstance(spec, bool):
        raise InvalidInputError("modes must be a count or a list of vectors")
    if isinstance(spec, int) or (isinstance(spec, str) and spec.strip().isdigit()):
        return ModeSpace.symmetric(int(spec), side_length)
    if isinstance(spec, (list, tuple)) and spec and all(isinstance(v, (list, tuple)) for v in spec):
        rows = [tuple(int(c) for c in v) for v in spec]
    elif isinstance(spec, (list, tuple)):
        rows = [tuple(int(c) for c in spec)]
    else:
        rows = [_vector(chunk, int) for chunk in str(spec).split(";") if chunk.strip()]
    if not rows or any(len(r) != 4 for r in rows):
        raise ModeSpaceError("modes must be integer 4-vectors")
    return ModeSpace(np.array(rows), side_length)


def parse_gauge(spec, ms: ModeSpace, rng: Optional[np.random.Generator] = None) -> Dict[Tuple, np.ndarray]:
    """
    Gauge modes from 'none', 'constant', 'mode' or 'q0,q1,q2,q3:y0,y1,y2,y3;...'.

    'constant' draws a real zero-mode Y; 'mode' draws a complex amplitude for
    the shortest nonzero mode difference. Components of y may be complex
    literals such as ``1+0.5j``.
    """
    text = "" if spec is None else str(spec).strip().lower()
    if text in GAUGE_NONE:
        return {}
    rng = rng if rng is not None else np.random.default_rng(0)
    if text == GAUGE_CONSTANT:
        return {(0, 0, 0, 0): rng.uniform(-1, 1, size=4)}
    if text == GAUGE_MODE:
        q = default_gauge_mode(ms)
        if q is None:
            raise ModeSpaceError("a single mode carries no nonzero gauge mode")
        return {q: rng.uniform(-1, 1, size=4) + 1j * rng.uniform(-1, 1, size=4)}
    modes = {}
    for chunk in str(spec).split(";"):
        if not chunk.strip():
            continue
        if ":" not in chunk:
            raise InvalidInputError("gauge entries look like 'q0,q1,q2,q3:y0,y1,y2,y3'")
        q_text, y_text = chunk.split(":", 1)
        modes[_vector(q_text, int)] = np.array(_vector(y_text.replace(" ", ""), complex))
    return modes
