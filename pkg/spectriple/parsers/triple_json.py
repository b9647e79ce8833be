import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Union

from spectriple.core.exceptions import (InvalidInputError, SpectralTripleException,
                                        TripleFormatError)
from spectriple.core.linalg import from_pairs, to_pairs
from spectriple.core.triple import FiniteTriple, RealStructure, RealStructureSigns

logger = logging.getLogger("spectriple")

BUNDLED_DIR = Path(__file__).resolve().parent.parent / "data"

REQUIRED_KEYS = ("hilbert_dim", "algebra_summands", "rep_basis")


def bundled_triples() -> Dict[str, Path]:
    """Shipped triple documents by file name."""
    return {path.name: path for path in sorted(BUNDLED_DIR.glob("*.json"))}


def resolve_path(path: Union[str, Path]) -> Path:
    """An existing path, or the bundled document of that name."""
    candidate = Path(path).expanduser()
    if candidate.exists():
        return candidate
    bundled = bundled_triples().get(candidate.name)
    if bundled is not None:
        logger.debug("resolve_path: %s -> bundled %s", path, bundled)
        return bundled
    raise TripleFormatError("no triple document at %s" % path)


def _matrix(value, name: str):
    if value is None:
        return None
    try:
        return from_pairs(value)
    except InvalidInputError as e:
        raise TripleFormatError("%s: %s" % (name, e))


def _sign(value, name: str, optional: bool = False) -> Optional[int]:
    if value is None and optional:
        return None
    if isinstance(value, bool) or value not in (1, -1):
        raise TripleFormatError("%s must be +1 or -1, got %r" % (name, value))
    return int(value)


def parse_triple(doc: Dict[str, Any]) -> FiniteTriple:
    """
    Build a FiniteTriple from a decoded triple document.

    Matrices are arrays of rows of ``[re, im]`` pairs; ``dirac``, ``grading``
    and ``real`` may be null and ``tol`` is optional.

    Raises
    ------
    TripleFormatError
        On missing keys or malformed values.
    TripleStructureError
        If the parsed operators do not fit together.
    """
    if not isinstance(doc, dict):
        raise TripleFormatError("triple document must be a JSON object")
    missing = [key for key in REQUIRED_KEYS if key not in doc]
    if missing:
        raise TripleFormatError("missing keys: %s" % ", ".join(missing))
    hilbert_dim = doc["hilbert_dim"]
    if isinstance(hilbert_dim, bool) or not isinstance(hilbert_dim, int):
        raise TripleFormatError("hilbert_dim must be an integer")
    summands = doc["algebra_summands"]
    if not isinstance(summands, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in summands):
        raise TripleFormatError("algebra_summands must be an array of integers")
    if not isinstance(doc["rep_basis"], list):
        raise TripleFormatError("rep_basis must be an array of matrices")
    rep_basis = [_matrix(m, "rep_basis[%d]" % k) for k, m in enumerate(doc["rep_basis"])]

    real = None
    real_doc = doc.get("real")
    if real_doc is not None:
        if not isinstance(real_doc, dict) or "unitary" not in real_doc:
            raise TripleFormatError("real must be an object with a unitary")
        try:
            signs = RealStructureSigns(
                _sign(real_doc.get("epsilon"), "epsilon"),
                _sign(real_doc.get("epsilon_prime"), "epsilon_prime"),
                _sign(real_doc.get("epsilon_double_prime"), "epsilon_double_prime", optional=True),
            )
        except InvalidInputError as e:
            raise TripleFormatError(str(e))
        real = RealStructure(_matrix(real_doc["unitary"], "real.unitary"), signs)

    kwargs = {}
    if doc.get("tol") is not None:
        if not isinstance(doc["tol"], (int, float)) or isinstance(doc["tol"], bool):
            raise TripleFormatError("tol must be a number")
        kwargs["tol"] = float(doc["tol"])
    return FiniteTriple(
        hilbert_dim=hilbert_dim,
        algebra_summands=summands,
        rep_basis=rep_basis,
        dirac=_matrix(doc.get("dirac"), "dirac"),
        grading=_matrix(doc.get("grading"), "grading"),
        real=real,
        **kwargs,
    )


def load_triple(path: Union[str, Path]) -> FiniteTriple:
    """Read and parse a triple document; bundled names are accepted."""
    path = resolve_path(path)
    try:
        doc = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as e:
        raise TripleFormatError("cannot read %s: %s" % (path, e))
    try:
        triple = parse_triple(doc)
    except SpectralTripleException:
        logger.critical("load_triple: %s is malformed", path)
        raise
    logger.info("load_triple: %s (dim %d, summands %s)", path.name, triple.hilbert_dim, triple.algebra_summands)
    return triple


def dump_triple(t: FiniteTriple) -> Dict[str, Any]:
    """Inverse of :func:`parse_triple`."""
    real = None
    if t.real is not None:
        real = {
            "unitary": to_pairs(t.real.unitary),
            "epsilon": t.real.signs.epsilon,
            "epsilon_prime": t.real.signs.epsilon_prime,
            "epsilon_double_prime": t.real.signs.epsilon_double_prime,
        }
    return {
        "hilbert_dim": t.hilbert_dim,
        "algebra_summands": list(t.algebra_summands),
        "rep_basis": [to_pairs(m) for m in t.rep_basis],
        "dirac": None if t.dirac is None else to_pairs(t.dirac),
        "grading": None if t.grading is None else to_pairs(t.grading),
        "real": real,
        "tol": t.tol,
    }


def save_triple(t: FiniteTriple, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(json.dumps(dump_triple(t), indent=1, sort_keys=True) + "\n")
    return path


def file_digest(path: Union[str, Path]) -> str:
    """sha256 of a file's bytes."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
