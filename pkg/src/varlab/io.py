"""Text fixtures: self-describing matrices and integer-offset weights.

Matrix format (``#`` starts a comment, blank lines are ignored)::

    kind: kernel            # kernel | generator | function
    omega_weights: 1 1 1
    sigma_weights: 1 1      # function only; defaults to a single unit atom
    values:
    0.5 0.5 0
    ...                     # one row per omega atom, row-major

Weight format::

    offset: -4
    1.0
    2.0                     # one positive value per line
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ValidationError
from .lattice import LatticeFunction, MeasureSpace
from .operators import Generator, build_regular_operator
from .weights import Weight

MATRIX_KINDS = ("kernel", "generator", "function")


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line


def _floats(tokens, no, what):
    try:
        return [float(t) for t in tokens]
    except ValueError:
        raise ValidationError(f"line {no}: {what} must be numbers") from None


def parse_matrix_text(text: str, source: str = "<text>"):
    """Return (kind, omega MeasureSpace, sigma MeasureSpace, values)."""
    header, rows = {}, []
    in_values = False
    for no, line in _lines(text):
        if in_values:
            rows.append((no, _floats(line.split(), no, "matrix rows")))
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep:
            raise ValidationError(f"{source}: line {no}: expected 'key: value'")
        if key == "values":
            in_values = True
        elif key in ("kind", "omega_weights", "sigma_weights"):
            header[key] = (no, rest.strip())
        else:
            raise ValidationError(f"{source}: line {no}: unknown field {key!r}")
    if "kind" not in header:
        raise ValidationError(f"{source}: missing 'kind'")
    kind = header["kind"][1]
    if kind not in MATRIX_KINDS:
        raise ValidationError(f"{source}: line {header['kind'][0]}: kind must be one of {MATRIX_KINDS}")
    if "omega_weights" not in header:
        raise ValidationError(f"{source}: missing 'omega_weights'")
    if not rows:
        raise ValidationError(f"{source}: missing 'values'")

    def measure(field):
        no, body = header[field]
        w = _floats(body.split(), no, field)
        try:
            return MeasureSpace(np.array(w))
        except ValidationError as exc:
            raise ValidationError(f"{source}: line {no}: {field}: {exc}") from None

    omega = measure("omega_weights")
    sigma = measure("sigma_weights") if "sigma_weights" in header else MeasureSpace.counting(1)
    width = sigma.size if kind == "function" else omega.size
    for no, row in rows:
        if len(row) != width:
            raise ValidationError(f"{source}: line {no}: expected {width} values, got {len(row)}")
    if len(rows) != omega.size:
        raise ValidationError(f"{source}: expected {omega.size} rows, got {len(rows)}")
    values = np.array([r for _, r in rows])
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{source}: matrix has non-finite entries")
    return kind, omega, sigma, values


def format_matrix(kind: str, omega: MeasureSpace, values, sigma: MeasureSpace | None = None) -> str:
    if kind not in MATRIX_KINDS:
        raise ValidationError(f"kind must be one of {MATRIX_KINDS}")
    values = np.atleast_2d(np.asarray(values, dtype=float))
    out = [f"kind: {kind}", "omega_weights: " + " ".join(f"{w:.17g}" for w in omega.weights)]
    if sigma is not None:
        out.append("sigma_weights: " + " ".join(f"{w:.17g}" for w in sigma.weights))
    out.append("values:")
    out += [" ".join(f"{v:.17g}" for v in row) for row in values]
    return "\n".join(out) + "\n"


def load_matrix(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read fixture {path}: {exc.strerror}") from None
    return parse_matrix_text(text, str(path))


def load_operator(path):
    """A kernel fixture becomes a certified RegularOperator, a generator a Generator."""
    kind, omega, _, values = load_matrix(path)
    name = Path(path).name
    if kind == "kernel":
        return build_regular_operator(values, omega, name)
    if kind == "generator":
        return Generator(omega, values, name)
    raise ValidationError(f"{path}: expected a kernel or generator fixture, got {kind}")


def load_function(path) -> LatticeFunction:
    kind, omega, sigma, values = load_matrix(path)
    if kind != "function":
        raise ValidationError(f"{path}: expected a function fixture, got {kind}")
    return LatticeFunction(omega, sigma, values)


def parse_weight_text(text: str, source: str = "<text>") -> Weight:
    offset, vals = None, []
    for no, line in _lines(text):
        if offset is None:
            key, sep, rest = line.partition(":")
            if not sep or key.strip() != "offset":
                raise ValidationError(f"{source}: line {no}: first line must be 'offset: <integer>'")
            try:
                offset = int(rest.strip())
            except ValueError:
                raise ValidationError(f"{source}: line {no}: offset must be an integer") from None
            continue
        vals += _floats([line], no, "weight values")
        if not vals[-1] > 0:
            raise ValidationError(f"{source}: line {no}: weight values must be > 0")
    if offset is None or not vals:
        raise ValidationError(f"{source}: weight fixture needs an offset and at least one value")
    return Weight(np.array(vals), offset)


def format_weight(w: Weight) -> str:
    return f"offset: {w.offset}\n" + "".join(f"{v:.17g}\n" for v in w.values)


def load_weight(path) -> Weight:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read fixture {path}: {exc.strerror}") from None
    return parse_weight_text(text, str(path))
