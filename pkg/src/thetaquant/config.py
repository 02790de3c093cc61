"""Experiment manifests and the sectioned key-value configuration format.

A configuration document is plain text with ``key = value`` lines and
optional ``[section]`` headers (one experiment per section; a bare document
is a single experiment).  Complex numbers are written ``a+bi``; matrices as
row lists ``[[a, b], [c, d]]``; lists of levels or modes are comma or
semicolon separated.  Unknown keys and malformed values raise
:class:`ConfigError` with the offending line number.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .siegel import InvalidPointError, SiegelPoint

__all__ = [
    "ConfigError",
    "ExperimentManifest",
    "EXPERIMENT_IDS",
    "parse_complex",
    "parse_matrix",
    "parse_config",
    "parse_config_all",
]

EXPERIMENT_IDS = (
    "gram",
    "toeplitz-compare",
    "heat-identity",
    "covariance",
    "trace-lemma",
    "bms",
    "pairing-limit",
    "star-fit",
    "flatness",
    "tqft",
)

_KNOWN_KEYS = {
    "experiment",
    "n",
    "k",
    "Z",
    "modes",
    "tol",
    "grid",
    "epsilon",
    "workers",
    "out",
    "cache-dir",
    "genus",
}

DEFAULT_K = (2, 4, 8, 16)
DEFAULT_Z_N1 = ("i", "1+2i", "0.5+0.7i")

# Sweep defaults tuned per experiment (asymptotic fits need the long sweep,
# quadrature comparisons stay at desk-scale levels).
_DEFAULT_K_BY_EXPERIMENT = {
    "gram": (1, 2, 4, 8),
    "toeplitz-compare": (2, 4, 6),
    "heat-identity": (2, 4, 8),
    "covariance": (2, 4, 8),
    "trace-lemma": (2, 4, 8),
    "bms": (8, 16, 32, 64, 128),
    "pairing-limit": (8, 16, 32, 64, 128),
    "star-fit": (8, 16, 32, 64, 128),
    "flatness": (1,),
    "tqft": (2, 4, 8),
}


class ConfigError(ValueError):
    """Configuration problem, annotated with a line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def parse_complex(text, line=None):
    """Parse 'a+bi' notation ('i', '2i', '1+0.5i', '-0.5-0.7i', '3')."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ConfigError("empty complex literal", line)
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise ConfigError(f"malformed complex number {text!r}", line) from None


def parse_matrix(text, line=None):
    """Parse a scalar 'a+bi' or a row list '[[a, b], [c, d]]' into an array."""
    s = text.strip()
    if not s.startswith("["):
        return np.array([[parse_complex(s, line)]])
    if not (s.startswith("[[") and s.endswith("]]")):
        raise ConfigError(f"malformed matrix {text!r}", line)
    rows = []
    for row_text in re.split(r"\]\s*,\s*\[", s[2:-2]):
        rows.append([parse_complex(cell, line) for cell in row_text.split(",")])
    lengths = {len(r) for r in rows}
    if len(lengths) != 1:
        raise ConfigError("matrix rows have unequal lengths", line)
    return np.array(rows)


def _parse_mode(text, line=None):
    parts = [q.strip() for q in text.split(",")]
    if len(parts) % 2 != 0:
        raise ConfigError(f"mode needs 2n integers 'r,s', got {text!r}", line)
    try:
        vals = [int(q) for q in parts]
    except ValueError:
        raise ConfigError(f"malformed mode {text!r}", line) from None
    half = len(vals) // 2
    return tuple(vals[:half]), tuple(vals[half:])


@dataclass
class ExperimentManifest:
    """Validated parameters of one experiment run."""

    experiment: str
    n: int = 1
    k_values: tuple = DEFAULT_K
    points: tuple = ()  # SiegelPoint instances
    modes: tuple = ()  # ((r tuple, s tuple), ...)
    tol: float | None = None
    grid: int | None = None
    epsilon: float = 1e-12
    workers: int = 1
    out: str | None = None
    cache_dir: str | None = None
    genus: int = 1

    def canonical(self):
        """Deterministic text form; the cache key hashes this."""

        def fmt(z):
            return "%.17g%+.17gi" % (z.real, z.imag)

        pts = ";".join(
            "[" + ",".join("[" + ",".join(fmt(z) for z in row) + "]" for row in p.Z)
            + "]"
            for p in self.points
        )
        fields = [
            f"experiment={self.experiment}",
            f"n={self.n}",
            f"k={','.join(str(k) for k in self.k_values)}",
            f"Z={pts}",
            f"modes={self.modes}",
            f"tol={self.tol}",
            f"grid={self.grid}",
            f"epsilon={self.epsilon!r}",
            f"genus={self.genus}",
        ]
        return "|".join(fields)


def _default_points(n):
    if n == 1:
        return tuple(SiegelPoint(parse_complex(z)) for z in DEFAULT_Z_N1)
    return (SiegelPoint(np.diag([1j, 2j])),)


def _build_manifest(pairs, line_of):
    if "experiment" not in pairs:
        raise ConfigError("missing required key 'experiment'")
    exp = pairs["experiment"].strip()
    if exp not in EXPERIMENT_IDS:
        raise ConfigError(
            f"unknown experiment {exp!r}; choose from {', '.join(EXPERIMENT_IDS)}",
            line_of.get("experiment"),
        )
    m = ExperimentManifest(experiment=exp)
    m.k_values = _DEFAULT_K_BY_EXPERIMENT.get(exp, DEFAULT_K)
    if "n" in pairs:
        m.n = int(pairs["n"])
        if m.n < 1:
            raise ConfigError("n must be >= 1", line_of.get("n"))
    if "genus" in pairs:
        m.genus = int(pairs["genus"])
    if "k" in pairs:
        try:
            ks = tuple(
                int(x) for x in re.split(r"[;,]", pairs["k"]) if x.strip()
            )
        except ValueError:
            raise ConfigError(
                f"malformed level list {pairs['k']!r}", line_of.get("k")
            ) from None
        if not ks or any(k < 1 for k in ks):
            raise ConfigError("levels must be positive", line_of.get("k"))
        m.k_values = ks
    if "Z" in pairs:
        pts = []
        for chunk in pairs["Z"].split(";"):
            if not chunk.strip():
                continue
            mat = parse_matrix(chunk, line_of.get("Z"))
            try:
                pts.append(SiegelPoint(mat))
            except InvalidPointError as exc:
                raise ConfigError(str(exc), line_of.get("Z")) from None
        if not pts:
            raise ConfigError("empty Siegel point list", line_of.get("Z"))
        dims = {p.n for p in pts}
        if len(dims) != 1:
            raise ConfigError("Siegel points of mixed dimension", line_of.get("Z"))
        m.points = tuple(pts)
        if "n" not in pairs:
            m.n = pts[0].n
        elif m.n != pts[0].n:
            raise ConfigError(
                f"n={m.n} conflicts with {pts[0].n} x {pts[0].n} Siegel points",
                line_of.get("Z"),
            )
    else:
        m.points = _default_points(m.n)
    if "modes" in pairs:
        m.modes = tuple(
            _parse_mode(chunk, line_of.get("modes"))
            for chunk in pairs["modes"].split(";")
            if chunk.strip()
        )
    if "tol" in pairs:
        m.tol = float(pairs["tol"])
        if m.tol <= 0:
            raise ConfigError("tolerance must be positive", line_of.get("tol"))
    if "grid" in pairs:
        m.grid = int(pairs["grid"])
    if "epsilon" in pairs:
        m.epsilon = float(pairs["epsilon"])
        if m.epsilon <= 0:
            raise ConfigError("epsilon must be positive", line_of.get("epsilon"))
    if "workers" in pairs:
        m.workers = max(1, int(pairs["workers"]))
    if "out" in pairs:
        m.out = pairs["out"].strip()
    if "cache-dir" in pairs:
        m.cache_dir = pairs["cache-dir"].strip()
    return m


def _split_sections(text):
    """Yield (section pairs, key -> line number) blocks in document order."""
    sections = [({}, {})]
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            sections.append(({}, {}))
            name = line[1:-1].strip()
            if name:
                sections[-1][0]["experiment"] = name
                sections[-1][1]["experiment"] = lineno
            continue
        # allow several comma-separated assignments on one line
        parts = re.split(r",\s*(?=[A-Za-z_-]+\s*=)", line)
        for part in parts:
            if "=" not in part:
                raise ConfigError(f"expected 'key = value', got {part!r}", lineno)
            key, value = part.split("=", 1)
            key = key.strip()
            if key not in _KNOWN_KEYS:
                raise ConfigError(f"unknown key {key!r}", lineno)
            pairs, line_of = sections[-1]
            pairs[key] = value.strip()
            line_of[key] = lineno
    return [s for s in sections if s[0]]


def parse_config_all(text):
    """Every experiment manifest in the document, in order."""
    blocks = _split_sections(text)
    if not blocks:
        raise ConfigError("configuration contains no experiment")
    return [_build_manifest(pairs, line_of) for pairs, line_of in blocks]


def parse_config(text):
    """The single (or first) experiment manifest of the document."""
    return parse_config_all(text)[0]
