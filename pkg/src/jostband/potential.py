"""Matrix potentials on the integer lattice.

A potential is a finitely supported map n -> V(n) into Hermitian L x L
complex matrices.  Sums over the interaction are controlled by the first
moment sum_n |n| * ||V(n)|| (spectral norm), and truncation to a window is
always explicit: the unrepresented tail is zero by construction.

File format (JSON)::

    { "L": 2,
      "sites": [ { "n": 0, "re": [[...], [...]], "im": [[...], [...]] } ] }

``re``/``im`` are L x L row-major real arrays; ``im`` may be omitted for a
real matrix.  Sites may appear in any order; a duplicate ``n`` is an error.
Entries must be Hermitian within 1e-10 and are symmetrized on load so the
downstream unitarity identities are exact.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, HermiticityError, PotentialFormatError
from .numerics import as_matrix, hermitian_defect, hermitian_part, spectral_norm

HERMITICITY_TOL = 1e-10

_FORMATS = ("json",)


@dataclass(frozen=True, eq=False)
class Potential:
    """Finitely supported Hermitian matrix potential.

    ``sites`` maps lattice site to the L x L matrix V(n); sites not listed
    are zero.  ``window`` = (n_lo, n_hi) is the declared range containing
    every nonzero site.
    """

    dim: int
    sites: dict[int, np.ndarray]
    window: tuple[int, int]
    _zero: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError("potential dimension must be positive")
        for n, v in self.sites.items():
            if v.shape != (self.dim, self.dim):
                raise DimensionError(
                    f"V({n}) has shape {v.shape}, expected {(self.dim, self.dim)}"
                )
            v.flags.writeable = False
        n_lo, n_hi = self.window
        if self.sites and (n_lo > min(self.sites) or n_hi < max(self.sites)):
            raise PotentialFormatError("declared window does not cover the support")
        zero = np.zeros((self.dim, self.dim), dtype=np.complex128)
        zero.flags.writeable = False
        object.__setattr__(self, "_zero", zero)

    def at(self, n: int) -> np.ndarray:
        return self.sites.get(n, self._zero)

    @property
    def support(self) -> list[int]:
        """Sorted sites with a stored (nonzero) matrix."""
        return sorted(self.sites)

    @property
    def support_bounds(self) -> tuple[int, int] | None:
        if not self.sites:
            return None
        return min(self.sites), max(self.sites)

    @property
    def first_moment(self) -> float:
        return sum(abs(n) * spectral_norm(v) for n, v in self.sites.items())

    def norm_at(self, n: int) -> float:
        return spectral_norm(self.at(n))


def make_potential(dim: int, sites, window: tuple[int, int] | None = None,
                   hermiticity_tol: float = HERMITICITY_TOL) -> Potential:
    """Validate and build a Potential from a {site: matrix} mapping.

    Non-Hermitian entries beyond ``hermiticity_tol`` are rejected; accepted
    entries are replaced by their Hermitian part.  Exactly zero matrices are
    dropped from the support.
    """
    cleaned: dict[int, np.ndarray] = {}
    for n, raw in sorted(dict(sites).items()):
        v = as_matrix(raw, dim)
        defect = hermitian_defect(v)
        if defect > hermiticity_tol:
            raise HermiticityError(int(n), defect)
        v = hermitian_part(v)
        if np.any(v != 0):
            cleaned[int(n)] = v
    if window is None:
        window = (min(cleaned), max(cleaned)) if cleaned else (0, 0)
    return Potential(dim=dim, sites=cleaned, window=(int(window[0]), int(window[1])))


def zero_potential(dim: int, window: tuple[int, int] = (0, 0)) -> Potential:
    return make_potential(dim, {}, window)


def scalar_potential(values: dict[int, complex]) -> Potential:
    """Convenience L = 1 constructor used throughout the tests."""
    return make_potential(1, {n: np.array([[v]]) for n, v in values.items()})


def load_potential(source, format: str = "json", *,
                   hermiticity_tol: float = HERMITICITY_TOL) -> Potential:
    """Load a validated Potential from a path, byte stream, or text.

    Raises PotentialFormatError on malformed documents, HermiticityError
    (with the offending site) on non-self-adjoint entries, DimensionError on
    shape mismatches.
    """
    if format not in _FORMATS:
        raise PotentialFormatError(f"unknown potential format {format!r}")
    if hasattr(source, "read"):
        text = source.read()
    elif isinstance(source, (str,)) and source.lstrip().startswith("{"):
        text = source
    elif isinstance(source, (bytes, bytearray)):
        text = bytes(source)
    else:
        with io.open(source, "r", encoding="utf-8") as fh:
            text = fh.read()
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PotentialFormatError(f"invalid JSON: {exc}") from exc
    return _potential_from_document(doc, hermiticity_tol)


def _potential_from_document(doc, hermiticity_tol: float) -> Potential:
    if not isinstance(doc, dict) or "L" not in doc or "sites" not in doc:
        raise PotentialFormatError('document must be {"L": int, "sites": [...]}')
    dim = doc["L"]
    if not isinstance(dim, int) or dim < 1:
        raise PotentialFormatError('"L" must be a positive integer')
    if not isinstance(doc["sites"], list):
        raise PotentialFormatError('"sites" must be a list')
    sites: dict[int, np.ndarray] = {}
    for entry in doc["sites"]:
        if not isinstance(entry, dict) or "n" not in entry or "re" not in entry:
            raise PotentialFormatError('each site needs "n" and "re" fields')
        n = entry["n"]
        if not isinstance(n, int):
            raise PotentialFormatError('site index "n" must be an integer')
        if n in sites:
            raise PotentialFormatError(f"duplicate site n={n}")
        re = np.asarray(entry["re"], dtype=float)
        im = np.asarray(entry.get("im", np.zeros_like(re)), dtype=float)
        if re.shape != (dim, dim) or im.shape != (dim, dim):
            raise DimensionError(
                f"site n={n}: expected {dim}x{dim} re/im arrays, got {re.shape}/{im.shape}"
            )
        sites[n] = re + 1j * im
    window = None
    if "window" in doc:
        w = doc["window"]
        if (not isinstance(w, (list, tuple)) or len(w) != 2
                or not all(isinstance(x, int) for x in w)):
            raise PotentialFormatError('"window" must be a pair of integers')
        window = (w[0], w[1])
    return make_potential(dim, sites, window, hermiticity_tol=hermiticity_tol)


def dump_potential(p: Potential) -> str:
    """Serialize to the JSON document format (load/dump round-trips exactly)."""
    doc = {
        "L": p.dim,
        "window": list(p.window),
        "sites": [
            {"n": n, "re": p.sites[n].real.tolist(), "im": p.sites[n].imag.tolist()}
            for n in p.support
        ],
    }
    return json.dumps(doc, indent=2)


def save_potential(p: Potential, path) -> None:
    with io.open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_potential(p))


def first_moment_tail(p: Potential, n_cut: int) -> float:
    """sum_{|j| > N} |j| * ||V(j)||, the truncation error budget beyond |n| = N.

    Monotone non-increasing in N and exactly 0 once N exceeds the support.
    """
    if n_cut < 0:
        raise PotentialFormatError("tail cutoff N must be >= 0")
    return sum(abs(n) * spectral_norm(v) for n, v in p.sites.items() if abs(n) > n_cut)


def one_sided_moment_tail(p: Potential, n_from: int) -> float:
    """sum_{j >= n_from} |j| * ||V(j)||, used to place Volterra base points."""
    return sum(abs(n) * spectral_norm(v) for n, v in p.sites.items() if n >= n_from)


def translate_origin(p: Potential, shift: int) -> Potential:
    """The translated potential V'(n) = V(n + shift)."""
    if shift == 0:
        return p
    sites = {n - shift: v.copy() for n, v in p.sites.items()}
    window = (p.window[0] - shift, p.window[1] - shift)
    return make_potential(p.dim, sites, window)


def reflect(p: Potential) -> Potential:
    """The space-reflected potential V'(n) = V(-n)."""
    sites = {-n: v.copy() for n, v in p.sites.items()}
    window = (-p.window[1], -p.window[0])
    return make_potential(p.dim, sites, window)


def random_hermitian_potential(rng: np.random.Generator, dim: int,
                               n_sites: int, entry_bound: float = 2.0,
                               scale: float | None = None,
                               center: int = 0) -> Potential:
    """Test helper: random Hermitian potential with entries bounded by entry_bound.

    ``scale`` (<= entry_bound) sets the typical magnitude; when omitted it is
    drawn log-uniformly in [1e-2, entry_bound] so the ensemble spans weak and
    strong coupling.
    """
    if scale is None:
        scale = float(np.exp(rng.uniform(np.log(1e-2), np.log(entry_bound))))
    scale = min(scale, entry_bound)
    lo = center - (n_sites - 1) // 2
    sites = {}
    for n in range(lo, lo + n_sites):
        raw = rng.uniform(-1, 1, (dim, dim)) + 1j * rng.uniform(-1, 1, (dim, dim))
        herm = hermitian_part(raw * scale)
        # Hermitian part of entries in [-s, s] + i[-s, s] stays within entry_bound.
        sites[n] = np.clip(herm.real, -entry_bound, entry_bound) + 1j * np.clip(
            herm.imag, -entry_bound, entry_bound)
    return make_potential(dim, sites)
