"""Solutions of H u = E u on a finite window of the lattice.

The Jost solution u_+ (normalized to z^n at +infinity) solves the Volterra
summation equation

    u_+(n) = z^n 1 - sum_{j > n} s(j - n) V(j) u_+(j),

and u_- (normalized to z^-n at -infinity) the mirror-image equation with the
sum over j < n.  The solver follows the constructive route: rescale to
tilde-variables u(n) = z^n f(n) so the kernel is summable, split the range at
the first site where the interaction tail is a contraction (< 1/2), solve
there by Neumann iteration, and extend the rest of the window with the exact
three-term recursion

    u(n - 1) = (E - V(n)) u(n) - u(n + 1).

Threshold solutions v_+ (normalized to n at +infinity, E = 2) and solutions
with prescribed data at sites 0 and 1 are built the same way.  Every returned
object carries its residual certificates in ``info``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (ConsistencyError, DimensionError, DomainError,
                     TruncationError)
from .freesol import energy_of, s_free, tau_free, validate_z
from .numerics import as_matrix, identity, spectral_norm
from .potential import Potential, one_sided_moment_tail, reflect

DEFAULT_TOL = 1e-10
MAX_ITERATIONS = 200
CONTRACTION_BOUND = 0.5

# Guard on |z|^(-n) growth across the window (double precision headroom).
_MAX_GROWTH_DECADES = 280.0


@dataclass(frozen=True, eq=False)
class LatticeMatrixFunction:
    """An L x L matrix-valued function on an integer window.

    ``values[k]`` is the matrix at site ``n_lo + k``.  ``role`` tags which
    solution it represents; ``z`` is the spectral parameter it was computed
    at (None for generic data).  ``info`` holds solver diagnostics such as
    residuals and iteration counts.
    """

    dim: int
    n_lo: int
    n_hi: int
    values: np.ndarray
    role: str = "generic"
    z: complex | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (self.n_hi - self.n_lo + 1, self.dim, self.dim):
            raise DimensionError(
                f"values shape {v.shape} does not match window "
                f"[{self.n_lo}, {self.n_hi}] at dimension {self.dim}"
            )
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def window(self) -> tuple[int, int]:
        return (self.n_lo, self.n_hi)

    def at(self, n: int) -> np.ndarray:
        if n < self.n_lo or n > self.n_hi:
            raise DimensionError(f"site {n} outside window [{self.n_lo}, {self.n_hi}]")
        return self.values[n - self.n_lo]

    def sites(self) -> range:
        return range(self.n_lo, self.n_hi + 1)

    @property
    def energy(self) -> complex | None:
        return None if self.z is None else energy_of(self.z)


def default_window(p: Potential, pad: int | None = None) -> tuple[int, int]:
    """Support padded by max(20, support width) sites on each side."""
    bounds = p.support_bounds or (0, 0)
    width = bounds[1] - bounds[0] + 1
    if pad is None:
        pad = max(20, width)
    return (bounds[0] - pad, bounds[1] + pad)


def _require_window(p: Potential, window: tuple[int, int] | None,
                    pad: int | None = None) -> tuple[int, int]:
    if window is None:
        window = default_window(p, pad)
    n_lo, n_hi = int(window[0]), int(window[1])
    if n_lo >= n_hi:
        raise DimensionError(f"window [{n_lo}, {n_hi}] is empty")
    bounds = p.support_bounds
    if bounds is not None and (n_lo > bounds[0] or n_hi < bounds[1]):
        raise TruncationError(
            f"window [{n_lo}, {n_hi}] does not cover the support {bounds}",
            tail=float("inf"),
        )
    return n_lo, n_hi


def _growth_check(z: complex, window: tuple[int, int]) -> None:
    decay = -np.log10(abs(z)) if abs(z) < 1.0 else 0.0
    span = max(abs(window[0]), abs(window[1]))
    if span * decay > _MAX_GROWTH_DECADES:
        raise DomainError(
            f"|z|^(-n) spans more than {_MAX_GROWTH_DECADES:.0f} decades on "
            f"window {window}; shrink the window or move z toward the circle"
        )


def schrodinger_residual(u: LatticeMatrixFunction, p: Potential,
                         energy: complex | None = None) -> float:
    """max_n || u(n-1) + V(n) u(n) + u(n+1) - E u(n) || over interior sites."""
    e = energy if energy is not None else u.energy
    if e is None:
        raise DomainError("no energy available for the residual check")
    worst = 0.0
    for n in range(u.n_lo + 1, u.n_hi):
        res = u.at(n - 1) + p.at(n) @ u.at(n) + u.at(n + 1) - e * u.at(n)
        worst = max(worst, spectral_norm(res))
    return worst


# ---------------------------------------------------------------------------
# Generic Volterra engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class VolterraProblem:
    """The summation equation f(n) = g(n) + sum_{j > n} K(n, j) f(j).

    ``majorant(j)`` must dominate ||K(n, j)|| for every n in the solve range;
    its sum over the active range is the contraction budget.  ``majorant_tail``
    optionally reports sum_{j > k} M(j) including mass beyond the range, so
    the solver can detect an uncoverable tail.
    """

    dim: int
    inhomogeneity: Callable[[int], np.ndarray]
    kernel: Callable[[int, int], np.ndarray]
    majorant: Callable[[int], float]
    majorant_tail: Callable[[int], float] | None = None
    active_sites: tuple[int, ...] | None = None  # sites where K(., j) can be nonzero


def solve_volterra(problem: VolterraProblem, n_start: int, n_end: int,
                   tol: float = DEFAULT_TOL,
                   max_iterations: int = MAX_ITERATIONS) -> LatticeMatrixFunction:
    """Solve the truncated Volterra equation on [n_start, n_end].

    The range is split at the first site where the majorant tail drops below
    1/2; Neumann iteration runs there and the remaining sites are filled by
    exact back-substitution (the equation is triangular).  Raises
    TruncationError, carrying the offending tail sum, when no split point
    achieves a contraction.
    """
    if n_start > n_end:
        raise DimensionError("empty Volterra range")
    dim = problem.dim
    sites = list(range(n_start, n_end + 1))
    candidates = sites if problem.active_sites is None else problem.active_sites
    active = sorted(s for s in candidates if n_start <= s <= n_end)

    def tail(k: int) -> float:
        in_range = sum(problem.majorant(j) for j in active if j > k)
        if problem.majorant_tail is not None:
            return in_range + max(problem.majorant_tail(n_end), 0.0)
        return in_range

    split = None
    for s in sites:
        if tail(s) < CONTRACTION_BOUND:
            split = s
            break
    if split is None:
        raise TruncationError(
            "no split point achieves a contraction on the given range",
            tail=tail(n_end),
        )

    g = np.stack([as_matrix(problem.inhomogeneity(n), dim) for n in sites])
    values = g.copy()
    upper = [j for j in active if j > split]

    def apply_tail_sum(n: int, f: np.ndarray) -> np.ndarray:
        acc = np.zeros((dim, dim), dtype=np.complex128)
        for j in active:
            if j > n:
                acc = acc + problem.kernel(n, j) @ f[j - n_start]
        return acc

    # Neumann iteration on [split, n_end].
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        change = 0.0
        new = values.copy()
        for n in range(split, n_end + 1):
            cand = g[n - n_start] + apply_tail_sum(n, values)
            change = max(change, spectral_norm(cand - new[n - n_start]))
            new[n - n_start] = cand
        values = new
        if change <= tol / 2:
            break
    else:
        raise TruncationError("Neumann iteration did not converge", tail=tail(split))

    # Exact back-substitution below the split (triangular structure).
    for n in range(split - 1, n_start - 1, -1):
        values[n - n_start] = g[n - n_start] + apply_tail_sum(n, values)

    residual = max(
        spectral_norm(values[n - n_start] - g[n - n_start] - apply_tail_sum(n, values))
        for n in sites
    )
    return LatticeMatrixFunction(
        dim=dim, n_lo=n_start, n_hi=n_end, values=values, role="volterra",
        info={"iterations": iterations, "split": split,
              "fixed_point_residual": residual, "tail_beyond_range": tail(n_end)},
    )


def _fixed_point(g: np.ndarray, apply_t: Callable[[np.ndarray], np.ndarray],
                 tol: float, max_iterations: int = MAX_ITERATIONS) -> tuple[np.ndarray, int]:
    """Iterate f <- g + T f from f = g until the sup-change is below tol/2."""
    f = g.copy()
    for it in range(1, max_iterations + 1):
        new = g + apply_t(f)
        change = max(spectral_norm(d) for d in (new - f))
        f = new
        if change <= tol / 2:
            return f, it
    raise TruncationError("fixed-point iteration did not converge")


# ---------------------------------------------------------------------------
# Jost solutions
# ---------------------------------------------------------------------------

def jost_plus(z: complex, p: Potential, window: tuple[int, int] | None = None,
              tol: float = DEFAULT_TOL) -> LatticeMatrixFunction:
    """Jost solution u_+ with u_+(n) = z^n (1 + o(1)) as n -> +infinity.

    Solves the tilde-form Volterra equation on the contraction subrange and
    extends leftward with the exact recursion.  The ``info`` dict carries
    the Volterra and recursion residual certificates.
    """
    z = validate_z(z)
    n_lo, n_hi = _require_window(p, window)
    _growth_check(z, (n_lo, n_hi))
    e = energy_of(z)
    dim = p.dim
    support = p.support

    def majorant(j: int) -> float:
        return max(j - n_lo, 0) * p.norm_at(j)

    # Sharp split: tail_s = sum_{j>s} (j - s) ||V(j)|| < 1/2 guarantees the
    # contraction for the n-dependent kernel bound |z^(j-n) s(j-n)| <= j - n.
    # The recursion below the split needs two seed sites, hence s <= n_hi - 1.
    split = None
    for s in range(n_lo, n_hi):
        if sum((j - s) * p.norm_at(j) for j in support if j > s) < CONTRACTION_BOUND:
            split = s
            break
    if split is None:
        raise TruncationError(
            f"window [{n_lo}, {n_hi}] leaves no room for a contraction split; "
            "pad the window on the right",
            tail=sum((j - n_hi + 1) * p.norm_at(j) for j in support if j >= n_hi),
        )

    span = n_hi - split
    s_scaled = np.zeros(span + 1, dtype=np.complex128)  # z^m s(m)
    for m in range(1, span + 1):
        s_scaled[m] = (z ** m) * s_free(z, m)

    problem = VolterraProblem(
        dim=dim,
        inhomogeneity=lambda n: identity(dim),
        kernel=lambda n, j: -s_scaled[j - n] * p.at(j),
        majorant=majorant,
        active_sites=tuple(j for j in support if j > split),
    )
    tilde = solve_volterra(problem, split, n_hi, tol=tol)

    count = n_hi - n_lo + 1
    values = np.zeros((count, dim, dim), dtype=np.complex128)
    for n in range(split, n_hi + 1):
        values[n - n_lo] = (z ** n) * tilde.at(n)
    for n in range(split - 1, n_lo - 1, -1):
        values[n - n_lo] = ((e * identity(dim) - p.at(n + 1)) @ values[n + 1 - n_lo]
                            - values[n + 2 - n_lo])

    u = LatticeMatrixFunction(
        dim=dim, n_lo=n_lo, n_hi=n_hi, values=values, role="jost_plus", z=z,
        info={"iterations": tilde.info["iterations"], "split": split},
    )
    _certify_jost_plus(u, p, tol)
    return u


def _certify_jost_plus(u: LatticeMatrixFunction, p: Potential, tol: float) -> None:
    z = u.z
    dim = p.dim
    scale_ok = abs(z) > 0.999  # normalized residuals once z^(-n) growth kicks in
    worst = 0.0
    for n in u.sites():
        acc = (z ** n) * identity(dim)
        for j in p.support:
            if j > n and j <= u.n_hi:
                acc = acc - s_free(z, j - n) * (p.at(j) @ u.at(j))
        res = spectral_norm(u.at(n) - acc)
        if not scale_ok:
            res /= max(1.0, spectral_norm(u.at(n)))
        worst = max(worst, res)
    schrod = schrodinger_residual(u, p)
    u.info["volterra_residual"] = worst
    u.info["schrodinger_residual"] = schrod
    norm_gap = spectral_norm(u.at(u.n_hi) * (z ** -u.n_hi) - identity(dim))
    u.info["normalization_gap"] = norm_gap
    if worst > 100 * tol or schrod > 100 * tol:
        raise ConsistencyError(
            f"Jost solution failed its residual certificate: volterra {worst:.3e}, "
            f"recursion {schrod:.3e}"
        )


def jost_minus(z: complex, p: Potential, window: tuple[int, int] | None = None,
               tol: float = DEFAULT_TOL) -> LatticeMatrixFunction:
    """Jost solution u_- with u_-(n) = z^-n (1 + o(1)) as n -> -infinity.

    Computed by reflecting the lattice (V(n) -> V(-n)), which maps the
    mirror-image Volterra equation exactly onto the one solved by jost_plus,
    and certified directly against its own equation afterwards.
    """
    z = validate_z(z)
    n_lo, n_hi = _require_window(p, window)
    mirrored = jost_plus(z, reflect(p), (-n_hi, -n_lo), tol=tol)
    values = mirrored.values[::-1]
    u = LatticeMatrixFunction(
        dim=p.dim, n_lo=n_lo, n_hi=n_hi, values=values, role="jost_minus", z=z,
        info={"iterations": mirrored.info["iterations"],
              "split": -mirrored.info["split"]},
    )
    _certify_jost_minus(u, p, tol)
    return u


def _certify_jost_minus(u: LatticeMatrixFunction, p: Potential, tol: float) -> None:
    z = u.z
    dim = p.dim
    zinv = 1.0 / z
    scale_ok = abs(z) > 0.999
    worst = 0.0
    for n in u.sites():
        acc = (z ** -n) * identity(dim)
        for j in p.support:
            if j < n and j >= u.n_lo:
                acc = acc + s_free(zinv, j - n) * (p.at(j) @ u.at(j))
        res = spectral_norm(u.at(n) - acc)
        if not scale_ok:
            res /= max(1.0, spectral_norm(u.at(n)))
        worst = max(worst, res)
    schrod = schrodinger_residual(u, p)
    u.info["volterra_residual"] = worst
    u.info["schrodinger_residual"] = schrod
    u.info["normalization_gap"] = spectral_norm(
        u.at(u.n_lo) * (z ** u.n_lo) - identity(dim))
    if worst > 100 * tol or schrod > 100 * tol:
        raise ConsistencyError(
            f"mirror Jost solution failed its residual certificate: "
            f"volterra {worst:.3e}, recursion {schrod:.3e}"
        )


# ---------------------------------------------------------------------------
# Threshold solutions v_+/v_- at E = 2
# ---------------------------------------------------------------------------

def jost_v_plus(p: Potential, window: tuple[int, int] | None = None,
                tol: float = DEFAULT_TOL) -> LatticeMatrixFunction:
    """Threshold solution with v(n) = n (1 + o(1)) as n -> +infinity (E = 2).

    The rescaled function f(n) = v(n)/n solves, for n >= N with the one-sided
    first moment beyond N below 1/2,

        f(n) = 1 + (1/n) sum_{j=N}^{n} j^2 V(j) f(j) + sum_{j>n} j V(j) f(j),

    which is solved by fixed-point iteration; the window left of N is filled
    by the recursion.
    """
    n_lo, n_hi = _require_window(p, window)
    dim = p.dim
    support = p.support

    base = None
    for s in range(1, n_hi):
        if one_sided_moment_tail(p, s) < CONTRACTION_BOUND:
            base = s
            break
    if base is None:
        raise TruncationError(
            "window too small to place the threshold base point",
            tail=one_sided_moment_tail(p, 1),
        )

    sites = list(range(base, n_hi + 1))
    active = [j for j in support if j >= base]
    g = np.stack([identity(dim) for _ in sites])

    def apply_t(f: np.ndarray) -> np.ndarray:
        out = np.zeros_like(f)
        for n in sites:
            acc = np.zeros((dim, dim), dtype=np.complex128)
            for j in active:
                if j <= n:
                    acc = acc + (j * j / n) * (p.at(j) @ f[j - base])
                else:
                    acc = acc + j * (p.at(j) @ f[j - base])
            out[n - base] = acc
        return out

    f, iterations = _fixed_point(g, apply_t, tol)

    count = n_hi - n_lo + 1
    values = np.zeros((count, dim, dim), dtype=np.complex128)
    for n in sites:
        values[n - n_lo] = n * f[n - base]
    for n in range(base - 1, n_lo - 1, -1):
        values[n - n_lo] = ((2.0 * identity(dim) - p.at(n + 1)) @ values[n + 1 - n_lo]
                            - values[n + 2 - n_lo])

    residual = max(
        spectral_norm(f[n - base] - identity(dim) - apply_t(f)[n - base])
        for n in sites
    )
    v = LatticeMatrixFunction(
        dim=dim, n_lo=n_lo, n_hi=n_hi, values=values, role="v_plus", z=1.0,
        info={"iterations": iterations, "base_point": base,
              "fixed_point_residual": residual},
    )
    schrod = schrodinger_residual(v, p, energy=2.0)
    v.info["schrodinger_residual"] = schrod
    # v(n)/n - 1 decays like C/n; report the gap and its computable bound.
    gap = spectral_norm(v.at(n_hi) / n_hi - identity(dim))
    f_max = max(spectral_norm(m) for m in f)
    v.info["normalization_gap"] = gap
    v.info["normalization_bound"] = (
        sum(j * j * p.norm_at(j) for j in active) * f_max / n_hi
    )
    if residual > 100 * tol or schrod > 100 * tol:
        raise ConsistencyError(
            f"threshold solution failed its certificate: fixed point {residual:.3e}, "
            f"recursion {schrod:.3e}"
        )
    return v


def jost_v_minus(p: Potential, window: tuple[int, int] | None = None,
                 tol: float = DEFAULT_TOL) -> LatticeMatrixFunction:
    """Threshold solution with v(n) = n (1 + o(1)) as n -> -infinity (E = 2)."""
    n_lo, n_hi = _require_window(p, window)
    mirrored = jost_v_plus(reflect(p), (-n_hi, -n_lo), tol=tol)
    values = -mirrored.values[::-1]
    v = LatticeMatrixFunction(
        dim=p.dim, n_lo=n_lo, n_hi=n_hi, values=values, role="v_minus", z=1.0,
        info={"iterations": mirrored.info["iterations"],
              "base_point": -mirrored.info["base_point"],
              "normalization_gap": mirrored.info["normalization_gap"]},
    )
    v.info["schrodinger_residual"] = schrodinger_residual(v, p, energy=2.0)
    return v


# ---------------------------------------------------------------------------
# Solutions with prescribed data at 0 and 1
# ---------------------------------------------------------------------------

def prescribed_solution(z: complex, a, b, p: Potential,
                        window: tuple[int, int] | None = None,
                        tol: float = DEFAULT_TOL,
                        two_path_tol: float = 1e-10) -> LatticeMatrixFunction:
    """The solution with values a at site 0 and b at site 1.

    Evaluated along two independent routes: the variation-of-parameters sums

        psi(n) = s(n)(b - a) + tau(n) a -+ sum s(n - j) V(j) psi(j)

    (minus for n > 1, plus for n < 0) and the raw three-term recursion from
    the data.  The sum route is stored; the certificate is the maximum
    scale-normalized deviation between the two, which must stay below
    ``two_path_tol``.
    """
    z = validate_z(z)
    if z == -1.0:
        raise DomainError("prescribed data propagation needs tau, undefined at z = -1")
    n_lo, n_hi = _require_window(p, window)
    if n_lo > 0 or n_hi < 1:
        raise DimensionError("window must contain the data sites 0 and 1")
    _growth_check(z, (n_lo, n_hi))
    dim = p.dim
    a = as_matrix(a, dim)
    b = as_matrix(b, dim)
    e = energy_of(z)
    count = n_hi - n_lo + 1

    sums = np.zeros((count, dim, dim), dtype=np.complex128)
    sums[0 - n_lo] = a
    sums[1 - n_lo] = b
    support = p.support
    for n in range(2, n_hi + 1):
        acc = s_free(z, n) * (b - a) + tau_free(z, n) * a
        for j in support:
            if 1 <= j <= n - 1:
                acc = acc - s_free(z, n - j) * (p.at(j) @ sums[j - n_lo])
        sums[n - n_lo] = acc
    for n in range(-1, n_lo - 1, -1):
        acc = s_free(z, n) * (b - a) + tau_free(z, n) * a
        for j in support:
            if n + 1 <= j <= 0:
                acc = acc + s_free(z, n - j) * (p.at(j) @ sums[j - n_lo])
        sums[n - n_lo] = acc

    recur = np.zeros_like(sums)
    recur[0 - n_lo] = a
    recur[1 - n_lo] = b
    for n in range(1, n_hi):
        recur[n + 1 - n_lo] = ((e * identity(dim) - p.at(n)) @ recur[n - n_lo]
                               - recur[n - 1 - n_lo])
    for n in range(0, n_lo, -1):
        recur[n - 1 - n_lo] = ((e * identity(dim) - p.at(n)) @ recur[n - n_lo]
                               - recur[n + 1 - n_lo])

    deviation = max(
        spectral_norm(sums[k] - recur[k]) / max(1.0, spectral_norm(sums[k]))
        for k in range(count)
    )
    if deviation > two_path_tol:
        raise ConsistencyError(
            f"prescribed-data paths disagree by {deviation:.3e} (> {two_path_tol:.1e})"
        )

    psi = LatticeMatrixFunction(
        dim=dim, n_lo=n_lo, n_hi=n_hi, values=sums, role="prescribed", z=z,
        info={"two_path_deviation": deviation},
    )
    psi.info["schrodinger_residual"] = schrodinger_residual(psi, p)
    return psi


def phi_solution(z: complex, p: Potential, window: tuple[int, int] | None = None,
                 tol: float = DEFAULT_TOL) -> LatticeMatrixFunction:
    """The prescribed-data solution seeded with the threshold Jost data.

    Data a = u_+^1(0), b = u_+^1(1); at z = 1 this reproduces u_+^1 itself.
    """
    n_lo, n_hi = _require_window(p, window)
    u1 = jost_plus(1.0, p, (n_lo, n_hi), tol=tol)
    phi = prescribed_solution(z, u1.at(0), u1.at(1), p, (n_lo, n_hi), tol=tol)
    phi.info["role_detail"] = "phi"
    return phi
