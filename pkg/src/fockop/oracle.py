"""Independent checks against truncated operator matrices on the p = 2 space.

The monomials e_alpha = z^alpha / sqrt(alpha!) are an orthonormal basis of the
p = 2 space, and inner products of exponential-polynomials against them have
exact series expressions, so every matrix entry here is computed without any
quadrature.  This gives an oracle for operator norms, essential norms and
compactness that shares no code path with the quadrature engine.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement

import numpy as np

from .errors import DimensionError, DomainError
from .funcspace import (
    ExpPoly,
    Term,
    apply_wco,
    kernel,
    monomial,
    multiply,
    normalized_kernel,
)
from .quad import DEFAULT_SPEC, QuadSpec, fock_norm
from .wco import WcoProblem

__all__ = [
    "TruncationSpec",
    "basis_indices",
    "f2_inner",
    "f2_norm",
    "f2_matrix",
    "truncated_norm",
    "truncated_essential_upper",
    "rayleigh_sweep",
    "compactness_witness",
]

#: largest admissible truncated basis
BASIS_CAP = 5000


@dataclass(frozen=True)
class TruncationSpec:
    """Degree cutoffs and probe family for the matrix oracle."""

    max_degree: int = 12
    margin: int = 6
    kernel_radii: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0)
    n_directions: int = 8
    seed: int = 7
    quad: QuadSpec = field(default_factory=QuadSpec)


def basis_indices(n: int, max_degree: int) -> list[tuple[int, ...]]:
    """Multi-indices with |alpha| <= max_degree in graded lexicographic order."""
    if n < 1 or max_degree < 0:
        raise DimensionError("need n >= 1 and max_degree >= 0")
    out: list[tuple[int, ...]] = []
    for d in range(max_degree + 1):
        level = []
        for combo in combinations_with_replacement(range(n), d):
            alpha = [0] * n
            for i in combo:
                alpha[i] += 1
            level.append(tuple(alpha))
        out.extend(sorted(level, reverse=True))
    if len(out) > BASIS_CAP:
        raise DomainError(f"basis of size {len(out)} exceeds the cap {BASIS_CAP}")
    return out


def _coord_series(g: int, d: int, c: complex, e: complex) -> complex:
    """sum_{k >= max(g,d)} k! conj(c)^(k-g) e^(k-d) / ((k-g)! (k-d)!).

    This is the one-variable inner product <z^g exp(z conj(c)), z^d exp(z conj(e))>
    on the p=2 space; the series converges superexponentially.
    """
    k0 = max(g, d)
    cc = complex(c).conjugate()
    ee = complex(e)
    term = complex(math.factorial(k0) / (math.factorial(k0 - g) * math.factorial(k0 - d)))
    term *= cc ** (k0 - g) * ee ** (k0 - d)
    total = term
    k = k0
    small = 0
    while k - k0 < 700:
        k += 1
        term *= cc * ee * k / ((k - g) * (k - d))
        total += term
        if abs(term) <= 1e-18 * (abs(total) + 1e-30):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    return total


def f2_inner(f: ExpPoly, g: ExpPoly) -> complex:
    """Exact p=2 inner product <f, g> (antilinear in g)."""
    if f.n != g.n:
        raise DimensionError("inner product needs equal arity")
    total = 0j
    for c1, p1, w1 in f.terms:
        for c2, p2, w2 in g.terms:
            prod = c1 * complex(c2).conjugate()
            for i in range(f.n):
                prod *= _coord_series(p1[i], p2[i], w1[i], w2[i])
                if prod == 0:
                    break
            total += prod
    return total


def f2_norm(f: ExpPoly) -> float:
    """Exact p=2 norm via the series inner product."""
    v = f2_inner(f, f).real
    return math.sqrt(max(v, 0.0))


def _monomial_pairing_tables(terms, max_m: int, n: int) -> list[list[np.ndarray]]:
    """For each term, per-coordinate arrays H[m] = <z^g exp(z conj(c)), z^m>.

    <z^g exp(z conj(c)), z^m> = m! conj(c)^(m-g) / (m-g)!  when m >= g, else 0.
    """
    tables = []
    for _, power, freq in terms:
        per_coord = []
        for i in range(n):
            g = power[i]
            cc = complex(freq[i]).conjugate()
            h = np.zeros(max_m + 1, dtype=complex)
            for m in range(g, max_m + 1):
                h[m] = math.factorial(m) / math.factorial(m - g) * cc ** (m - g)
            per_coord.append(h)
        tables.append(per_coord)
    return tables


def _matrix_block(problem: WcoProblem, in_indices, out_indices) -> np.ndarray:
    n = problem.n
    max_m = max((max(b) for b in out_indices), default=0)
    B = np.array(out_indices, dtype=int)
    out_fact = np.array(
        [math.sqrt(math.prod(math.factorial(k) for k in b)) for b in out_indices]
    )
    M = np.zeros((len(out_indices), len(in_indices)), dtype=complex)
    for col, alpha in enumerate(in_indices):
        image = apply_wco(problem.psi, problem.phi, monomial(n, alpha))
        tables = _monomial_pairing_tables(image.terms, max_m, n)
        colvals = np.zeros(len(out_indices), dtype=complex)
        for (coeff, _, _), per_coord in zip(image.terms, tables):
            prod = np.full(len(out_indices), coeff, dtype=complex)
            for i in range(n):
                prod = prod * per_coord[i][B[:, i]]
            colvals += prod
        in_fact = math.sqrt(math.prod(math.factorial(k) for k in alpha))
        M[:, col] = colvals / (out_fact * in_fact)
    return M


def f2_matrix(problem: WcoProblem, spec: TruncationSpec | None = None) -> np.ndarray:
    """Galerkin matrix of the operator on the degree-cut orthonormal basis.

    Only meaningful as an operator approximation for p = q = 2.
    """
    spec = spec or TruncationSpec()
    idx = basis_indices(problem.n, spec.max_degree)
    return _matrix_block(problem, idx, idx)


def truncated_norm(matrix: np.ndarray) -> float:
    """Largest singular value of a truncated matrix."""
    if matrix.ndim != 2:
        raise DimensionError("expected a 2-d matrix")
    return float(np.linalg.svd(matrix, compute_uv=False)[0])


def _probe_directions(n: int, count: int, seed: int) -> list[np.ndarray]:
    dirs = [np.eye(n, dtype=complex)[i] for i in range(n)]
    rng = np.random.default_rng(seed)
    for _ in range(count):
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        dirs.append(v / np.linalg.norm(v))
    return dirs


def _projected_kernel_tail(w: np.ndarray, max_degree: int) -> ExpPoly:
    """(I - P_N) k_w as an exact symbol: k_w minus its Taylor cut."""
    n = w.shape[0]
    scale = math.exp(-0.5 * float(np.sum(np.abs(w) ** 2)))
    terms = [Term(scale + 0j, (0,) * n, tuple(w))]
    for alpha in basis_indices(n, max_degree):
        c = scale * math.prod(complex(x).conjugate() ** a for x, a in zip(w, alpha))
        c /= math.prod(math.factorial(a) for a in alpha)
        terms.append(Term(-c, tuple(alpha), (0j,) * n))
    return ExpPoly(n, tuple(terms))


def truncated_essential_upper(problem: WcoProblem, spec: TruncationSpec | None = None) -> float:
    """Estimate of ||W restricted to high degrees||, a proxy for the essential norm.

    Two exact probes, both bounded above by the true restricted norm:
    the matrix block with low-degree columns removed, and Rayleigh quotients
    on kernel tails (I - P_N) k_w for far points w.
    """
    spec = spec or TruncationSpec()
    if not (problem.p == 2.0 and problem.q == 2.0):
        raise DomainError("the matrix oracle works on the p = q = 2 space")
    N = spec.max_degree
    big = basis_indices(problem.n, N + spec.margin)
    M = _matrix_block(problem, big, big)
    keep = np.array([sum(a) > N for a in big])
    tail_block = M[:, keep]
    best = truncated_norm(tail_block) if tail_block.shape[1] else 0.0

    for r in spec.kernel_radii:
        if r == 0:
            continue
        for d in _probe_directions(problem.n, spec.n_directions, spec.seed):
            w = r * d
            g = _projected_kernel_tail(np.asarray(w, dtype=complex), N)
            denom = f2_norm(g)
            # The numerator subtracts two nearly equal entire functions, so in
            # double precision its absolute floor is ~1e-8; quotients against a
            # denominator near that floor measure round-off, not the operator.
            if denom < 1e-4:
                continue
            num = f2_norm(apply_wco(problem.psi, problem.phi, g))
            best = max(best, num / denom)
    return best


@dataclass(frozen=True)
class SweepRecord:
    label: str
    quotient: float


@dataclass(frozen=True)
class SweepResult:
    records: tuple[SweepRecord, ...]
    best: float


def rayleigh_sweep(problem: WcoProblem, spec: TruncationSpec | None = None) -> SweepResult:
    """Quotients ||W f||_q / ||f||_p over a deterministic probe family.

    Probes: normalized kernels on a radial grid, low monomials, and a few
    kernel combinations.  Every quotient is a lower bound for the norm.
    """
    spec = spec or TruncationSpec()
    qspec = spec.quad
    n = problem.n
    records: list[SweepRecord] = []

    def add(label: str, f: ExpPoly) -> None:
        denom = fock_norm(f, problem.p, qspec).value
        if denom <= 0:
            return
        num = fock_norm(apply_wco(problem.psi, problem.phi, f), problem.q, qspec).value
        records.append(SweepRecord(label, num / denom))

    dirs = _probe_directions(n, spec.n_directions, spec.seed)
    add("kernel r=0", normalized_kernel(np.zeros(n, dtype=complex)))
    for r in spec.kernel_radii:
        for k, d in enumerate(dirs):
            add(f"kernel r={r:g} dir={k}", normalized_kernel(r * d))
    for alpha in basis_indices(n, 3):
        if sum(alpha) == 0:
            continue
        add(f"monomial {alpha}", monomial(n, alpha))
    for k, d in enumerate(dirs[: min(3, len(dirs))]):
        f = normalized_kernel(d) + normalized_kernel(-d)
        add(f"kernel pair dir={k}", f)
        g = multiply(monomial(n, (1,) + (0,) * (n - 1)), kernel(d))
        add(f"monomial*kernel dir={k}", g)
    best = max((rec.quotient for rec in records), default=0.0)
    return SweepResult(tuple(records), best)


@dataclass(frozen=True)
class WitnessRay:
    direction: tuple[complex, ...]
    base: tuple[complex, ...]
    radii: tuple[float, ...]
    values: tuple[float, ...]


def compactness_witness(
    problem: WcoProblem,
    radii: tuple[float, ...] = (1.0, 2.0, 4.0, 8.0),
    directions=None,
    base=None,
    spec: QuadSpec | None = None,
) -> list[WitnessRay]:
    """||W k_w||_q along rays w = base + r * direction.

    Kernel images under W stay exact symbols, so each value is one norm
    computation.  Compact operators send these to zero along every ray;
    non-compact bounded ones keep some ray bounded away from zero.
    """
    spec = spec or DEFAULT_SPEC
    n = problem.n
    if directions is None:
        directions = [np.eye(n, dtype=complex)[i] for i in range(n)]
    if base is None:
        base = np.zeros(n, dtype=complex)
    base = np.asarray(base, dtype=complex)
    rays = []
    for d in directions:
        dv = np.asarray(d, dtype=complex)
        if dv.shape != (n,):
            raise DimensionError("directions must be vectors in C^n")
        vals = []
        for r in radii:
            w = base + r * dv
            img = apply_wco(problem.psi, problem.phi, normalized_kernel(w))
            vals.append(fock_norm(img, problem.q, spec).value)
        rays.append(WitnessRay(tuple(dv), tuple(base), tuple(radii), tuple(vals)))
    return rays
