"""Gaussian-weighted L^p norms on C^n.

``fock_norm`` computes

    ||f||_p = ( (p/2pi)^n  Integral_{C^n} |f(z)|^p exp(-p|z|^2/2) dA(z) )^(1/p)

and ``fock_sup_norm`` the weighted sup  sup_z |f(z)| exp(-|z|^2/2).

Single-term symbols have exact closed forms (the integrals reduce to Gaussian
radial moments); everything else goes through tensor-product Gauss-Hermite
quadrature centered at the mean frequency, with an optional Monte Carlo
cross-check mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy import optimize
from scipy.special import gamma, hyp1f1

from .errors import DimensionError, DomainError
from .funcspace import ExpPoly, slice_head
from .linalg import as_cvector

__all__ = ["QuadSpec", "NormResult", "fock_norm", "fock_sup_norm", "slice_norm"]


@dataclass(frozen=True)
class QuadSpec:
    """Knobs for the numerical engines.

    nodes_per_axis / sup_grid default to dimension-dependent values when None.
    ``allow_closed_form=False`` forces the quadrature path even where a closed
    form exists (used by cross-validation tests).
    """

    method: str = "gauss_hermite"
    nodes_per_axis: int | None = None
    samples: int = 20000
    seed: int = 20260825
    sup_radius: float | None = None
    sup_grid: int | None = None
    refine_iters: int = 2
    allow_closed_form: bool = True

    def resolve_nodes(self, n: int) -> int:
        k = self.nodes_per_axis if self.nodes_per_axis is not None else (40 if n <= 2 else 24)
        if k < 8:
            raise DomainError("certified quadrature needs at least 8 nodes per axis")
        return int(k)

    def resolve_sup_grid(self, n: int) -> int:
        if self.sup_grid is not None:
            return int(self.sup_grid)
        return {1: 41, 2: 15, 3: 7}.get(n, 7)


DEFAULT_SPEC = QuadSpec()


@dataclass(frozen=True)
class NormResult:
    """A computed norm with its provenance.

    ``mode`` is one of closed_form / quadrature / monte_carlo; closed-form
    results carry err_estimate 0.  ``tail_radius`` records, for sup searches,
    the radius beyond which the analytic tail bound rules out a larger value.
    """

    value: float
    mode: str
    err_estimate: float
    tail_radius: float | None = None


def _check_p(p: float) -> float:
    p = float(p)
    if not (p > 0 and math.isfinite(p)):
        raise DomainError(f"exponent must satisfy 0 < p < inf, got {p}")
    return p


# -- closed forms -----------------------------------------------------------


def _single_term_norm(coeff: complex, power: tuple[int, ...], freq: tuple[complex, ...], p: float) -> float:
    """Exact norm of coeff * z^power * exp(<z, freq>).

    Per coordinate the integral is a Gaussian radial moment:
        (p/2pi) int |z|^(p a) e^{p Re(z conj(c)) - p|z|^2/2} dA
      = Gamma(pa/2 + 1) * 1F1(pa/2 + 1; 1; p|c|^2/2) * (p/2)^(-pa/2).
    """
    log_total = math.log(abs(coeff)) if coeff != 0 else -math.inf
    if coeff == 0:
        return 0.0
    for a, c in zip(power, freq):
        m = p * a
        x = p * (abs(c) ** 2) / 2.0
        if a == 0:
            # 1F1(1;1;x) = e^x, so the factor is exactly e^x
            log_factor = x
        else:
            val = gamma(m / 2.0 + 1.0) * hyp1f1(m / 2.0 + 1.0, 1.0, x) * (p / 2.0) ** (-m / 2.0)
            log_factor = math.log(val)
        log_total += log_factor / p
    return math.exp(log_total)


def _single_term_sup(coeff: complex, power: tuple[int, ...], freq: tuple[complex, ...]) -> float:
    """Exact weighted sup of a single term.

    Per coordinate maximize a log|z| + u|z| - |z|^2/2 with u = |c|; the
    maximizer is rho* = (u + sqrt(u^2 + 4a))/2.
    """
    if coeff == 0:
        return 0.0
    log_total = math.log(abs(coeff))
    for a, c in zip(power, freq):
        u = abs(c)
        if a == 0 and u == 0.0:
            continue
        rho = (u + math.sqrt(u * u + 4.0 * a)) / 2.0
        log_total += (a * math.log(rho) if a else 0.0) + u * rho - rho * rho / 2.0
    return math.exp(log_total)


# -- Gauss-Hermite machinery --------------------------------------------------


@lru_cache(maxsize=64)
def _gh_rule(k: int) -> tuple[np.ndarray, np.ndarray]:
    t, w = np.polynomial.hermite.hermgauss(k)
    # w * exp(t^2) stays O(1); compute it in log space to dodge overflow.
    wn = np.exp(np.log(w) + t * t)
    return t, wn


def _coordinate_grid(center: complex, p: float, k: int) -> tuple[np.ndarray, np.ndarray]:
    """Complex nodes and bare product weights for one complex coordinate."""
    t, wn = _gh_rule(k)
    h = math.sqrt(2.0 / p)
    xs = center.real + t * h
    ys = center.imag + t * h
    z = (xs[:, None] + 1j * ys[None, :]).ravel()
    w = (wn[:, None] * wn[None, :]).ravel() * (2.0 / p)
    return z, w


def _gh_integral_norm(f: ExpPoly, p: float, k: int) -> float:
    """Quadrature value of the norm using k nodes per real axis."""
    n = f.n
    if not f.terms:
        return 0.0
    center = np.mean(np.array([t.freq for t in f.terms], dtype=complex), axis=0)
    coords = []
    weights = []
    for i in range(n):
        z, w = _coordinate_grid(complex(center[i]), p, k)
        # fold the measure prefactor (p/2pi) and the Gaussian weight into the
        # per-coordinate arrays; w already carries the (2/p) substitution factor
        q = w * np.exp(-p * (np.abs(z) ** 2) / 2.0) * (p / (2.0 * math.pi))
        coords.append(z)
        weights.append(q)

    coeffs = np.array([t.coeff for t in f.terms], dtype=complex)
    factors = []
    for i in range(n):
        z = coords[i]
        fac = np.empty((len(f.terms), z.shape[0]), dtype=complex)
        for j, (_, power, freq) in enumerate(f.terms):
            v = np.exp(z * np.conj(freq[i])) if freq[i] != 0 else np.ones_like(z)
            if power[i]:
                v = v * z ** power[i]
            fac[j] = v
        factors.append(fac)

    if n == 1:
        vals = coeffs @ factors[0]
        total = float(np.sum((np.abs(vals) ** p) * weights[0]))
    elif n == 2:
        grid = (coeffs[:, None] * factors[0]).T @ factors[1]
        total = float(weights[0] @ (np.abs(grid) ** p) @ weights[1])
    else:
        g0 = coeffs[:, None] * factors[0]
        m = coords[0].shape[0]
        chunk = max(1, int(2_000_000 // (coords[1].shape[0] * coords[2].shape[0])) or 1)
        total = 0.0
        for lo in range(0, m, chunk):
            sl = slice(lo, min(lo + chunk, m))
            block = np.einsum("ja,jb,jc->abc", g0[:, sl], factors[1], factors[2], optimize=True)
            h = np.abs(block) ** p
            total += float(np.einsum("abc,a,b,c->", h, weights[0][sl], weights[1], weights[2]))
    if total < 0:
        total = 0.0
    return total ** (1.0 / p)


def _monte_carlo_norm(f: ExpPoly, p: float, spec: QuadSpec) -> NormResult:
    rng = np.random.default_rng(spec.seed)
    n = f.n
    m = int(spec.samples)
    if m < 16:
        raise DomainError("monte_carlo needs at least 16 samples")
    pts = rng.normal(scale=math.sqrt(1.0 / p), size=(m, 2 * n))
    z = pts[:, :n] + 1j * pts[:, n:]
    vals = np.abs(f.eval_many(z)) ** p
    mean = float(np.mean(vals))
    if mean <= 0.0:
        return NormResult(0.0, "monte_carlo", 0.0)
    sem = float(np.std(vals) / math.sqrt(m))
    value = mean ** (1.0 / p)
    err = (1.0 / p) * mean ** (1.0 / p - 1.0) * sem
    return NormResult(value, "monte_carlo", err)


# -- public ops --------------------------------------------------------------


def fock_norm(f: ExpPoly, p: float, spec: QuadSpec | None = None) -> NormResult:
    """Gaussian-weighted L^p norm of an exact symbol."""
    spec = spec or DEFAULT_SPEC
    p = _check_p(p)
    if f.is_zero():
        return NormResult(0.0, "closed_form", 0.0)
    if spec.method == "monte_carlo":
        return _monte_carlo_norm(f, p, spec)
    if spec.method != "gauss_hermite":
        raise DomainError(f"unknown quadrature method {spec.method!r}")
    if len(f.terms) == 1 and spec.allow_closed_form:
        t = f.terms[0]
        return NormResult(_single_term_norm(t.coeff, t.power, t.freq, p), "closed_form", 0.0)
    k = spec.resolve_nodes(f.n)
    value = _gh_integral_norm(f, p, k)
    k2 = max(8, k // 2)
    if k2 == k:
        k2 = k - 2
    check = _gh_integral_norm(f, p, k2)
    err = max(abs(value - check), 1e-11 * (1.0 + abs(value)))
    return NormResult(value, "quadrature", err)


def _tail_bound(f: ExpPoly, r: float) -> float:
    """Upper bound for |f(z)| e^{-|z|^2/2} on |z| >= r (valid once decreasing)."""
    total = 0.0
    for coeff, power, freq in f.terms:
        cmod = float(np.linalg.norm(np.array(freq, dtype=complex)))
        total += abs(coeff) * r ** sum(power) * math.exp(cmod * r - r * r / 2.0)
    return total


def fock_sup_norm(f: ExpPoly, spec: QuadSpec | None = None) -> NormResult:
    """Weighted sup-norm sup |f(z)| e^{-|z|^2/2}.

    Single terms are exact; otherwise a grid search inside an analytically
    safe radius is polished by a local optimizer, so the result is a certified
    lower bound that misses the true sup by at most the grid/polish error.
    """
    spec = spec or DEFAULT_SPEC
    if f.is_zero():
        return NormResult(0.0, "closed_form", 0.0)
    if len(f.terms) == 1 and spec.allow_closed_form:
        t = f.terms[0]
        return NormResult(_single_term_sup(t.coeff, t.power, t.freq), "closed_form", 0.0)

    n = f.n
    cmax = max(
        float(np.linalg.norm(np.array(t.freq, dtype=complex))) for t in f.terms
    )
    tcount = len(f.terms)
    maxc = f.max_coeff_modulus()
    maxdeg = f.degree()
    radius = cmax + 2.0
    for _ in range(2):
        radius = cmax + math.sqrt(
            max(0.0, 2.0 * math.log(max(tcount * maxc, 1.0))) + 4.0 * maxdeg * math.log1p(radius)
        )
        radius = max(radius, cmax + 2.0)
    if spec.sup_radius is not None:
        radius = max(radius, float(spec.sup_radius))

    g = spec.resolve_sup_grid(n)
    axis = np.linspace(-radius, radius, g)
    mesh = np.meshgrid(*([axis] * (2 * n)), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    z = pts[:, :n] + 1j * pts[:, n:]
    vals = np.abs(f.eval_many(z)) * np.exp(-np.sum(np.abs(z) ** 2, axis=1) / 2.0)
    best_idx = int(np.argmax(vals))
    best = float(vals[best_idx])
    x0 = pts[best_idx]

    def neg_log(x):
        zz = x[:n] + 1j * x[n:]
        v = abs(complex(f.eval_many(zz[np.newaxis, :])[0])) * math.exp(
            -float(np.sum(np.abs(zz) ** 2)) / 2.0
        )
        return -math.log(v + 1e-300)

    refined = best
    if spec.refine_iters > 0:
        res = optimize.minimize(
            neg_log, x0, method="Nelder-Mead",
            options={"maxiter": 200 * spec.refine_iters, "xatol": 1e-10, "fatol": 1e-12},
        )
        cand = math.exp(-float(res.fun))
        if cand > refined:
            refined = cand

    while _tail_bound(f, radius) > refined and radius < 80.0:
        radius += 2.0
    return NormResult(refined, "quadrature", abs(refined - best), tail_radius=radius)


def slice_norm(psi: ExpPoly, q: float, head: Sequence[complex], spec: QuadSpec | None = None) -> NormResult:
    """Norm in the remaining variables after freezing the first s coordinates.

    With all n coordinates frozen this degenerates to plain modulus |psi(head)|.
    """
    q = _check_p(q)
    h = as_cvector(head)
    s = h.shape[0]
    if not 0 < s <= psi.n:
        raise DimensionError(f"head length {s} must satisfy 0 < s <= n={psi.n}")
    if s == psi.n:
        return NormResult(abs(psi.eval(h)), "closed_form", 0.0)
    return fock_norm(slice_head(psi, h), q, spec)


def with_nodes(spec: QuadSpec | None, k: int) -> QuadSpec:
    """Convenience copy-with-nodes used by callers that scale resolution."""
    return replace(spec or DEFAULT_SPEC, nodes_per_axis=k)
