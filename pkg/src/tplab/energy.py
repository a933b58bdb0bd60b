"""Squared-derivative (carre du champ) operators, Dirichlet forms, matrix
variances and variance proxies.

On a finite chain every quantity is an exact finite sum: for a jump process
the small-time limit of the defining squared-difference formula collapses to
the closed form

    Gamma(f)(z) = (1/2) * sum_{z'} L(z, z') (f(z') - f(z))^2,

which avoids time-discretization error entirely.  On Gaussian models the
squared derivative is sum_i (d_i f)^2, computed from analytic partials when
the model carries them and by central differences otherwise.  Dirichlet
forms and variances are exact on finite chains and for Gaussian series, and
Monte Carlo estimates elsewhere (mode ESTIMATED).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import montecarlo
from .errors import DimensionError, DomainError
from .models import (
    FiniteChain,
    FiniteField,
    GaussianChaos,
    GaussianSeries,
    SmoothField,
    product_chain,
)
from .montecarlo import SampleSpec
from .spectral import op_norm

EXACT = "EXACT"
ESTIMATED = "ESTIMATED"

_PSD_TOL = 1e-10


def carre_table(chain: FiniteChain, f: FiniteField) -> np.ndarray:
    """Squared derivative at every state: (n_states, d, d), each PSD."""
    v = f.values
    if v.shape[0] != chain.n_states:
        raise DimensionError(
            f"field has {v.shape[0]} states but chain has {chain.n_states}"
        )
    gen = chain.generator
    out = np.empty_like(v)
    for z in range(chain.n_states):
        diff = v - v[z]
        sq = diff @ diff
        out[z] = 0.5 * np.einsum("w,wij->ij", gen[z], sq)
    return 0.5 * (out + out.transpose(0, 2, 1))


def carre_finite(chain: FiniteChain, f: FiniteField, z: int) -> np.ndarray:
    """Squared derivative at one state of a finite chain."""
    v = f.values
    if v.shape[0] != chain.n_states:
        raise DimensionError(
            f"field has {v.shape[0]} states but chain has {chain.n_states}"
        )
    diff = v - v[z]
    sq = diff @ diff
    out = 0.5 * np.einsum("w,wij->ij", chain.generator[z], sq)
    return 0.5 * (out + out.T)


def _carre_product_at(mu: np.ndarray, values: np.ndarray, m: int, n: int, s: int) -> np.ndarray:
    acc = np.zeros(values.shape[1:])
    fz = values[s]
    for i in range(n):
        p = m ** (n - 1 - i)
        digit = (s // p) % m
        base = s - digit * p
        repl = values[base + np.arange(m) * p]
        diff = repl - fz
        acc += 0.5 * np.einsum("w,wij->ij", mu, diff @ diff)
    return 0.5 * (acc + acc.T)


def carre_product_formula(base_mu, f: FiniteField, z: int | None = None):
    """Sum of squared discrete derivatives on a product space Omega^n:

        Gamma(f)(z) = (1/2) sum_i E_{Z~mu} [(f(z) - f(z with coord i := Z))^2]

    where f is tabulated over product states in row-major coordinate order.
    Equals ``carre_table`` on the matching complete-refresh product chain.
    Returns the full (m^n, d, d) table when z is None.
    """
    mu = np.asarray(base_mu, dtype=float)
    m = mu.shape[0]
    total = f.n_states
    n = max(1, round(np.log(total) / np.log(m))) if m > 1 else 1
    if m ** n != total:
        raise DimensionError(
            f"field has {total} states, not a power of the base size {m}"
        )
    if z is not None:
        return _carre_product_at(mu, f.values, m, n, z)
    out = np.empty_like(f.values)
    for s in range(total):
        out[s] = _carre_product_at(mu, f.values, m, n, s)
    return out


def carre_smooth(f: SmoothField, x) -> np.ndarray:
    """Squared derivative sum_i (d_i f(x))^2.

    Uses analytic partials when the field carries them; otherwise central
    differences with step h_i = cbrt(eps) * (1 + |x_i|), a second-order
    estimate.
    """
    x = np.asarray(x, dtype=float)
    if f.partials is not None:
        p = np.asarray(f.partials(x), dtype=float)
    else:
        h = np.cbrt(np.finfo(float).eps) * (1.0 + np.abs(x))
        p = np.empty((f.ambient_dim, f.dim, f.dim))
        for i in range(f.ambient_dim):
            step = np.zeros_like(x)
            step[i] = h[i]
            p[i] = (f(x + step) - f(x - step)) / (2.0 * h[i])
    out = np.einsum("kij,kjl->il", p, p)
    return 0.5 * (out + out.T)


def chaos_gamma_batch(chaos: GaussianChaos, xs: np.ndarray) -> np.ndarray:
    """Exact squared derivative 4 sum_i (sum_j x_j A_ij)^2 at a batch of
    points xs: (m, n) -> (m, d, d)."""
    m = np.einsum("mj,ijkl->mikl", xs, chaos.coefficients)
    return 4.0 * np.einsum("mikl,milp->mkp", m, m)


def _require_spec(spec):
    if spec is None or spec.n < 1:
        raise DomainError("Monte Carlo estimation requires a SampleSpec with n >= 1")


def dirichlet_form(model, f=None, spec: SampleSpec | None = None) -> np.ndarray:
    """Total energy E_mu[Gamma(f)].

    Exact for finite chains and Gaussian series (sum_i A_i^2); Monte Carlo
    for other Gaussian models, which requires a SampleSpec.
    """
    if isinstance(model, FiniteChain):
        gam = carre_table(model, f)
        return np.einsum("z,zij->ij", model.stationary, gam)
    if isinstance(model, GaussianSeries):
        a = model.coefficients
        return np.einsum("kij,kjl->il", a, a)
    if isinstance(model, GaussianChaos):
        _require_spec(spec)
        xs = montecarlo.draw_standard_normal(spec, model.n_vars)
        return chaos_gamma_batch(model, xs).mean(axis=0)
    if isinstance(model, SmoothField):
        _require_spec(spec)
        xs = montecarlo.draw_standard_normal(spec, model.ambient_dim)
        acc = np.zeros((model.dim, model.dim))
        for x in xs:
            acc += carre_smooth(model, x)
        return acc / len(xs)
    raise DomainError(f"unsupported model type {type(model).__name__}")


def matrix_variance(model, f=None, spec: SampleSpec | None = None) -> np.ndarray:
    """E[f^2] - (E f)^2, a PSD matrix; exact where the Dirichlet form is."""
    if isinstance(model, FiniteChain):
        v = f.values
        mu = model.stationary
        mean = np.einsum("z,zij->ij", mu, v)
        second = np.einsum("z,zij->ij", mu, v @ v)
        out = second - mean @ mean
        return 0.5 * (out + out.T)
    if isinstance(model, GaussianSeries):
        # E f = 0 and E[f^2] = sum_i A_i^2 for independent standard normals
        a = model.coefficients
        return np.einsum("kij,kjl->il", a, a)
    if isinstance(model, (GaussianChaos, SmoothField)):
        _require_spec(spec)
        field = model.as_field() if isinstance(model, GaussianChaos) else model
        xs = montecarlo.draw_standard_normal(spec, field.ambient_dim)
        vals = field.eval_batch(xs)
        mean = vals.mean(axis=0)
        second = np.einsum("mij,mjl->il", vals, vals) / len(xs)
        out = second - mean @ mean
        return 0.5 * (out + out.T)
    raise DomainError(f"unsupported model type {type(model).__name__}")


def variance_proxy(model, f=None, grid=None) -> tuple[float, str]:
    """Essential supremum of |Gamma(f)| over the state space.

    Finite chains (full-support mu) and Gaussian series are exact; for any
    other smooth model the supremum over a caller-declared grid of points is
    reported with mode ESTIMATED.  Checkers that need a true supremum must
    refuse ESTIMATED values without an explicit user-supplied bound.
    """
    if isinstance(model, FiniteChain):
        gam = carre_table(model, f)
        return max(op_norm(g) for g in gam), EXACT
    if isinstance(model, GaussianSeries):
        a = model.coefficients
        return op_norm(np.einsum("kij,kjl->il", a, a)), EXACT
    if isinstance(model, (GaussianChaos, SmoothField)):
        if grid is None:
            raise DomainError(
                "variance proxy for a general smooth field needs a declared "
                "evaluation grid (result is a lower estimate, mode ESTIMATED)"
            )
        field = model.as_field() if isinstance(model, GaussianChaos) else model
        sup = 0.0
        for x in np.asarray(grid, dtype=float):
            sup = max(sup, op_norm(carre_smooth(field, x)))
        return sup, ESTIMATED
    raise DomainError(f"unsupported model type {type(model).__name__}")


@dataclass(frozen=True)
class SymmetrizedPair:
    """The antisymmetric difference field g(z, z') = f(z) - f(z') on the
    two-fold product chain, with its energies.

    Satisfies Gamma(g)(z, z') = Gamma(f)(z) + Gamma(f)(z'), dirichlet
    = 2 * dirichlet(f) and v <= 2 * v_f (exactly 2 v_f when |Gamma(f)| is
    state-independent).
    """

    base: FiniteChain
    product: FiniteChain
    g: FiniteField
    gamma: np.ndarray
    dirichlet: np.ndarray
    v: float

    @property
    def g_grid(self) -> np.ndarray:
        m = self.base.n_states
        d = self.g.dim
        return self.g.values.reshape(m, m, d, d)

    def gamma_at(self, z: int, zp: int) -> np.ndarray:
        return self.gamma[z * self.base.n_states + zp]


def bivariate_symmetrized(chain: FiniteChain, f: FiniteField) -> SymmetrizedPair:
    """Build g(z, z') = f(z) - f(z') over the squared state space."""
    prod = product_chain(chain, 2)
    v = f.values
    g_vals = (v[:, None, :, :] - v[None, :, :, :]).reshape(-1, f.dim, f.dim)
    g = FiniteField(g_vals)
    gamma = carre_table(prod, g)
    dirichlet = np.einsum("z,zij->ij", prod.stationary, gamma)
    v_g = max(op_norm(m) for m in gamma)
    return SymmetrizedPair(base=chain, product=prod, g=g, gamma=gamma,
                           dirichlet=dirichlet, v=v_g)


@dataclass(frozen=True)
class EnergyReport:
    """Bundle of Gamma, Dirichlet form, variance and variance proxy with
    provenance (EXACT on finite chains and Gaussian series, ESTIMATED via
    Monte Carlo elsewhere)."""

    gamma: np.ndarray
    dirichlet: np.ndarray
    variance: np.ndarray
    v_f: float
    mode: str
    sample_meta: dict | None = None

    def to_json_dict(self) -> dict:
        out = {
            "gamma": [m.tolist() for m in self.gamma],
            "dirichlet": self.dirichlet.tolist(),
            "variance": self.variance.tolist(),
            "v_f": self.v_f,
            "mode": self.mode,
        }
        if self.sample_meta is not None:
            out["sample_meta"] = self.sample_meta
        return out


def _check_psd_stack(name: str, stack: np.ndarray):
    for m in stack:
        w = np.linalg.eigvalsh(0.5 * (m + m.T))
        scale = float(np.max(np.abs(w))) if w.size else 0.0
        if w.size and w[0] < -_PSD_TOL * (1.0 + scale):
            raise DomainError(f"{name} is not PSD within tolerance (min eig {w[0]:.3e})")


def energy_report(model, f=None, spec: SampleSpec | None = None, grid=None) -> EnergyReport:
    """Assemble a validated EnergyReport for any supported model."""
    if isinstance(model, FiniteChain):
        gam = carre_table(model, f)
        dirichlet = np.einsum("z,zij->ij", model.stationary, gam)
        variance = matrix_variance(model, f)
        v_f = max(op_norm(g) for g in gam)
        report = EnergyReport(gam, dirichlet, variance, v_f, EXACT)
    elif isinstance(model, GaussianSeries):
        dirichlet = dirichlet_form(model)
        gam = dirichlet[None, :, :]  # x-independent
        variance = matrix_variance(model)
        report = EnergyReport(gam, dirichlet, variance, op_norm(dirichlet), EXACT)
    elif isinstance(model, (GaussianChaos, SmoothField)):
        _require_spec(spec)
        dirichlet = dirichlet_form(model, spec=spec)
        variance = matrix_variance(model, spec=spec)
        field = model.as_field() if isinstance(model, GaussianChaos) else model
        if grid is not None:
            v_f, _ = variance_proxy(model, grid=grid)
            probe = np.asarray(grid, dtype=float)[:8]
        else:
            probe = montecarlo.draw_standard_normal(
                SampleSpec(n=8, seed=spec.seed), field.ambient_dim)
            v_f = max(op_norm(carre_smooth(field, x)) for x in probe)
        gam = np.stack([carre_smooth(field, x) for x in probe])
        meta = {"n": spec.n, "seed": spec.seed, "v_f_is_grid_sup": grid is not None}
        report = EnergyReport(gam, dirichlet, variance, v_f, ESTIMATED, meta)
    else:
        raise DomainError(f"unsupported model type {type(model).__name__}")
    _check_psd_stack("gamma", report.gamma)
    _check_psd_stack("dirichlet", report.dirichlet[None])
    _check_psd_stack("variance", report.variance[None])
    return report
